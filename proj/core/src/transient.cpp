#include "ministep/transient.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "ministep/errors.hpp"

namespace ministep {

namespace {

LinearSystem build_linear_system(const AssembledSystem& sys, std::span<const double> is_vec,
                                 double dt) {
    if (!(dt > 0.0)) {
        throw SimError("time step must be positive");
    }
    if (static_cast<int>(is_vec.size()) != sys.size()) {
        throw DimensionMismatchError("source vector dimension mismatch");
    }
    LinearSystem lin;
    lin.a = scaled_sum(1.0 / dt, sys.c_matrix, sys.g_matrix);
    lin.b.resize(is_vec.size());
    for (size_t i = 0; i < is_vec.size(); ++i) {
        lin.b[i] = is_vec[i] - sys.f_vector[i];
    }
    lin.dt = dt;
    return lin;
}

SolveResult solve_with_fallback(const LinearSystem& lin, const SolverConfig& cfg,
                                const AssembledSystem& sys, bool& fallback) {
    auto map_singular = [&](const SingularMatrixError& e) -> SingularNodeError {
        const int col = e.column();
        const std::string node = col >= 0 && col < sys.size()
                                     ? sys.node_names[static_cast<size_t>(col)]
                                     : "?";
        return SingularNodeError(node, "node " + node + " leaves the system singular (" +
                                           e.what() + ")");
    };
    if (cfg.method == SolverMethod::LU) {
        try {
            return solve_direct(lin);
        } catch (const SingularMatrixError& e) {
            throw map_singular(e);
        }
    }
    try {
        SolveResult res = solve(lin, cfg);
        if (res.converged) {
            return res;
        }
    } catch (const ZeroDiagonalError&) {
        // A zero diagonal kills point iterations but not necessarily LU;
        // treat like any other iterative failure and try the direct path.
    } catch (const SingularBlockError&) {
    }
    fallback = true;
    try {
        return solve_direct(lin);
    } catch (const SingularMatrixError& e) {
        throw map_singular(e);
    }
}

struct AcceptedStep {
    StateVector x;
    int iterations = 0;
    bool fallback = false;
};

}  // namespace

StepResult linearized_step(const AssembledSystem& sys, std::span<const double> is_vec,
                           double dt, const SolverConfig& solver) {
    const LinearSystem lin = build_linear_system(sys, is_vec, dt);
    StepResult out;
    out.solve = solve_with_fallback(lin, solver, sys, out.fallback);
    out.x_new.values.resize(static_cast<size_t>(sys.size()));
    for (int i = 0; i < sys.size(); ++i) {
        out.x_new.values[static_cast<size_t>(i)] =
            sys.x_ref[static_cast<size_t>(i)] + out.solve.x[static_cast<size_t>(i)];
    }
    return out;
}

StateVector dc_initial_state(const Circuit& circuit) {
    return Assembler(circuit).zero_state();
}

TransientConfig transient_config_from(const Circuit& circuit) {
    const auto tran = circuit.tran();
    if (!tran) {
        throw SimError("netlist has no .TRAN directive");
    }
    TransientConfig cfg;
    cfg.dt_request = tran->dt_request;
    cfg.t_stop = tran->t_stop;
    if (circuit.step_mode().value_or(StepMode::Fixed) == StepMode::Dominant) {
        cfg.step_policy = DominantStep{tran->dt_request};
    } else {
        cfg.step_policy = FixedStep{tran->dt_request};
    }
    return cfg;
}

namespace {

// One backward-Euler step from x_old over dt. sys0 is assembled at x_old.
AcceptedStep take_step(const Assembler& asmr, const AssembledSystem& sys0,
                       const StateVector& x_old, double dt, const TransientConfig& cfg,
                       bool force_direct) {
    SolverConfig solver = cfg.solver;
    if (force_direct) {
        solver.method = SolverMethod::LU;
    }

    AcceptedStep acc;
    if (std::holds_alternative<SingleLinearization>(cfg.newton_mode)) {
        StepResult step = linearized_step(sys0, sys0.is_vector, dt, solver);
        acc.x = std::move(step.x_new);
        acc.iterations = step.solve.iterations;
        acc.fallback = step.fallback;
        return acc;
    }

    const auto& newton = std::get<FullNewton>(cfg.newton_mode);
    const size_t n = static_cast<size_t>(sys0.size());
    const double kcl_tol = 1e-9 * (1.0 + inf_norm(sys0.is_vector));
    StateVector x_cur = x_old;
    for (int m = 1; m <= newton.max_newton; ++m) {
        const AssembledSystem sys_m = m == 1 ? sys0 : asmr.assemble(x_cur);
        // Newton step on r(x) = C (x - x_old)/dt + f(x) - i_s. Passing
        // i_s - C (x_cur - x_old)/dt as the source makes linearized_step's
        // b = source - F the full residual; the C term vanishes on the
        // first iteration where x_cur == x_old.
        std::vector<double> dxdt(n);
        for (size_t i = 0; i < n; ++i) {
            dxdt[i] = (x_cur.values[i] - x_old.values[i]) / dt;
        }
        const std::vector<double> c_term = sys_m.c_matrix.apply(dxdt);
        std::vector<double> newton_source(n);
        for (size_t i = 0; i < n; ++i) {
            newton_source[i] = sys_m.is_vector[i] - c_term[i];
        }
        StepResult step = linearized_step(sys_m, newton_source, dt, solver);
        acc.iterations += step.solve.iterations;
        acc.fallback = acc.fallback || step.fallback;
        x_cur.values = std::move(step.x_new.values);
        const double max_dx = inf_norm(step.solve.x);
        if (max_dx <= newton.tol_v) {
            const AssembledSystem sys_check = asmr.assemble(x_cur);
            const std::vector<double> r = kcl_residual(sys_check, x_cur, x_old, dt);
            if (inf_norm(r) <= kcl_tol) {
                acc.x = std::move(x_cur);
                return acc;
            }
        }
    }
    throw NonConvergenceError("Newton refinement did not converge in " +
                              std::to_string(newton.max_newton) + " iterations");
}

}  // namespace

Waveform run_transient(const Circuit& circuit, const StateVector& x0,
                       const TransientConfig& cfg) {
    if (!(cfg.t_stop > 0.0)) {
        throw SimError("t_stop must be positive");
    }
    const Assembler asmr(circuit, cfg.gmin);
    if (static_cast<int>(x0.values.size()) != asmr.unknown_count()) {
        throw DimensionMismatchError("initial state dimension mismatch");
    }

    Waveform wf;
    wf.node_names = asmr.unknown_names();

    StateVector x = x0;
    double t = 0.0;
    while (t < cfg.t_stop) {
        const AssembledSystem sys = asmr.assemble(x);
        const StepChoice choice = choose_step(cfg.step_policy, sys);
        double dt = choice.dt;
        bool last = false;
        // Land exactly on t_stop; absorb accumulated rounding in the
        // final step rather than emitting a sliver step.
        if (t + dt >= cfg.t_stop - 1e-9 * std::min(dt, cfg.t_stop)) {
            dt = cfg.t_stop - t;
            last = true;
        }

        AcceptedStep acc;
        double dt_used = dt;
        try {
            acc = take_step(asmr, sys, x, dt, cfg, choice.dominance_unattainable);
        } catch (const SimError&) {
            // Retry ladder: one attempt at dt/2, then give up.
            dt_used = dt / 2.0;
            last = false;
            acc = take_step(asmr, sys, x, dt_used, cfg, choice.dominance_unattainable);
            acc.fallback = true;
        }

        const double margin =
            check_dominance(scaled_sum(1.0 / dt_used, sys.c_matrix, sys.g_matrix)).margin;
        const double t_new = last ? cfg.t_stop : t + dt_used;
        if (!(t_new > t)) {
            throw SimError("time step " + std::to_string(dt_used) +
                           " cannot advance the clock at t=" + std::to_string(t));
        }
        t = t_new;
        x = std::move(acc.x);
        x.time = t;
        wf.samples.push_back(Sample{t, x.values});
        wf.step_log.push_back(StepLogEntry{t, dt_used, margin, acc.iterations,
                                           acc.fallback || choice.dominance_unattainable});
    }
    return wf;
}

namespace {

void print_sci(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    os << buf;
}

}  // namespace

void write_waveform_csv(const Waveform& wf, std::ostream& os) {
    os << "time";
    for (const auto& name : wf.node_names) {
        os << ',' << name;
    }
    os << '\n';
    for (const Sample& s : wf.samples) {
        print_sci(os, s.time);
        for (double v : s.voltages) {
            os << ',';
            print_sci(os, v);
        }
        os << '\n';
    }
}

void write_step_log_csv(const Waveform& wf, std::ostream& os) {
    os << "time,dt,dominance_margin,solver_iterations,fallback\n";
    for (const StepLogEntry& e : wf.step_log) {
        print_sci(os, e.time);
        os << ',';
        print_sci(os, e.dt);
        os << ',';
        print_sci(os, e.dominance_margin);
        os << ',' << e.solver_iterations << ',' << (e.fallback ? 1 : 0) << '\n';
    }
}

}  // namespace ministep
