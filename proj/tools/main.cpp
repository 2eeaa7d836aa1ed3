// Command-line front end: run transient simulations, print maximum-step
// estimates, and audit diagonal dominance of C/dt + G for a netlist.
//
// Exit codes: 0 success, 1 netlist/config error, 2 numerical failure,
// 3 not dominant (check).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ministep/assembly.hpp"
#include "ministep/errors.hpp"
#include "ministep/netlist.hpp"
#include "ministep/solvers.hpp"
#include "ministep/stepcontrol.hpp"
#include "ministep/transient.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitNotDominant = 3;

std::string sci(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}

// Human-readable seconds with an SI prefix ("5.000 fs"). Summary lines only;
// CSV output stays in plain scientific notation.
std::string si_seconds(double v) {
    static constexpr std::pair<double, const char*> kScales[] = {
        {1.0, "s"},    {1e-3, "ms"},  {1e-6, "us"},
        {1e-9, "ns"},  {1e-12, "ps"}, {1e-15, "fs"},
    };
    if (v == 0.0 || !std::isfinite(v)) {
        return sci(v) + " s";
    }
    for (const auto& [scale, name] : kScales) {
        if (std::abs(v) >= scale) {
            char buf[48];
            std::snprintf(buf, sizeof(buf), "%.3f %s", v / scale, name);
            return buf;
        }
    }
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3f as", v / 1e-18);
    return buf;
}

struct CommonFlags {
    std::string solver = "lu";
    int blocks = 1;
    std::optional<std::string> step_mode;
    std::optional<double> dt;
    std::optional<double> tstop;
    std::string newton = "single";
    std::string out = "wave.csv";
    std::string steplog;
    double tol = 1e-10;
    int max_iters = 10000;
};

std::optional<ministep::Circuit> load_netlist(const std::string& path, int& exit_code) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot open '" << path << "'\n";
        exit_code = kExitParse;
        return std::nullopt;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    auto parsed = ministep::parse_netlist(buf.str());
    if (const auto* err = std::get_if<ministep::ParseError>(&parsed)) {
        std::cerr << "error: " << path << ": " << err->to_string() << "\n";
        exit_code = kExitParse;
        return std::nullopt;
    }
    return std::get<ministep::Circuit>(std::move(parsed));
}

ministep::SolverConfig make_solver_config(const CommonFlags& flags, int& exit_code) {
    ministep::SolverConfig cfg;
    cfg.tol = flags.tol;
    cfg.max_iters = flags.max_iters;
    cfg.block_count = flags.blocks;
    cfg.parallel_blocks = flags.blocks > 1;
    if (flags.solver == "lu") {
        cfg.method = ministep::SolverMethod::LU;
    } else if (flags.solver == "jacobi") {
        cfg.method = ministep::SolverMethod::Jacobi;
    } else if (flags.solver == "gauss-seidel") {
        cfg.method = ministep::SolverMethod::GaussSeidel;
    } else if (flags.solver == "block-jacobi") {
        cfg.method = ministep::SolverMethod::BlockJacobi;
    } else {
        std::cerr << "error: unknown solver '" << flags.solver << "'\n";
        exit_code = kExitParse;
    }
    return cfg;
}

int run_simulate(const std::string& path, const CommonFlags& flags) {
    int exit_code = kExitOk;
    const auto circuit = load_netlist(path, exit_code);
    if (!circuit) {
        return exit_code;
    }

    const auto tran = circuit->tran();
    double dt = 0.0;
    double tstop = 0.0;
    if (flags.dt) {
        dt = *flags.dt;
        if (tran && tran->dt_request != dt) {
            std::cout << "note: --dt overrides .TRAN step\n";
        }
    } else if (tran) {
        dt = tran->dt_request;
    }
    if (flags.tstop) {
        tstop = *flags.tstop;
        if (tran && tran->t_stop != tstop) {
            std::cout << "note: --tstop overrides .TRAN stop time\n";
        }
    } else if (tran) {
        tstop = tran->t_stop;
    }
    if (dt <= 0.0 || tstop <= 0.0) {
        std::cerr << "error: " << path
                  << ": no .TRAN directive and no --dt/--tstop given\n";
        return kExitParse;
    }

    bool dominant = circuit->step_mode().value_or(ministep::StepMode::Fixed) ==
                    ministep::StepMode::Dominant;
    if (flags.step_mode) {
        const bool flag_dominant = *flags.step_mode == "dominant";
        if (circuit->step_mode() && flag_dominant != dominant) {
            std::cout << "note: --step-mode overrides .STEPMODE\n";
        }
        dominant = flag_dominant;
    }

    ministep::TransientConfig cfg;
    cfg.dt_request = dt;
    cfg.t_stop = tstop;
    cfg.step_policy = dominant
                          ? ministep::StepPolicy(ministep::DominantStep{dt})
                          : ministep::StepPolicy(ministep::FixedStep{dt});
    if (flags.newton == "full") {
        cfg.newton_mode = ministep::FullNewton{};
    }
    cfg.solver = make_solver_config(flags, exit_code);
    if (exit_code != kExitOk) {
        return exit_code;
    }

    try {
        const auto t0 = std::chrono::steady_clock::now();
        const ministep::StateVector x0 = ministep::dc_initial_state(*circuit);
        const ministep::Waveform wf = ministep::run_transient(*circuit, x0, cfg);
        const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - t0;

        std::ofstream out(flags.out);
        if (!out) {
            std::cerr << "error: cannot write '" << flags.out << "'\n";
            return kExitNumerical;
        }
        ministep::write_waveform_csv(wf, out);
        if (!flags.steplog.empty()) {
            std::ofstream slog(flags.steplog);
            if (!slog) {
                std::cerr << "error: cannot write '" << flags.steplog << "'\n";
                return kExitNumerical;
            }
            ministep::write_step_log_csv(wf, slog);
        }

        int fallbacks = 0;
        double min_margin = std::numeric_limits<double>::infinity();
        for (const auto& e : wf.step_log) {
            fallbacks += e.fallback ? 1 : 0;
            min_margin = std::min(min_margin, e.dominance_margin);
        }
        std::cout << "steps taken:          " << wf.step_log.size() << "\n"
                  << "fallbacks:            " << fallbacks << "\n"
                  << "min dominance margin: " << sci(min_margin) << "\n"
                  << "wall time:            " << si_seconds(wall.count()) << "\n"
                  << "solver:               " << flags.solver << "\n"
                  << "waveform:             " << flags.out << "\n";
        return kExitOk;
    } catch (const ministep::SimError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

int run_maxstep(double length, double mu0, double vdd) {
    const ministep::TechnologyParams tech{length, mu0, vdd};
    const double printed = ministep::max_step_technology(tech);
    const double derived = ministep::max_step_dominance_derived(tech);
    std::cout << "technology max step (L^2*Vdd/(2*mu0)):    " << sci(printed) << " s ("
              << si_seconds(printed) << ")\n";
    std::cout << "dominance-derived max step (2*L^2/(mu0*Vdd)): " << sci(derived)
              << " s (" << si_seconds(derived) << ")\n";
    return kExitOk;
}

std::optional<ministep::StateVector> load_state(const std::string& path,
                                                const ministep::Circuit& circuit,
                                                const ministep::Assembler& asmr) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot open state file '" << path << "'\n";
        return std::nullopt;
    }
    ministep::StateVector x = asmr.zero_state();
    std::string node;
    double volts = 0.0;
    int assigned = 0;
    const auto& names = asmr.unknown_names();
    while (in >> node >> volts) {
        bool found = false;
        for (size_t i = 0; i < names.size(); ++i) {
            if (names[i] == node) {
                x.values[i] = volts;
                found = true;
                ++assigned;
                break;
            }
        }
        if (!found) {
            const auto id = circuit.find_node(node);
            if (id.has_value() && asmr.pinned_voltage(*id).has_value()) {
                std::cerr << "error: node '" << node
                          << "' is pinned by a voltage source; remove it from the "
                             "state file\n";
            } else {
                std::cerr << "error: state file names unknown node '" << node << "'\n";
            }
            return std::nullopt;
        }
    }
    if (assigned == 0) {
        std::cerr << "error: state file '" << path << "' has no node/voltage pairs\n";
        return std::nullopt;
    }
    return x;
}

int run_check(const std::string& path, double dt, const std::string& state_path) {
    int exit_code = kExitOk;
    const auto circuit = load_netlist(path, exit_code);
    if (!circuit) {
        return exit_code;
    }
    try {
        const ministep::Assembler asmr(*circuit);
        ministep::StateVector x = asmr.zero_state();
        if (!state_path.empty()) {
            auto loaded = load_state(state_path, *circuit, asmr);
            if (!loaded) {
                return kExitParse;
            }
            x = std::move(*loaded);
        }
        const ministep::AssembledSystem sys = asmr.assemble(x);
        const ministep::SparseMatrix a =
            ministep::scaled_sum(1.0 / dt, sys.c_matrix, sys.g_matrix);
        const ministep::DominanceReport rep = ministep::check_dominance(a);
        const ministep::MaxStepBound bound =
            ministep::max_dominant_step(sys.c_matrix, sys.g_matrix);

        std::cout << "dominant:        " << (rep.is_dominant ? "yes" : "no") << "\n";
        std::cout << "margin:          " << sci(rep.margin) << "\n";
        std::cout << "worst row:       node "
                  << sys.node_names[static_cast<size_t>(rep.worst_row)] << "\n";
        switch (bound.kind) {
            case ministep::MaxStepBound::Kind::Finite:
                std::cout << "max dominant dt: " << sci(bound.dt_max) << " s ("
                          << si_seconds(bound.dt_max) << "), limited by node "
                          << sys.node_names[static_cast<size_t>(bound.limiting_row)]
                          << "\n";
                break;
            case ministep::MaxStepBound::Kind::Unbounded:
                std::cout << "max dominant dt: unbounded\n";
                break;
            case ministep::MaxStepBound::Kind::NeverDominant:
                std::cout << "max dominant dt: NeverDominant (node "
                          << sys.node_names[static_cast<size_t>(bound.limiting_row)]
                          << " has no capacitive slack)\n";
                break;
        }
        return rep.is_dominant ? kExitOk : kExitNotDominant;
    } catch (const ministep::SimError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SPICE-style transient engine with dominance-driven mini steps"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run a transient simulation");
    std::string sim_netlist;
    CommonFlags flags;
    sim->add_option("netlist", sim_netlist, "Netlist file")->required();
    sim->add_option("--solver", flags.solver, "lu|jacobi|gauss-seidel|block-jacobi")
        ->check(CLI::IsMember({"lu", "jacobi", "gauss-seidel", "block-jacobi"}));
    sim->add_option("--blocks", flags.blocks, "Block count for block-jacobi")
        ->check(CLI::PositiveNumber);
    std::string step_mode_flag;
    auto* sm = sim->add_option("--step-mode", step_mode_flag, "fixed|dominant")
                   ->check(CLI::IsMember({"fixed", "dominant"}));
    double dt_flag = 0.0, tstop_flag = 0.0;
    auto* dto = sim->add_option("--dt", dt_flag, "Requested time step, s")
                    ->check(CLI::PositiveNumber);
    auto* tso = sim->add_option("--tstop", tstop_flag, "Stop time, s")
                    ->check(CLI::PositiveNumber);
    sim->add_option("--newton", flags.newton, "single|full")
        ->check(CLI::IsMember({"single", "full"}));
    sim->add_option("--out", flags.out, "Waveform CSV path (default wave.csv)");
    sim->add_option("--steplog", flags.steplog, "Step-log CSV path");
    sim->add_option("--tol", flags.tol, "Iterative solver tolerance")
        ->check(CLI::PositiveNumber);
    sim->add_option("--max-iters", flags.max_iters, "Iterative solver iteration cap")
        ->check(CLI::PositiveNumber);

    // maxstep
    auto* ms = app.add_subcommand("maxstep", "Technology-level maximum-step estimate");
    double ms_l = 0.0, ms_mu0 = 0.0, ms_vdd = 0.0;
    ms->add_option("--L", ms_l, "Transistor length, m")
        ->required()
        ->check(CLI::PositiveNumber);
    ms->add_option("--mu0", ms_mu0, "Carrier mobility, m^2/(V s)")
        ->required()
        ->check(CLI::PositiveNumber);
    ms->add_option("--vdd", ms_vdd, "Supply voltage, V")
        ->required()
        ->check(CLI::PositiveNumber);

    // check
    auto* chk = app.add_subcommand("check", "Audit dominance of C/dt + G");
    std::string chk_netlist;
    double chk_dt = 0.0;
    std::string chk_state;
    chk->add_option("netlist", chk_netlist, "Netlist file")->required();
    chk->add_option("--dt", chk_dt, "Time step to audit, s")
        ->required()
        ->check(CLI::PositiveNumber);
    chk->add_option("--at-state", chk_state,
                    "State file (lines of `node volts`); default all-zero state");

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed()) {
        if (sm->count() > 0) {
            flags.step_mode = step_mode_flag;
        }
        if (dto->count() > 0) {
            flags.dt = dt_flag;
        }
        if (tso->count() > 0) {
            flags.tstop = tstop_flag;
        }
        return run_simulate(sim_netlist, flags);
    }
    if (ms->parsed()) {
        return run_maxstep(ms_l, ms_mu0, ms_vdd);
    }
    return run_check(chk_netlist, chk_dt, chk_state);
}
