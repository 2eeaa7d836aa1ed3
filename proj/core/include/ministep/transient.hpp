#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ministep/assembly.hpp"
#include "ministep/netlist.hpp"
#include "ministep/solvers.hpp"
#include "ministep/stepcontrol.hpp"

namespace ministep {

/// One linear solve per step, expanding f around the previous time point.
struct SingleLinearization {};

/// Inner Newton refinement until the voltage update and the KCL residual
/// are both below tolerance.
struct FullNewton {
    double tol_v = 1e-9;  // volts
    int max_newton = 50;
};

using NewtonMode = std::variant<SingleLinearization, FullNewton>;

struct TransientConfig {
    double dt_request = 0.0;
    double t_stop = 0.0;
    StepPolicy step_policy = FixedStep{0.0};
    NewtonMode newton_mode = SingleLinearization{};
    SolverConfig solver;
    double gmin = 0.0;
};

struct Sample {
    double time = 0.0;
    std::vector<double> voltages;
};

struct StepLogEntry {
    double time = 0.0;
    double dt = 0.0;
    double dominance_margin = 0.0;
    int solver_iterations = 0;
    bool fallback = false;
};

/// Accepted-step trajectory. Samples start at the first step after t = 0;
/// the initial state is not recorded.
struct Waveform {
    std::vector<std::string> node_names;
    std::vector<Sample> samples;
    std::vector<StepLogEntry> step_log;
};

struct StepResult {
    StateVector x_new;
    SolveResult solve;
    bool fallback = false;
};

/// Solves (C/dt + G) dx = is_vec - F at the system's linearization point and
/// returns x_ref + dx. A non-converged iterative solve is retried once with
/// the direct solver (fallback flag set). x_new.time is left to the caller.
[[nodiscard]] StepResult linearized_step(const AssembledSystem& sys,
                                         std::span<const double> is_vec, double dt,
                                         const SolverConfig& solver);

/// Zero node voltages for every unknown (voltage-source nodes are already
/// eliminated at their pinned values). No operating-point solve is run;
/// callers wanting a different start supply their own state.
[[nodiscard]] StateVector dc_initial_state(const Circuit& circuit);

/// Backward-Euler time marching from x0 until t_stop, with per-step
/// dominance-aware step choice and waveform/step-log recording.
[[nodiscard]] Waveform run_transient(const Circuit& circuit, const StateVector& x0,
                                     const TransientConfig& cfg);

/// Builds the run configuration from the netlist's .TRAN/.STEPMODE
/// directives. Throws SimError when no .TRAN is present.
[[nodiscard]] TransientConfig transient_config_from(const Circuit& circuit);

/// header `time,<node>,...`; one row per sample, 17 significant digits, LF.
void write_waveform_csv(const Waveform& wf, std::ostream& os);

/// header `time,dt,dominance_margin,solver_iterations,fallback`.
void write_step_log_csv(const Waveform& wf, std::ostream& os);

}  // namespace ministep
