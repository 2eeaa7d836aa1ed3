#pragma once

#include <variant>

#include "ministep/assembly.hpp"
#include "ministep/sparse.hpp"

namespace ministep {

/// Process-level inputs for the desk estimate of the largest usable step.
struct TechnologyParams {
    double l_min = 0.0;  // minimum transistor length, m
    double mu0 = 0.0;    // carrier mobility kp/cox, m^2/(V s)
    double vdd = 0.0;    // supply voltage, V (overdrive assumed 0.5*vdd)
};

/// Technology-level step estimate, L^2 * Vdd / (2 * mu0).
[[nodiscard]] double max_step_technology(const TechnologyParams& tech);

/// Bound consistent with the per-row dominance inequality Cg/gm under the
/// same overdrive assumption: 2 * L^2 / (mu0 * Vdd).
[[nodiscard]] double max_step_dominance_derived(const TechnologyParams& tech);

struct DominanceReport {
    bool is_dominant = false;
    int worst_row = 0;
    /// min over rows of (|diag| - sum|offdiag|) / |diag|; -inf when a
    /// diagonal is zero. is_dominant <=> margin > 0.
    double margin = 0.0;
};

/// Strict row diagonal dominance test.
[[nodiscard]] DominanceReport check_dominance(const SparseMatrix& a);

/// Supremum of dt keeping C/dt + G strictly row diagonally dominant, using
/// the conservative per-row split |g_ij + c_ij/dt| <= |g_ij| + |c_ij|/dt
/// (exact when C has no off-diagonals). Per row, with
///   cd = c_ii - sum|c_ij|, gd = sum|g_ij| - g_ii:
/// gd > 0 constrains dt < cd/gd (cd <= 0 means no dt works); gd == 0 needs
/// cd > 0; gd < 0 imposes nothing.
struct MaxStepBound {
    enum class Kind { Finite, Unbounded, NeverDominant };
    Kind kind = Kind::Unbounded;
    double dt_max = 0.0;   // valid when Finite
    int limiting_row = -1; // constraining (Finite) or offending (NeverDominant) row
};

[[nodiscard]] MaxStepBound max_dominant_step(const SparseMatrix& c,
                                             const SparseMatrix& g);

struct FixedStep {
    double dt = 0.0;
};

struct DominantStep {
    double dt_request = 0.0;
    double safety = 0.9;
    double dt_floor = 1e-18;
};

using StepPolicy = std::variant<FixedStep, DominantStep>;

struct StepChoice {
    double dt = 0.0;
    /// Set when no dt can make the matrix dominant; the engine then solves
    /// this step directly instead of iteratively.
    bool dominance_unattainable = false;
};

/// Fixed mode passes dt through. Dominant mode returns
/// min(dt_request, safety * max_dominant_step), clamped below at dt_floor.
[[nodiscard]] StepChoice choose_step(const StepPolicy& policy,
                                     const AssembledSystem& sys);

}  // namespace ministep
