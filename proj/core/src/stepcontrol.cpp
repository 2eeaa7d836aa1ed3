#include "ministep/stepcontrol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ministep/errors.hpp"

namespace ministep {

double max_step_technology(const TechnologyParams& tech) {
    return tech.l_min * tech.l_min * tech.vdd / (2.0 * tech.mu0);
}

double max_step_dominance_derived(const TechnologyParams& tech) {
    return 2.0 * tech.l_min * tech.l_min / (tech.mu0 * tech.vdd);
}

DominanceReport check_dominance(const SparseMatrix& a) {
    DominanceReport rep;
    rep.margin = std::numeric_limits<double>::infinity();
    rep.worst_row = 0;
    for (int r = 0; r < a.size(); ++r) {
        const auto cols = a.row_cols(r);
        const auto vals = a.row_vals(r);
        double diag = 0.0;
        double off = 0.0;
        for (size_t k = 0; k < cols.size(); ++k) {
            if (cols[k] == r) {
                diag = vals[k];
            } else {
                off += std::abs(vals[k]);
            }
        }
        const double margin = diag == 0.0
                                  ? -std::numeric_limits<double>::infinity()
                                  : (std::abs(diag) - off) / std::abs(diag);
        if (margin < rep.margin) {
            rep.margin = margin;
            rep.worst_row = r;
        }
    }
    rep.is_dominant = rep.margin > 0.0;
    return rep;
}

MaxStepBound max_dominant_step(const SparseMatrix& c, const SparseMatrix& g) {
    if (c.size() != g.size()) {
        throw DimensionMismatchError("max_dominant_step dimension mismatch");
    }
    MaxStepBound bound;
    bound.kind = MaxStepBound::Kind::Unbounded;
    for (int r = 0; r < c.size(); ++r) {
        double c_diag = 0.0;
        double c_off = 0.0;
        {
            const auto cols = c.row_cols(r);
            const auto vals = c.row_vals(r);
            for (size_t k = 0; k < cols.size(); ++k) {
                if (cols[k] == r) {
                    c_diag = vals[k];
                } else {
                    c_off += std::abs(vals[k]);
                }
            }
        }
        double g_diag = 0.0;
        double g_off = 0.0;
        {
            const auto cols = g.row_cols(r);
            const auto vals = g.row_vals(r);
            for (size_t k = 0; k < cols.size(); ++k) {
                if (cols[k] == r) {
                    g_diag = vals[k];
                } else {
                    g_off += std::abs(vals[k]);
                }
            }
        }
        const double cd = c_diag - c_off;  // capacitive slack
        const double gd = g_off - g_diag;  // conductive deficit
        if (gd < 0.0) {
            continue;  // row is dominant on G alone for every dt
        }
        if (cd <= 0.0) {
            // Tightening needed (gd >= 0) but C cannot supply slack.
            return MaxStepBound{MaxStepBound::Kind::NeverDominant, 0.0, r};
        }
        if (gd == 0.0) {
            continue;  // cd > 0 keeps the row dominant for every dt
        }
        const double row_bound = cd / gd;
        if (bound.kind == MaxStepBound::Kind::Unbounded || row_bound < bound.dt_max) {
            bound.kind = MaxStepBound::Kind::Finite;
            bound.dt_max = row_bound;
            bound.limiting_row = r;
        }
    }
    return bound;
}

StepChoice choose_step(const StepPolicy& policy, const AssembledSystem& sys) {
    if (const auto* fixed = std::get_if<FixedStep>(&policy)) {
        return StepChoice{fixed->dt, false};
    }
    const auto& dom = std::get<DominantStep>(policy);
    const MaxStepBound bound = max_dominant_step(sys.c_matrix, sys.g_matrix);
    switch (bound.kind) {
        case MaxStepBound::Kind::Unbounded:
            return StepChoice{dom.dt_request, false};
        case MaxStepBound::Kind::NeverDominant:
            return StepChoice{dom.dt_floor, true};
        case MaxStepBound::Kind::Finite: {
            double dt = std::min(dom.dt_request, dom.safety * bound.dt_max);
            dt = std::max(dt, dom.dt_floor);
            return StepChoice{dt, false};
        }
    }
    return StepChoice{dom.dt_floor, true};  // unreachable
}

}  // namespace ministep
