#include "ministep/assembly.hpp"

#include <cmath>

#include "ministep/devices.hpp"
#include "ministep/errors.hpp"

namespace ministep {

namespace {

struct PatternCollector {
    std::vector<Triplet> g;
    std::vector<Triplet> c;

    void couple(std::vector<Triplet>& t, int ra, int rb) {
        if (ra >= 0) {
            t.push_back({ra, ra, 0.0});
        }
        if (rb >= 0) {
            t.push_back({rb, rb, 0.0});
        }
        if (ra >= 0 && rb >= 0) {
            t.push_back({ra, rb, 0.0});
            t.push_back({rb, ra, 0.0});
        }
    }

    void entry(std::vector<Triplet>& t, int row, int col) {
        if (row >= 0 && col >= 0) {
            t.push_back({row, col, 0.0});
        }
    }
};

}  // namespace

Assembler::Assembler(const Circuit& circuit, double gmin)
    : circuit_(circuit), gmin_(gmin) {
    const size_t node_count = circuit.node_names().size();
    pinned_.assign(node_count, std::nullopt);
    for (const Device& d : circuit.devices()) {
        if (const auto* v = std::get_if<VoltageSource>(&d)) {
            auto& slot = pinned_[static_cast<size_t>(v->n_plus)];
            if (slot.has_value()) {
                throw SimError("node " + circuit.node_name(v->n_plus) +
                               " is pinned by more than one voltage source");
            }
            slot = v->volts;
        }
    }

    node_to_row_.assign(node_count, -1);
    for (size_t i = 0; i < node_count; ++i) {
        if (!pinned_[i].has_value()) {
            node_to_row_[i] = static_cast<int>(rows_.size());
            rows_.push_back(static_cast<int>(i));
            names_.push_back(circuit.node_names()[i]);
        }
    }
    for (size_t r = 0; r < names_.size(); ++r) {
        node_index_[names_[r]] = static_cast<int>(r);
    }
    if (rows_.empty()) {
        throw SimError("circuit has no unknown nodes to solve for");
    }

    const int n = unknown_count();
    PatternCollector pat;
    for (int r = 0; r < n; ++r) {
        pat.g.push_back({r, r, 0.0});  // gmin / dominance diagnostics slot
    }
    for (const Device& d : circuit.devices()) {
        if (const auto* r = std::get_if<Resistor>(&d)) {
            pat.couple(pat.g, row_of(r->n1), row_of(r->n2));
        } else if (const auto* c = std::get_if<Capacitor>(&d)) {
            pat.couple(pat.c, row_of(c->n1), row_of(c->n2));
        } else if (const auto* m = std::get_if<Mos1>(&d)) {
            const int rd = row_of(m->drain);
            const int rg = row_of(m->gate);
            const int rs = row_of(m->source);
            pat.entry(pat.g, rd, rd);
            pat.entry(pat.g, rd, rg);
            pat.entry(pat.g, rd, rs);
            pat.entry(pat.g, rs, rd);
            pat.entry(pat.g, rs, rg);
            pat.entry(pat.g, rs, rs);
            pat.entry(pat.c, rg, rg);
        }
    }
    g_pattern_ = SparseMatrix::from_triplets(n, pat.g);
    c_pattern_ = pat.c.empty() ? SparseMatrix(n) : SparseMatrix::from_triplets(n, pat.c);
}

int Assembler::row_of(NodeId node) const {
    return node == kGround ? -1 : node_to_row_[static_cast<size_t>(node)];
}

std::optional<double> Assembler::pinned_voltage(NodeId node) const {
    if (node == kGround) {
        return 0.0;
    }
    return pinned_[static_cast<size_t>(node)];
}

double Assembler::node_voltage(NodeId node, const StateVector& x) const {
    if (node == kGround) {
        return 0.0;
    }
    if (const auto pin = pinned_[static_cast<size_t>(node)]) {
        return *pin;
    }
    return x.values[static_cast<size_t>(node_to_row_[static_cast<size_t>(node)])];
}

StateVector Assembler::zero_state() const {
    return StateVector{std::vector<double>(static_cast<size_t>(unknown_count()), 0.0), 0.0};
}

AssembledSystem Assembler::assemble(const StateVector& x) const {
    const int n = unknown_count();
    if (static_cast<int>(x.values.size()) != n) {
        throw DimensionMismatchError("state vector has " +
                                     std::to_string(x.values.size()) + " entries, circuit has " +
                                     std::to_string(n) + " unknowns");
    }
    AssembledSystem sys;
    sys.c_matrix = c_pattern_;
    sys.g_matrix = g_pattern_;
    sys.f_vector.assign(static_cast<size_t>(n), 0.0);
    sys.is_vector.assign(static_cast<size_t>(n), 0.0);
    sys.x_ref = x.values;
    sys.node_names = names_;
    sys.node_index = node_index_;

    auto add_g = [&](int row, int col, double v) {
        if (row >= 0 && col >= 0) {
            sys.g_matrix.value_at_slot(sys.g_matrix.slot(row, col)) += v;
        }
    };
    auto add_c = [&](int row, int col, double v) {
        if (row >= 0 && col >= 0) {
            sys.c_matrix.value_at_slot(sys.c_matrix.slot(row, col)) += v;
        }
    };
    auto add_f = [&](int row, double v) {
        if (row >= 0) {
            sys.f_vector[static_cast<size_t>(row)] += v;
        }
    };

    for (const Device& d : circuit_.devices()) {
        if (const auto* r = std::get_if<Resistor>(&d)) {
            const double g = 1.0 / r->ohms;
            const int ra = row_of(r->n1);
            const int rb = row_of(r->n2);
            const double current = g * (node_voltage(r->n1, x) - node_voltage(r->n2, x));
            add_g(ra, ra, g);
            add_g(rb, rb, g);
            add_g(ra, rb, -g);
            add_g(rb, ra, -g);
            add_f(ra, current);
            add_f(rb, -current);
        } else if (const auto* c = std::get_if<Capacitor>(&d)) {
            const int ra = row_of(c->n1);
            const int rb = row_of(c->n2);
            add_c(ra, ra, c->farads);
            add_c(rb, rb, c->farads);
            add_c(ra, rb, -c->farads);
            add_c(rb, ra, -c->farads);
        } else if (const auto* s = std::get_if<CurrentSource>(&d)) {
            const int rp = row_of(s->n_plus);
            const int rm = row_of(s->n_minus);
            if (rp >= 0) {
                sys.is_vector[static_cast<size_t>(rp)] -= s->amps;
            }
            if (rm >= 0) {
                sys.is_vector[static_cast<size_t>(rm)] += s->amps;
            }
        } else if (const auto* m = std::get_if<Mos1>(&d)) {
            const double vg = node_voltage(m->gate, x);
            const double vd = node_voltage(m->drain, x);
            const double vs = node_voltage(m->source, x);
            const MosOperatingPoint op = mos1_evaluate(m->params, vg - vs, vd - vs);
            const int rd = row_of(m->drain);
            const int rg = row_of(m->gate);
            const int rs = row_of(m->source);
            add_f(rd, op.ids);
            add_f(rs, -op.ids);
            add_g(rd, rd, op.gds);
            add_g(rd, rg, op.gm);
            add_g(rd, rs, -(op.gm + op.gds));
            add_g(rs, rd, -op.gds);
            add_g(rs, rg, -op.gm);
            add_g(rs, rs, op.gm + op.gds);
            add_c(rg, rg, gate_capacitance(m->params));
        }
        // VoltageSource rows were eliminated up front; pinned voltages enter
        // through node_voltage, which folds them into F.
    }

    if (gmin_ > 0.0) {
        for (int r = 0; r < n; ++r) {
            add_g(r, r, gmin_);
            add_f(r, gmin_ * x.values[static_cast<size_t>(r)]);
        }
    }
    return sys;
}

AssembledSystem assemble(const Circuit& circuit, const StateVector& x, double gmin) {
    return Assembler(circuit, gmin).assemble(x);
}

std::vector<double> kcl_residual(const AssembledSystem& sys, const StateVector& x_new,
                                 const StateVector& x_old, double dt) {
    const size_t n = static_cast<size_t>(sys.size());
    if (x_new.values.size() != n || x_old.values.size() != n) {
        throw DimensionMismatchError("kcl_residual state dimension mismatch");
    }
    if (!(dt > 0.0)) {
        throw SimError("kcl_residual requires dt > 0");
    }
    std::vector<double> dx(n);
    for (size_t i = 0; i < n; ++i) {
        dx[i] = (x_new.values[i] - x_old.values[i]) / dt;
    }
    std::vector<double> r = sys.c_matrix.apply(dx);
    for (size_t i = 0; i < n; ++i) {
        r[i] += sys.f_vector[i] - sys.is_vector[i];
    }
    return r;
}

}  // namespace ministep
