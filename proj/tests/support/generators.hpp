#pragma once

// Seeded random inputs shared by property tests and the acceptance suite.

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ministep/assembly.hpp"
#include "ministep/netlist.hpp"
#include "ministep/sparse.hpp"
#include "ministep/stepcontrol.hpp"

namespace testgen {

using Rng = std::mt19937;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// Strictly row-dominant sparse matrix: a few off-diagonals per row, diagonal
/// scaled to exceed the row sum by a random margin.
inline ministep::SparseMatrix random_dominant_matrix(Rng& rng, int n) {
    std::vector<ministep::Triplet> t;
    std::vector<double> off_sum(static_cast<size_t>(n), 0.0);
    for (int r = 0; r < n; ++r) {
        const int per_row = std::min(n - 1, uniform_int(rng, 0, 3));
        for (int k = 0; k < per_row; ++k) {
            int c = uniform_int(rng, 0, n - 1);
            if (c == r) {
                continue;
            }
            const double v = uniform(rng, -1.0, 1.0);
            t.push_back({r, c, v});
            off_sum[static_cast<size_t>(r)] += std::abs(v);
        }
    }
    for (int r = 0; r < n; ++r) {
        const double margin = uniform(rng, 0.05, 1.0);
        double diag = (off_sum[static_cast<size_t>(r)] + 0.1) * (1.0 + margin);
        if (uniform(rng, 0.0, 1.0) < 0.1) {
            diag = -diag;  // dominance is about magnitudes
        }
        t.push_back({r, r, diag});
    }
    return ministep::SparseMatrix::from_triplets(n, t);
}

inline std::vector<double> random_vector(Rng& rng, int n, double lo = -1.0,
                                         double hi = 1.0) {
    std::vector<double> v(static_cast<size_t>(n));
    for (double& x : v) {
        x = uniform(rng, lo, hi);
    }
    return v;
}

/// Random linear circuit: a resistor spanning tree to ground plus extra
/// R/C/I devices. Every node keeps a conductive path to ground.
inline ministep::Circuit random_linear_circuit(Rng& rng, int max_nodes = 8) {
    ministep::CircuitBuilder b;
    const int n = uniform_int(rng, 1, max_nodes);
    std::vector<ministep::NodeId> nodes;
    int dev = 0;
    for (int i = 0; i < n; ++i) {
        const ministep::NodeId node = b.node("n" + std::to_string(i + 1));
        const ministep::NodeId anchor =
            i == 0 || uniform(rng, 0.0, 1.0) < 0.4
                ? ministep::kGround
                : nodes[static_cast<size_t>(uniform_int(rng, 0, i - 1))];
        b.resistor("R" + std::to_string(++dev), node, anchor,
                   uniform(rng, 10.0, 1e4));
        nodes.push_back(node);
    }
    const int extras = uniform_int(rng, 0, 2 * n);
    for (int i = 0; i < extras; ++i) {
        const ministep::NodeId a =
            nodes[static_cast<size_t>(uniform_int(rng, 0, n - 1))];
        ministep::NodeId c = ministep::kGround;
        if (uniform(rng, 0.0, 1.0) < 0.6) {
            c = nodes[static_cast<size_t>(uniform_int(rng, 0, n - 1))];
        }
        switch (uniform_int(rng, 0, 2)) {
            case 0:
                if (a != c) {
                    b.resistor("R" + std::to_string(++dev), a, c,
                               uniform(rng, 10.0, 1e4));
                }
                break;
            case 1:
                if (a != c) {
                    b.capacitor("C" + std::to_string(++dev), a, c,
                                uniform(rng, 1e-12, 1e-6));
                }
                break;
            default:
                b.current_source("I" + std::to_string(++dev), a, c,
                                 uniform(rng, -1e-3, 1e-3));
                break;
        }
    }
    return b.build();
}

/// Random circuit mixing linear devices with a few MOS transistors and a
/// supply; used for assembly property tests.
inline ministep::Circuit random_mixed_circuit(Rng& rng, int max_nodes = 6) {
    ministep::CircuitBuilder b;
    const int n = uniform_int(rng, 2, max_nodes);
    std::vector<ministep::NodeId> nodes;
    int dev = 0;
    for (int i = 0; i < n; ++i) {
        const ministep::NodeId node = b.node("n" + std::to_string(i + 1));
        const ministep::NodeId anchor =
            i == 0 || uniform(rng, 0.0, 1.0) < 0.5
                ? ministep::kGround
                : nodes[static_cast<size_t>(uniform_int(rng, 0, i - 1))];
        b.resistor("R" + std::to_string(++dev), node, anchor, uniform(rng, 100.0, 1e5));
        if (uniform(rng, 0.0, 1.0) < 0.7) {
            b.capacitor("C" + std::to_string(++dev), node, ministep::kGround,
                        uniform(rng, 1e-15, 1e-9));
        }
        nodes.push_back(node);
    }
    const ministep::NodeId vdd = b.node("vdd");
    b.voltage_source("VDD", vdd, ministep::kGround, uniform(rng, 1.0, 3.0));
    const int mos_count = uniform_int(rng, 0, 3);
    for (int i = 0; i < mos_count; ++i) {
        auto pick = [&] {
            const int k = uniform_int(rng, 0, n);  // n means vdd
            return k == n ? vdd : nodes[static_cast<size_t>(k)];
        };
        ministep::Mos1Params p;
        p.polarity = uniform(rng, 0.0, 1.0) < 0.5 ? ministep::Polarity::Nmos
                                                  : ministep::Polarity::Pmos;
        p.w = uniform(rng, 1e-7, 5e-6);
        p.l = uniform(rng, 5e-8, 1e-6);
        p.kp = uniform(rng, 1e-5, 5e-4);
        p.vth = uniform(rng, 0.2, 0.8);
        p.cox = uniform(rng, 1e-4, 1e-2);
        b.mos1("M" + std::to_string(++dev), pick(), pick(), pick(), p);
    }
    return b.build();
}

/// CMOS inverter chain: `in` and `vdd` are pinned; stage outputs are the
/// unknowns. Every output carries the next stage's gate load; the last
/// output gets an explicit load capacitor.
inline ministep::Circuit inverter_chain(int stages, double vdd_volts = 2.0,
                                        double vin_volts = 2.0, double kp = 2e-4,
                                        double vth = 0.5, double cox = 1e-3) {
    ministep::CircuitBuilder b;
    const ministep::NodeId vdd = b.node("vdd");
    const ministep::NodeId in = b.node("in");
    ministep::Mos1Params nmos{ministep::Polarity::Nmos, 1e-6, 1e-6, kp, vth, cox};
    ministep::Mos1Params pmos{ministep::Polarity::Pmos, 1e-6, 1e-6, kp, vth, cox};
    b.voltage_source("VDD", vdd, ministep::kGround, vdd_volts);
    b.voltage_source("VIN", in, ministep::kGround, vin_volts);
    ministep::NodeId gate = in;
    ministep::NodeId out = ministep::kGround;
    for (int i = 1; i <= stages; ++i) {
        out = b.node("s" + std::to_string(i));
        b.mos1("MN" + std::to_string(i), out, gate, ministep::kGround, nmos);
        b.mos1("MP" + std::to_string(i), out, gate, vdd, pmos);
        gate = out;
    }
    b.capacitor("CL", out, ministep::kGround, 2.0 * 1e-6 * 1e-6 * cox);
    return b.build();
}

/// The two cross-coupled inverters of the worst case: two unknowns, each
/// loaded by the other stage's two gates and driven by an NMOS/PMOS pair.
inline ministep::Circuit cross_coupled_inverters(double vdd_volts = 2.0,
                                                 double kp = 2e-4, double vth = 0.5,
                                                 double cox = 1e-3) {
    ministep::CircuitBuilder b;
    const ministep::NodeId n1 = b.node("n1");
    const ministep::NodeId n2 = b.node("n2");
    const ministep::NodeId vdd = b.node("vdd");
    ministep::Mos1Params nmos{ministep::Polarity::Nmos, 1e-6, 1e-6, kp, vth, cox};
    ministep::Mos1Params pmos{ministep::Polarity::Pmos, 1e-6, 1e-6, kp, vth, cox};
    b.voltage_source("VDD", vdd, ministep::kGround, vdd_volts);
    b.mos1("MN1", n1, n2, ministep::kGround, nmos);
    b.mos1("MP1", n1, n2, vdd, pmos);
    b.mos1("MN2", n2, n1, ministep::kGround, nmos);
    b.mos1("MP2", n2, n1, vdd, pmos);
    return b.build();
}

}  // namespace testgen
