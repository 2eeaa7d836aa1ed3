#pragma once

namespace ministep {

enum class Polarity { Nmos, Pmos };

/// Level-1 MOS parameters. Vth is the threshold magnitude for both
/// polarities; the PMOS sign mapping happens inside mos1_evaluate.
struct Mos1Params {
    Polarity polarity = Polarity::Nmos;
    double w = 0.0;    // channel width, m
    double l = 0.0;    // channel length, m
    double kp = 0.0;   // transconductance parameter, A/V^2
    double vth = 0.0;  // threshold voltage, V
    double cox = 0.0;  // gate oxide capacitance per unit area, F/m^2

    bool operator==(const Mos1Params&) const = default;
};

enum class MosRegion { Cutoff, Linear, Saturation };

/// Drain current and its exact partial derivatives at one bias point.
/// ids flows drain -> source; gm = d(ids)/d(vgs), gds = d(ids)/d(vds).
struct MosOperatingPoint {
    MosRegion region = MosRegion::Cutoff;
    double ids = 0.0;
    double gm = 0.0;
    double gds = 0.0;
};

/// Square-law level-1 evaluation with lambda = 0 and no body effect.
/// Total on finite inputs: vds < 0 is handled by the usual source/drain
/// swap, PMOS by evaluating the NMOS equations on negated voltages and
/// negating the current. In saturation gm = kp*(w/l)*(vgs - vth).
[[nodiscard]] MosOperatingPoint mos1_evaluate(const Mos1Params& params, double vgs,
                                              double vds);

/// Lumped gate-to-ground capacitance, w * l * cox.
[[nodiscard]] double gate_capacitance(const Mos1Params& params);

}  // namespace ministep
