#include "ministep/devices.hpp"

namespace ministep {

namespace {

// NMOS equations in normal mode (vds >= 0).
MosOperatingPoint nmos_forward(const Mos1Params& p, double vgs, double vds) {
    MosOperatingPoint op;
    const double beta = p.kp * (p.w / p.l);
    const double vov = vgs - p.vth;  // overdrive
    if (vov <= 0.0) {
        op.region = MosRegion::Cutoff;
        return op;
    }
    if (vds < vov) {
        op.region = MosRegion::Linear;
        op.ids = beta * (vov * vds - 0.5 * vds * vds);
        op.gm = beta * vds;
        op.gds = beta * (vov - vds);
    } else {
        op.region = MosRegion::Saturation;
        op.ids = 0.5 * beta * vov * vov;
        op.gm = beta * vov;
        op.gds = 0.0;
    }
    return op;
}

// vds < 0: swap source and drain. With a = vgs - vds and b = -vds,
// ids(vgs, vds) = -I(a, b), so by the chain rule
//   d(ids)/d(vgs) = -gm',  d(ids)/d(vds) = gm' + gds'.
MosOperatingPoint nmos_any(const Mos1Params& p, double vgs, double vds) {
    if (vds >= 0.0) {
        return nmos_forward(p, vgs, vds);
    }
    const MosOperatingPoint rev = nmos_forward(p, vgs - vds, -vds);
    MosOperatingPoint op;
    op.region = rev.region;
    op.ids = -rev.ids;
    op.gm = -rev.gm;
    op.gds = rev.gm + rev.gds;
    return op;
}

}  // namespace

MosOperatingPoint mos1_evaluate(const Mos1Params& params, double vgs, double vds) {
    if (params.polarity == Polarity::Nmos) {
        return nmos_any(params, vgs, vds);
    }
    // PMOS: ids(vgs, vds) = -I_nmos(-vgs, -vds); derivatives pick up two
    // sign flips and come back positive.
    const MosOperatingPoint n = nmos_any(params, -vgs, -vds);
    MosOperatingPoint op;
    op.region = n.region;
    op.ids = -n.ids;
    op.gm = n.gm;
    op.gds = n.gds;
    return op;
}

double gate_capacitance(const Mos1Params& params) { return params.w * params.l * params.cox; }

}  // namespace ministep
