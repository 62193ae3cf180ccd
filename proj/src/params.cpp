#include "seqimp/params.hpp"

#include "seqimp/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace seqimp {

namespace {

void require_positive(double v, const char* key) {
    if (!(v > 0.0) || std::isnan(v)) throw ConfigError(key, "must be > 0");
}

}  // namespace

double CircuitParams::v_base_peak() const { return std::sqrt(2.0 / 3.0) * v_base; }

double CircuitParams::i_base_peak() const { return std::sqrt(2.0 / 3.0) * s_base / v_base; }

CircuitParams build_circuit(const PerUnitCircuit& cfg) {
    require_positive(cfg.s_base, "circuit.s_base");
    require_positive(cfg.v_base, "circuit.v_base");
    require_positive(cfg.f1, "circuit.f1");
    require_positive(cfg.scr, "circuit.scr");
    require_positive(cfg.xr_ratio, "circuit.xr_ratio");
    if (!(cfg.zf_pu.real() > 0.0)) throw ConfigError("circuit.zf", "filter resistance must be > 0");
    if (!(cfg.zf_pu.imag() > 0.0)) throw ConfigError("circuit.zf", "filter reactance must be > 0");

    CircuitParams c{};
    c.s_base = cfg.s_base;
    c.v_base = cfg.v_base;
    c.f1 = cfg.f1;
    c.omega1 = 2.0 * std::numbers::pi * cfg.f1;
    c.scr = cfg.scr;
    c.xr_ratio = cfg.xr_ratio;

    const double zb = c.z_base();
    c.rf = cfg.zf_pu.real() * zb;
    c.lf = cfg.zf_pu.imag() * zb / c.omega1;

    if (std::isinf(cfg.scr)) {
        c.rs = 0.0;
        c.ls = 0.0;
    } else {
        const double z_mag = zb / cfg.scr;
        c.rs = z_mag / std::sqrt(1.0 + cfg.xr_ratio * cfg.xr_ratio);
        c.ls = c.rs * cfg.xr_ratio / c.omega1;
    }
    return c;
}

PerUnitCircuit to_per_unit(const CircuitParams& c) {
    PerUnitCircuit p;
    p.s_base = c.s_base;
    p.v_base = c.v_base;
    p.f1 = c.f1;
    p.zf_pu = c.filter_impedance_at_f1() / c.z_base();
    const cplx zs = c.grid_impedance_at_f1() / c.z_base();
    p.scr = std::abs(zs) == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / std::abs(zs);
    p.xr_ratio = zs.real() == 0.0 ? c.xr_ratio : zs.imag() / zs.real();
    return p;
}

ControllerParams tune_controllers(double cc_bw, double pll_bw, const CircuitParams& circuit, double v0) {
    if (cc_bw < 0.0 || std::isnan(cc_bw)) throw ConfigError("control.cc_bw", "must be >= 0");
    if (pll_bw < 0.0 || std::isnan(pll_bw)) throw ConfigError("control.pll_bw", "must be >= 0");
    if (!(v0 > 0.0)) throw ConfigError("control.v0", "PCC voltage must be > 0");

    ControllerParams k;
    k.cc_bw = cc_bw;
    k.pll_bw = pll_bw;

    const double a_cc = 2.0 * std::numbers::pi * cc_bw;
    k.kp_cc = a_cc * circuit.lf;
    k.ki_cc = a_cc * circuit.rf;

    const double wn = 2.0 * std::numbers::pi * pll_bw;
    const double zeta = 1.0 / std::numbers::sqrt2;
    k.kp_pll = 2.0 * zeta * wn / v0;
    k.ki_pll = wn * wn / v0;
    return k;
}

cplx pll_closed_loop(const ControllerParams& ctl, double v0, cplx s) {
    if (ctl.pll_frozen()) return {0.0, 0.0};
    const double b1 = v0 * ctl.kp_pll;
    const double b0 = v0 * ctl.ki_pll;
    return (b1 * s + b0) / (s * s + b1 * s + b0);
}

OperatingPoint solve_operating_point(const CircuitParams& circuit, cplx i_ref_pu, double e_grid_pu) {
    if (!(e_grid_pu > 0.0)) throw ConfigError("circuit.e_grid", "grid EMF magnitude must be > 0");

    // Per-unit phasor equations in the PLL frame, with u = v0 real:
    //   e = u - z_s * i,  |e| = e_grid
    // Newton iteration on v0 for f(v0) = |v0 - z_s i|^2 - e_grid^2.
    const cplx zs = circuit.grid_impedance_at_f1() / circuit.z_base();
    const cplx drop = zs * i_ref_pu;

    double v0 = e_grid_pu + drop.real();
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
        const double re = v0 - drop.real();
        const double f = re * re + drop.imag() * drop.imag() - e_grid_pu * e_grid_pu;
        const double df = 2.0 * re;
        if (df == 0.0) break;
        const double step = f / df;
        v0 -= step;
        if (std::abs(step) < 1e-12 && std::abs(f) < 1e-12) {
            converged = true;
            break;
        }
    }
    const double residual = std::abs(std::abs(cplx(v0, 0.0) - drop) - e_grid_pu);
    if (!converged || !(v0 > 0.0) || residual > 1e-10 || !std::isfinite(v0)) {
        throw InfeasibleOperatingPoint("no steady state: grid too weak for the requested current");
    }

    const double vb = circuit.v_base_peak();
    const double ib = circuit.i_base_peak();

    OperatingPoint op{};
    op.i_c0 = i_ref_pu * ib;
    op.v0 = v0 * vb;
    op.v_c0 = op.v0 + circuit.filter_impedance_at_f1() * op.i_c0;
    op.theta0 = -std::arg(cplx(v0, 0.0) - drop);
    return op;
}

SolvedSystem solve_system(const SystemSetup& setup) {
    SolvedSystem sys;
    sys.circuit = build_circuit(setup.circuit);
    sys.op = solve_operating_point(sys.circuit, setup.i_ref_pu, setup.e_grid_pu);
    sys.pll_v0 = setup.pll_nominal_v0 ? sys.circuit.v_base_peak() : sys.op.v0;
    sys.controllers = tune_controllers(setup.cc_bw, setup.pll_bw, sys.circuit, sys.pll_v0);
    return sys;
}

}  // namespace seqimp
