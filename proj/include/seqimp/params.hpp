#pragma once

#include <complex>

namespace seqimp {

using cplx = std::complex<double>;

/// User-facing per-unit description of the plant. Bases are line-line RMS
/// voltage and three-phase apparent power; scr may be +inf (ideal grid).
struct PerUnitCircuit {
    double s_base = 2.0e6;
    double v_base = 690.0;
    double f1 = 50.0;
    cplx zf_pu{0.025, 0.1};
    double scr = 4.0;
    double xr_ratio = 5.0;
};

/// Physical plant in SI units. Phasors in this library are amplitude-invariant
/// dq quantities, so voltage and current bases are phase peaks.
struct CircuitParams {
    double s_base;
    double v_base;
    double f1;
    double omega1;
    double lf;
    double rf;
    double ls;
    double rs;
    double scr;
    double xr_ratio;

    double z_base() const { return v_base * v_base / s_base; }
    double v_base_peak() const;
    double i_base_peak() const;

    cplx filter_impedance_at_f1() const { return {rf, omega1 * lf}; }
    cplx grid_impedance_at_f1() const { return {rs, omega1 * ls}; }
};

struct ControllerParams {
    double cc_bw = 0.0;
    double pll_bw = 0.0;
    double kp_cc = 0.0;
    double ki_cc = 0.0;
    double kp_pll = 0.0;
    double ki_pll = 0.0;

    bool pll_frozen() const { return pll_bw == 0.0; }
};

/// Steady state in the PLL-aligned frame (PCC voltage has zero q component).
struct OperatingPoint {
    cplx i_c0;
    cplx v_c0;
    double v0;
    /// Angle of the converter frame relative to the grid EMF.
    double theta0;
};

CircuitParams build_circuit(const PerUnitCircuit& cfg);

/// Inverse of build_circuit.
PerUnitCircuit to_per_unit(const CircuitParams& c);

/// Internal-model current PI (first-order closed loop at cc_bw) and a
/// second-order PLL with natural frequency 2*pi*pll_bw and damping 1/sqrt(2).
ControllerParams tune_controllers(double cc_bw, double pll_bw, const CircuitParams& circuit, double v0);

/// PLL frequency response T_pll(s) = v0*H_pll/(s + v0*H_pll), written in
/// polynomial form so that s = 0 is finite.
cplx pll_closed_loop(const ControllerParams& ctl, double v0, cplx s);

/// i_ref in p.u. of the converter frame, e_grid in p.u. of phase peak voltage.
OperatingPoint solve_operating_point(const CircuitParams& circuit, cplx i_ref_pu, double e_grid_pu);

/// Everything needed to build one small-signal model or one simulation.
struct SystemSetup {
    PerUnitCircuit circuit;
    double cc_bw = 200.0;
    double pll_bw = 5.0;
    cplx i_ref_pu{0.5, 0.0};
    double e_grid_pu = 1.0;
    /// When true T_pll uses the nominal PCC voltage instead of the solved one.
    bool pll_nominal_v0 = false;
    /// Cross-coupling decoupling in the current loop (simulator only).
    bool decoupling = false;
};

/// Bundle of the three solved parameter sets for a setup.
struct SolvedSystem {
    CircuitParams circuit;
    ControllerParams controllers;
    OperatingPoint op;
    /// PCC voltage magnitude used inside T_pll and for PLL gain tuning.
    double pll_v0;
};

SolvedSystem solve_system(const SystemSetup& setup);

}  // namespace seqimp
