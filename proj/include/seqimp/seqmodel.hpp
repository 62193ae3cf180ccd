#pragma once

#include "seqimp/params.hpp"
#include "seqimp/tfcore.hpp"

#include <functional>

namespace seqimp {

/// Linearized grid-tied VSC: L filter, PI current control in the PLL frame,
/// SRF-PLL, Thevenin grid. All matrices use generation notation,
/// i.e. -i_L = Y_L u_L with i_L the converter output current.
class VscModel {
public:
    VscModel(CircuitParams circuit, ControllerParams controllers, OperatingPoint op, double pll_v0);

    explicit VscModel(const SolvedSystem& sys);
    static VscModel from_setup(const SystemSetup& setup);

    const CircuitParams& circuit() const { return circuit_; }
    const ControllerParams& controllers() const { return controllers_; }
    const OperatingPoint& op() const { return op_; }
    double pll_v0() const { return pll_v0_; }
    double omega1() const { return circuit_.omega1; }

    // Table 1 blocks.
    cplx hc(cplx s) const;
    cplx tpll(cplx s) const;
    cplx zf_pp(cplx s) const;
    cplx zf_nn(cplx s) const;
    cplx zs_pp(cplx s) const;
    cplx zs_nn(cplx s) const;

    /// T_pll/(2 V0) (H_c I_c0 + V_c0).
    cplx gpll(cplx s) const;
    /// Coefficient conjugate of gpll: phasors conjugated, real blocks untouched.
    cplx gpll_c(cplx s) const;

    TfBlock hc_block() const;
    TfBlock tpll_block() const;
    TfBlock gpll_block() const;
    TfBlock gpll_c_block() const;

    SeqMatrix load_admittance_pn(cplx s) const;
    SeqMatrix load_impedance_pn(cplx s) const;
    SeqMatrix grid_impedance_pn(cplx s) const;

    // dq-frame blocks (real 2x2 structures evaluated at s).
    SeqMatrix control_dq(cplx s) const;
    SeqMatrix feedforward_dq() const;
    SeqMatrix pll_current_path_dq(cplx s) const;
    SeqMatrix pll_voltage_path_dq(cplx s) const;
    SeqMatrix filter_dq(cplx s) const;
    SeqMatrix grid_dq(cplx s) const;

    /// dq load admittance assembled from the dq blocks with the loop of Eq. 10:
    ///   Y = (H_c I + Z_f,dq)^-1 (I + H_c P_i - P_v)
    /// where Z_f,dq is diag(Z_f) plus the rotating-frame coupling (feed-forward row).
    SeqMatrix dq_load_admittance(cplx s) const;

private:
    cplx hc_times(cplx s, cplx x) const;

    CircuitParams circuit_;
    ControllerParams controllers_;
    OperatingPoint op_;
    double pll_v0_;
};

/// A m A^H with A = (1/sqrt 2)[[1, j], [1, -j]]. Throws UsageError unless m is dq-tagged.
SeqMatrix dq_to_modified_sequence(const SeqMatrix& m);

/// Inverse of dq_to_modified_sequence.
SeqMatrix modified_sequence_to_dq(const SeqMatrix& m);

using SeqEvaluator = std::function<SeqMatrix(cplx)>;

/// Phase-domain notation: frequencies referred to the stationary frame.
/// Entry (1,1) is Y_p(s) = Y_pp(s - j w1), (2,1) is J_p(s) = Y_np(s - j w1),
/// (1,2) is J_n(s - j2w1) = Y_pn(s - j w1), (2,2) is Y_n(s - j2w1) = Y_nn(s - j w1).
SeqEvaluator to_phase_domain_notation(SeqEvaluator y, double omega1);

/// Inverse shift of to_phase_domain_notation.
SeqEvaluator from_phase_domain_notation(SeqEvaluator y_phase, double omega1);

/// Complex-vector form relating [v; e^{j2w1 t} v*] to [i; e^{j2w1 t} i*]:
/// [[Z_pp(s-jw1), Z_np*(conj(s)+jw1)], [Z_np(s-jw1), Z_pp*(conj(s)+jw1)]],
/// where f*(x) = conj(f(conj(x))).
SeqMatrix to_complex_vector_form(const SeqEvaluator& z, cplx s, double omega1);

}  // namespace seqimp
