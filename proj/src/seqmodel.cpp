#include "seqimp/seqmodel.hpp"

#include "seqimp/errors.hpp"

#include <cmath>
#include <numbers>

namespace seqimp {

namespace {

constexpr cplx kJ{0.0, 1.0};

// A = (1/sqrt 2)[[1, j], [1, -j]]
SeqMatrix symmetrical_decomposition() {
    const double k = 1.0 / std::numbers::sqrt2;
    return {k, k * kJ, k, -k * kJ, Coord::ModifiedSequence};
}

}  // namespace

VscModel::VscModel(CircuitParams circuit, ControllerParams controllers, OperatingPoint op, double pll_v0)
    : circuit_(circuit), controllers_(controllers), op_(op), pll_v0_(pll_v0) {}

VscModel::VscModel(const SolvedSystem& sys) : VscModel(sys.circuit, sys.controllers, sys.op, sys.pll_v0) {}

VscModel VscModel::from_setup(const SystemSetup& setup) { return VscModel(solve_system(setup)); }

cplx VscModel::hc(cplx s) const { return controllers_.kp_cc + controllers_.ki_cc / s; }

// H_c(s) * x without forming inf * 0 at s = 0.
cplx VscModel::hc_times(cplx s, cplx x) const {
    if (x == cplx{}) return {};
    return controllers_.kp_cc * x + controllers_.ki_cc * x / s;
}

cplx VscModel::tpll(cplx s) const { return pll_closed_loop(controllers_, pll_v0_, s); }

cplx VscModel::zf_pp(cplx s) const { return circuit_.rf + s * circuit_.lf + kJ * circuit_.omega1 * circuit_.lf; }
cplx VscModel::zf_nn(cplx s) const { return circuit_.rf + s * circuit_.lf - kJ * circuit_.omega1 * circuit_.lf; }
cplx VscModel::zs_pp(cplx s) const { return circuit_.rs + s * circuit_.ls + kJ * circuit_.omega1 * circuit_.ls; }
cplx VscModel::zs_nn(cplx s) const { return circuit_.rs + s * circuit_.ls - kJ * circuit_.omega1 * circuit_.ls; }

cplx VscModel::gpll(cplx s) const {
    const cplx t = tpll(s);
    if (t == cplx{}) return {};
    return t / (2.0 * pll_v0_) * (hc_times(s, op_.i_c0) + op_.v_c0);
}

cplx VscModel::gpll_c(cplx s) const {
    const cplx t = tpll(s);
    if (t == cplx{}) return {};
    return t / (2.0 * pll_v0_) * (hc_times(s, std::conj(op_.i_c0)) + std::conj(op_.v_c0));
}

TfBlock VscModel::hc_block() const {
    return {[self = *this](cplx s) { return self.hc(s); }, true};
}

TfBlock VscModel::tpll_block() const {
    return {[self = *this](cplx s) { return self.tpll(s); }, true};
}

TfBlock VscModel::gpll_block() const {
    return {[self = *this](cplx s) { return self.gpll(s); }, false};
}

TfBlock VscModel::gpll_c_block() const {
    return {[self = *this](cplx s) { return self.gpll_c(s); }, false};
}

SeqMatrix VscModel::load_admittance_pn(cplx s) const {
    const cplx den_p = hc(s) + zf_pp(s);
    const cplx den_n = hc(s) + zf_nn(s);
    const cplx g = gpll(s);
    const cplx gc = gpll_c(s);
    return {(1.0 - g) / den_p, g / den_p, gc / den_n, (1.0 - gc) / den_n, Coord::ModifiedSequence};
}

SeqMatrix VscModel::load_impedance_pn(cplx s) const { return mat2_inverse(load_admittance_pn(s), s.imag()); }

SeqMatrix VscModel::grid_impedance_pn(cplx s) const {
    return SeqMatrix::diag(zs_pp(s), zs_nn(s), Coord::ModifiedSequence);
}

SeqMatrix VscModel::control_dq(cplx s) const {
    const cplx h = hc(s);
    return SeqMatrix::diag(h, h, Coord::Dq);
}

SeqMatrix VscModel::feedforward_dq() const {
    const double x = circuit_.omega1 * circuit_.lf;
    return {0.0, -x, x, 0.0, Coord::Dq};
}

SeqMatrix VscModel::pll_current_path_dq(cplx s) const {
    const cplx k = tpll(s) / pll_v0_;
    return {0.0, op_.i_c0.imag() * k, 0.0, -op_.i_c0.real() * k, Coord::Dq};
}

SeqMatrix VscModel::pll_voltage_path_dq(cplx s) const {
    const cplx k = tpll(s) / pll_v0_;
    return {0.0, -op_.v_c0.imag() * k, 0.0, op_.v_c0.real() * k, Coord::Dq};
}

SeqMatrix VscModel::filter_dq(cplx s) const {
    const cplx z = circuit_.rf + s * circuit_.lf;
    return SeqMatrix::diag(z, z, Coord::Dq) + feedforward_dq();
}

SeqMatrix VscModel::grid_dq(cplx s) const {
    const cplx z = circuit_.rs + s * circuit_.ls;
    const double x = circuit_.omega1 * circuit_.ls;
    return {z, -x, x, z, Coord::Dq};
}

SeqMatrix VscModel::dq_load_admittance(cplx s) const {
    const SeqMatrix id = SeqMatrix::identity(Coord::Dq);
    const SeqMatrix hc_mat = control_dq(s);
    // Controller input i^c = i + P_i u, controller output rotated back:
    // u_c = -H_c i^c + P_v u. Plant: u_c = u + Z_f,dq i.
    const SeqMatrix lhs = hc_mat + filter_dq(s);
    SeqMatrix hp = pll_current_path_dq(s);
    hp = {hc_times(s, hp.pp), hc_times(s, hp.pn), hc_times(s, hp.np), hc_times(s, hp.nn), Coord::Dq};
    const SeqMatrix rhs = id + hp - pll_voltage_path_dq(s);
    SeqMatrix y = mat2_inverse(lhs, s.imag()) * rhs;
    y.coord = Coord::Dq;
    return y;
}

SeqMatrix dq_to_modified_sequence(const SeqMatrix& m) {
    if (m.coord != Coord::Dq) {
        throw UsageError(std::string("dq_to_modified_sequence expects a dq matrix, got ") + to_string(m.coord));
    }
    const SeqMatrix a = symmetrical_decomposition();
    SeqMatrix r = a * m * hermitian(a);
    r.coord = Coord::ModifiedSequence;
    return r;
}

SeqMatrix modified_sequence_to_dq(const SeqMatrix& m) {
    if (m.coord != Coord::ModifiedSequence) {
        throw UsageError(std::string("modified_sequence_to_dq expects a sequence matrix, got ") + to_string(m.coord));
    }
    const SeqMatrix a = symmetrical_decomposition();
    SeqMatrix r = hermitian(a) * m * a;
    r.coord = Coord::Dq;
    return r;
}

SeqEvaluator to_phase_domain_notation(SeqEvaluator y, double omega1) {
    return [y = std::move(y), omega1](cplx s) {
        const cplx w1 = kJ * omega1;
        // Y_p, J_p, J_n, Y_n as functions of the phase-domain variable.
        auto y_p = [&](cplx x) { return y(x - w1).pp; };
        auto j_p = [&](cplx x) { return y(x - w1).np; };
        auto j_n = [&](cplx x) { return y(x + w1).pn; };
        auto y_n = [&](cplx x) { return y(x + w1).nn; };
        return SeqMatrix{y_p(s), j_n(s - 2.0 * w1), j_p(s), y_n(s - 2.0 * w1), Coord::PhaseDomain};
    };
}

SeqEvaluator from_phase_domain_notation(SeqEvaluator y_phase, double omega1) {
    return [y_phase = std::move(y_phase), omega1](cplx s) {
        SeqMatrix m = y_phase(s + kJ * omega1);
        m.coord = Coord::ModifiedSequence;
        return m;
    };
}

SeqMatrix to_complex_vector_form(const SeqEvaluator& z, cplx s, double omega1) {
    const cplx w1 = kJ * omega1;
    const SeqMatrix direct = z(s - w1);
    // f*(conj(s) + j w1) = conj(f(conj(conj(s) + j w1)))
    const SeqMatrix mirrored = z(std::conj(std::conj(s) + w1));
    return {direct.pp, std::conj(mirrored.np), direct.np, std::conj(mirrored.pp), Coord::ComplexVector};
}

}  // namespace seqimp
