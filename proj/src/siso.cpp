#include "seqimp/siso.hpp"

#include "seqimp/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace seqimp {

namespace {

// Relative size below which a scalar denominator counts as vanished.
constexpr double kSingularRel = 1e-13;

cplx checked_div(cplx num, cplx den, double scale, double omega, const char* what) {
    if (!(std::abs(den) > kSingularRel * scale) || std::abs(den) == 0.0) throw SingularMatrixError(what, omega);
    return num / den;
}

}  // namespace

const char* to_string(Sequence s) { return s == Sequence::Positive ? "p" : "n"; }

const char* to_string(ModelKind k) { return k == ModelKind::Accurate ? "accurate" : "reduced"; }

cplx loop_impedance_matrix_form(const VscModel& m, cplx s, Sequence seq) {
    const SeqMatrix zl = m.load_impedance_pn(s);
    const SeqMatrix total = zl + m.grid_impedance_pn(s);
    const SeqMatrix inv = mat2_inverse(total, s.imag());
    const cplx picked = seq == Sequence::Positive ? inv.pp : inv.nn;
    if (picked == cplx{}) throw SingularMatrixError("loop admittance vanished", s.imag());
    return 1.0 / picked;
}

cplx loop_impedance_accurate(const VscModel& m, cplx s, Sequence seq) {
    const SeqMatrix zl = m.load_impedance_pn(s);
    const SeqMatrix zs = m.grid_impedance_pn(s);
    const cplx coupling = zl.pn * zl.np;
    if (seq == Sequence::Positive) {
        const cplx den = zs.nn + zl.nn;
        const double scale = std::abs(zs.nn) + std::abs(zl.nn);
        return zs.pp + zl.pp - checked_div(coupling, den, scale, s.imag(), "negative-sequence augmentation");
    }
    const cplx den = zs.pp + zl.pp;
    const double scale = std::abs(zs.pp) + std::abs(zl.pp);
    return zs.nn + zl.nn - checked_div(coupling, den, scale, s.imag(), "positive-sequence augmentation");
}

cplx loop_impedance_reduced(const VscModel& m, cplx s, Sequence seq) {
    const SeqMatrix yl = m.load_admittance_pn(s);
    if (seq == Sequence::Positive) {
        if (yl.pp == cplx{}) throw SingularMatrixError("Y_L^pp vanished", s.imag());
        return m.zs_pp(s) + 1.0 / yl.pp;
    }
    if (yl.nn == cplx{}) throw SingularMatrixError("Y_L^nn vanished", s.imag());
    return m.zs_nn(s) + 1.0 / yl.nn;
}

cplx loop_impedance(const VscModel& m, cplx s, ModelKind kind, Sequence seq) {
    return kind == ModelKind::Accurate ? loop_impedance_accurate(m, s, seq) : loop_impedance_reduced(m, s, seq);
}

cplx equivalent_load_admittance(const VscModel& m, cplx s, Sequence seq) {
    const cplx zs = seq == Sequence::Positive ? m.zs_pp(s) : m.zs_nn(s);
    const cplx zl_eq = loop_impedance_accurate(m, s, seq) - zs;
    if (zl_eq == cplx{}) throw SingularMatrixError("equivalent load impedance vanished", s.imag());
    return 1.0 / zl_eq;
}

cplx SisoModel::load_admittance(cplx s) const {
    if (kind_ == ModelKind::Accurate) return equivalent_load_admittance(model_, s, seq_);
    const SeqMatrix yl = model_.load_admittance_pn(s);
    return seq_ == Sequence::Positive ? yl.pp : yl.nn;
}

namespace {

template <class Eval>
std::vector<ImpedanceSample> sweep(const std::vector<double>& f_dq_hz, Eval&& eval) {
    std::vector<ImpedanceSample> out;
    out.reserve(f_dq_hz.size());
    for (double f : f_dq_hz) {
        const cplx s{0.0, 2.0 * std::numbers::pi * f};
        ImpedanceSample smp{f, {}, false};
        try {
            smp.value = eval(s);
            if (!std::isfinite(smp.value.real()) || !std::isfinite(smp.value.imag())) smp.singular = true;
        } catch (const SingularMatrixError&) {
            smp.singular = true;
        }
        if (smp.singular) smp.value = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
        out.push_back(smp);
    }
    return out;
}

}  // namespace

std::vector<ImpedanceSample> sweep_loop_impedance(const SisoModel& siso, const std::vector<double>& f_dq_hz) {
    return sweep(f_dq_hz, [&](cplx s) { return siso.loop_impedance(s); });
}

std::vector<ImpedanceSample> sweep_loop_impedance_matrix_form(const VscModel& m, Sequence seq,
                                                               const std::vector<double>& f_dq_hz) {
    return sweep(f_dq_hz, [&](cplx s) { return loop_impedance_matrix_form(m, s, seq); });
}

}  // namespace seqimp
