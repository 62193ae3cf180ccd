#pragma once

#include "seqimp/seqmodel.hpp"

#include <utility>
#include <vector>

namespace seqimp {

enum class Sequence { Positive, Negative };
enum class ModelKind { Accurate, Reduced };

const char* to_string(Sequence s);
const char* to_string(ModelKind k);

/// Loop impedance -u_inj/i_L from the closed-loop matrix:
/// 1 / (C (Z_L + Z_S)^-1 B), with B, C selecting the sequence.
cplx loop_impedance_matrix_form(const VscModel& m, cplx s, Sequence seq);

/// Closed form: Z_S + Z_L,diag - Z_L^pn Z_L^np / (Z_S + Z_L)_other. The
/// opposite-sequence network is folded into the scalar loop.
cplx loop_impedance_accurate(const VscModel& m, cplx s, Sequence seq);

/// Strong-grid form: Z_S + 1/Y_L,diag.
cplx loop_impedance_reduced(const VscModel& m, cplx s, Sequence seq);

cplx loop_impedance(const VscModel& m, cplx s, ModelKind kind, Sequence seq);

/// Y_L-eq such that the accurate loop impedance equals Z_S + 1/Y_L-eq.
cplx equivalent_load_admittance(const VscModel& m, cplx s, Sequence seq);

/// One model/sequence pair bound to a VscModel.
class SisoModel {
public:
    SisoModel(VscModel model, ModelKind kind, Sequence seq) : model_(std::move(model)), kind_(kind), seq_(seq) {}

    ModelKind kind() const { return kind_; }
    Sequence sequence() const { return seq_; }
    const VscModel& model() const { return model_; }

    cplx loop_impedance(cplx s) const { return seqimp::loop_impedance(model_, s, kind_, seq_); }

    /// Load admittance factor of the minor loop gain (equivalent or diagonal).
    cplx load_admittance(cplx s) const;

private:
    VscModel model_;
    ModelKind kind_;
    Sequence seq_;
};

struct ImpedanceSample {
    double f_dq_hz;
    cplx value;
    /// Evaluation hit a singular denominator; value is NaN.
    bool singular = false;
};

/// Loop impedance at s = j 2 pi f for each dq-frame frequency. Singular
/// points are flagged, not interpolated.
std::vector<ImpedanceSample> sweep_loop_impedance(const SisoModel& siso, const std::vector<double>& f_dq_hz);

/// Same for the matrix-form route.
std::vector<ImpedanceSample> sweep_loop_impedance_matrix_form(const VscModel& m, Sequence seq,
                                                               const std::vector<double>& f_dq_hz);

}  // namespace seqimp
