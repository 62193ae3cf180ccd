#pragma once

#include "seqimp/params.hpp"

#include <functional>
#include <utility>

namespace seqimp {

/// A transfer block known only through its frequency response. Complex
/// transfer functions (those with complex coefficients) set
/// real_coefficients = false.
struct TfBlock {
    std::function<cplx(cplx)> eval;
    bool real_coefficients = true;

    cplx operator()(cplx s) const { return eval(s); }

    static TfBlock constant(cplx k);
};

/// g(s) = conj(f(conj(s))). Real-coefficient blocks are returned unchanged.
TfBlock coeff_conjugate(const TfBlock& f);

enum class Coord { ModifiedSequence, Dq, PhaseDomain, ComplexVector };

const char* to_string(Coord c);

/// 2x2 complex matrix at one frequency. For dq-tagged matrices the entries
/// are (dd, dq, qd, qq).
struct SeqMatrix {
    cplx pp{};
    cplx pn{};
    cplx np{};
    cplx nn{};
    Coord coord = Coord::ModifiedSequence;

    static SeqMatrix identity(Coord c = Coord::ModifiedSequence) { return {1.0, 0.0, 0.0, 1.0, c}; }
    static SeqMatrix diag(cplx a, cplx b, Coord c = Coord::ModifiedSequence) { return {a, 0.0, 0.0, b, c}; }

    cplx det() const { return pp * nn - pn * np; }
    cplx trace() const { return pp + nn; }
    bool finite() const;
};

SeqMatrix operator+(const SeqMatrix& a, const SeqMatrix& b);
SeqMatrix operator-(const SeqMatrix& a, const SeqMatrix& b);
SeqMatrix operator*(const SeqMatrix& a, const SeqMatrix& b);
SeqMatrix operator*(cplx k, const SeqMatrix& a);

/// Throws SingularMatrixError (tagged with omega = imag(s)) when |det| <= 1e-300.
SeqMatrix mat2_inverse(const SeqMatrix& m, double omega = 0.0);

/// Conjugate transpose.
SeqMatrix hermitian(const SeqMatrix& m);

/// Largest entry-wise relative difference, scaled by the larger matrix norm.
double max_rel_diff(const SeqMatrix& a, const SeqMatrix& b);

using EigenPair = std::pair<cplx, cplx>;

/// Both roots of det(m - lambda*I) = 0.
EigenPair mat2_eigenvalues(const SeqMatrix& m);

/// Roots ordered to follow `previous` with minimum total displacement; ties
/// keep the natural order.
EigenPair mat2_eigenvalues(const SeqMatrix& m, const EigenPair& previous);

/// Reorders `current` to match `previous`. Returns true if swapped.
bool pair_by_continuity(const EigenPair& previous, EigenPair& current);

}  // namespace seqimp
