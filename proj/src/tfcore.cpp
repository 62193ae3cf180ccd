#include "seqimp/tfcore.hpp"

#include "seqimp/errors.hpp"

#include <algorithm>
#include <cmath>

namespace seqimp {

TfBlock TfBlock::constant(cplx k) {
    return {[k](cplx) { return k; }, k.imag() == 0.0};
}

TfBlock coeff_conjugate(const TfBlock& f) {
    if (f.real_coefficients) return f;
    return {[g = f.eval](cplx s) { return std::conj(g(std::conj(s))); }, false};
}

const char* to_string(Coord c) {
    switch (c) {
        case Coord::ModifiedSequence: return "modified-sequence";
        case Coord::Dq: return "dq";
        case Coord::PhaseDomain: return "phase-domain";
        case Coord::ComplexVector: return "complex-vector";
    }
    return "?";
}

bool SeqMatrix::finite() const {
    auto ok = [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
    return ok(pp) && ok(pn) && ok(np) && ok(nn);
}

SeqMatrix operator+(const SeqMatrix& a, const SeqMatrix& b) {
    return {a.pp + b.pp, a.pn + b.pn, a.np + b.np, a.nn + b.nn, a.coord};
}

SeqMatrix operator-(const SeqMatrix& a, const SeqMatrix& b) {
    return {a.pp - b.pp, a.pn - b.pn, a.np - b.np, a.nn - b.nn, a.coord};
}

SeqMatrix operator*(const SeqMatrix& a, const SeqMatrix& b) {
    return {a.pp * b.pp + a.pn * b.np, a.pp * b.pn + a.pn * b.nn,
            a.np * b.pp + a.nn * b.np, a.np * b.pn + a.nn * b.nn, a.coord};
}

SeqMatrix operator*(cplx k, const SeqMatrix& a) {
    return {k * a.pp, k * a.pn, k * a.np, k * a.nn, a.coord};
}

SeqMatrix mat2_inverse(const SeqMatrix& m, double omega) {
    const cplx d = m.det();
    if (!(std::abs(d) > 1e-300)) throw SingularMatrixError("singular 2x2 matrix", omega);
    return {m.nn / d, -m.pn / d, -m.np / d, m.pp / d, m.coord};
}

SeqMatrix hermitian(const SeqMatrix& m) {
    return {std::conj(m.pp), std::conj(m.np), std::conj(m.pn), std::conj(m.nn), m.coord};
}

double max_rel_diff(const SeqMatrix& a, const SeqMatrix& b) {
    const double scale = std::max({std::abs(a.pp), std::abs(a.pn), std::abs(a.np), std::abs(a.nn),
                                   std::abs(b.pp), std::abs(b.pn), std::abs(b.np), std::abs(b.nn)});
    if (scale == 0.0) return 0.0;
    const double d = std::max({std::abs(a.pp - b.pp), std::abs(a.pn - b.pn), std::abs(a.np - b.np),
                               std::abs(a.nn - b.nn)});
    return d / scale;
}

EigenPair mat2_eigenvalues(const SeqMatrix& m) {
    // lambda = mean +/- sqrt(half_diff^2 + pn*np); avoids the cancellation of
    // the trace/determinant form when the roots are close.
    const cplx mean = 0.5 * (m.pp + m.nn);
    const cplx half_diff = 0.5 * (m.pp - m.nn);
    const cplx root = std::sqrt(half_diff * half_diff + m.pn * m.np);
    return {mean + root, mean - root};
}

bool pair_by_continuity(const EigenPair& previous, EigenPair& current) {
    const double keep = std::abs(current.first - previous.first) + std::abs(current.second - previous.second);
    const double swap = std::abs(current.second - previous.first) + std::abs(current.first - previous.second);
    if (swap < keep) {
        std::swap(current.first, current.second);
        return true;
    }
    return false;
}

EigenPair mat2_eigenvalues(const SeqMatrix& m, const EigenPair& previous) {
    EigenPair ev = mat2_eigenvalues(m);
    pair_by_continuity(previous, ev);
    return ev;
}

}  // namespace seqimp
