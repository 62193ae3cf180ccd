#include "seqimp/stability.hpp"

#include "seqimp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace seqimp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr cplx kCritical{-1.0, 0.0};

void validate(const FrequencyGrid& g) {
    if (!(g.f_min_hz > 0.0) || !(g.f_max_hz > g.f_min_hz) || g.points < 2) {
        throw UsageError("frequency grid must satisfy 0 < f_min < f_max with at least 2 points");
    }
}

// Signed base grid: -w_max .. -w_min, +w_min .. +w_max.
std::vector<double> signed_omegas(const FrequencyGrid& g) {
    const auto f = log_space(g.f_min_hz, g.f_max_hz, g.points);
    std::vector<double> w;
    w.reserve(2 * f.size());
    for (auto it = f.rbegin(); it != f.rend(); ++it) w.push_back(-kTwoPi * *it);
    for (double fi : f) w.push_back(kTwoPi * fi);
    return w;
}

double mid_omega(double a, double b) {
    // Both ends share a sign inside a branch.
    const double m = std::sqrt(std::abs(a) * std::abs(b));
    return a < 0.0 ? -m : m;
}

bool same_branch(double a, double b) { return (a < 0.0) == (b < 0.0); }

bool segment_needs_refinement(cplx a, cplx b, const FrequencyGrid& g) {
    const double step = std::abs(b - a);
    const bool near = std::min(std::abs(a - kCritical), std::abs(b - kCritical)) < g.refine_radius;
    if (near && step > g.refine_step) return true;
    const double turn = std::abs(std::arg((b - kCritical) / (a - kCritical)));
    return turn > std::numbers::pi / 4.0;
}

void refine_scalar(const SignedGain& gain, const LocusSample& a, const LocusSample& b, int depth,
                   const FrequencyGrid& g, std::vector<LocusSample>& out) {
    if (depth >= g.max_depth || !segment_needs_refinement(a.value, b.value, g)) return;
    const double wm = mid_omega(a.omega, b.omega);
    if (wm == a.omega || wm == b.omega) return;
    const LocusSample m{wm, gain(wm)};
    refine_scalar(gain, a, m, depth + 1, g, out);
    out.push_back(m);
    refine_scalar(gain, m, b, depth + 1, g, out);
}

double winding(const std::vector<cplx>& values, cplx point) {
    double total = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const cplx a = values[k] - point;
        const cplx b = values[(k + 1) % values.size()] - point;
        total += std::arg(b / a);
    }
    return total / kTwoPi;
}

// Eigenvalue tracing ---------------------------------------------------------

struct EigenSample {
    double omega;
    EigenPair ev;
};

using SignedMatrix = std::function<SeqMatrix(double)>;

bool pair_needs_refinement(const EigenPair& a, EigenPair b, const FrequencyGrid& g, bool& ambiguous) {
    pair_by_continuity(a, b);
    ambiguous = false;
    if (segment_needs_refinement(a.first, b.first, g) || segment_needs_refinement(a.second, b.second, g)) return true;
    const double keep = std::abs(b.first - a.first) + std::abs(b.second - a.second);
    const double swap = std::abs(b.second - a.first) + std::abs(b.first - a.second);
    const double dist = std::min({std::abs(a.first - kCritical), std::abs(a.second - kCritical),
                                  std::abs(b.first - kCritical), std::abs(b.second - kCritical)});
    if (dist < 0.5 && keep > 1e-12 && swap < 1.5 * keep) {
        ambiguous = true;
        return true;
    }
    return false;
}

void refine_pair(const SignedMatrix& lmat, const EigenSample& a, const EigenSample& b, int depth,
                 const FrequencyGrid& g, std::vector<EigenSample>& out, int& unresolved) {
    bool ambiguous = false;
    if (!pair_needs_refinement(a.ev, b.ev, g, ambiguous)) return;
    const double wm = mid_omega(a.omega, b.omega);
    if (depth >= g.max_depth || wm == a.omega || wm == b.omega) {
        if (ambiguous) ++unresolved;
        return;
    }
    const EigenSample m{wm, mat2_eigenvalues(lmat(wm))};
    refine_pair(lmat, a, m, depth + 1, g, out, unresolved);
    out.push_back(m);
    refine_pair(lmat, m, b, depth + 1, g, out, unresolved);
}

struct EigenTrace {
    Locus l1;
    Locus l2;
    int unresolved = 0;
};

EigenTrace trace_eigen_loci(const SignedMatrix& lmat, const FrequencyGrid& g) {
    validate(g);
    const auto w = signed_omegas(g);
    std::vector<EigenSample> base;
    base.reserve(w.size());
    for (double wi : w) base.push_back({wi, mat2_eigenvalues(lmat(wi))});

    EigenTrace tr;
    std::vector<EigenSample> all;
    all.reserve(base.size() * 2);
    all.push_back(base.front());
    for (std::size_t k = 1; k < base.size(); ++k) {
        if (same_branch(base[k - 1].omega, base[k].omega)) {
            refine_pair(lmat, base[k - 1], base[k], 0, g, all, tr.unresolved);
        }
        all.push_back(base[k]);
    }
    for (std::size_t k = 1; k < all.size(); ++k) pair_by_continuity(all[k - 1].ev, all[k].ev);

    tr.l1.samples.reserve(all.size());
    tr.l2.samples.reserve(all.size());
    for (const auto& s : all) {
        tr.l1.samples.push_back({s.omega, s.ev.first});
        tr.l2.samples.push_back({s.omega, s.ev.second});
    }
    return tr;
}

SeqMatrix return_ratio(const VscModel& m, double omega) {
    const cplx s{0.0, omega};
    return m.grid_impedance_pn(s) * m.load_admittance_pn(s);
}

}  // namespace

std::vector<double> log_space(double f_min, double f_max, int n) {
    std::vector<double> f(static_cast<std::size_t>(n));
    if (n == 1) {
        f[0] = f_min;
        return f;
    }
    const double a = std::log10(f_min);
    const double b = std::log10(f_max);
    for (int k = 0; k < n; ++k) f[static_cast<std::size_t>(k)] = std::pow(10.0, a + (b - a) * k / (n - 1));
    return f;
}

Locus trace_locus(const SignedGain& gain, const FrequencyGrid& grid) {
    validate(grid);
    const auto w = signed_omegas(grid);
    std::vector<LocusSample> base;
    base.reserve(w.size());
    for (double wi : w) base.push_back({wi, gain(wi)});

    Locus locus;
    locus.samples.reserve(base.size() * 2);
    locus.samples.push_back(base.front());
    for (std::size_t k = 1; k < base.size(); ++k) {
        if (same_branch(base[k - 1].omega, base[k].omega)) {
            refine_scalar(gain, base[k - 1], base[k], 0, grid, locus.samples);
        }
        locus.samples.push_back(base[k]);
    }
    return locus;
}

int count_encirclements(const Locus& locus, cplx point) {
    if (locus.samples.empty()) return 0;
    std::vector<cplx> v;
    v.reserve(locus.samples.size());
    for (const auto& s : locus.samples) {
        if (std::abs(s.value - point) < 1e-9) {
            throw MarginalCaseError("locus passes through the critical point at omega=" + std::to_string(s.omega));
        }
        v.push_back(s.value);
    }
    return static_cast<int>(std::lround(winding(v, point)));
}

cplx minor_loop_gain(const VscModel& m, cplx s, ModelKind kind, Sequence seq) {
    const cplx zs = seq == Sequence::Positive ? m.zs_pp(s) : m.zs_nn(s);
    if (zs == cplx{}) return {};
    return zs * SisoModel(m, kind, seq).load_admittance(s);
}

Locus nyquist_locus(const VscModel& m, ModelKind kind, Sequence seq, const FrequencyGrid& grid) {
    const Sequence other = seq == Sequence::Positive ? Sequence::Negative : Sequence::Positive;
    const SignedGain gain = [&](double omega) {
        if (omega >= 0.0) return minor_loop_gain(m, {0.0, omega}, kind, seq);
        return std::conj(minor_loop_gain(m, {0.0, -omega}, kind, other));
    };
    Locus locus = trace_locus(gain, grid);
    locus.label = seq == Sequence::Positive ? "gamma_p" : "gamma_n";
    locus.model = kind == ModelKind::Accurate ? "A" : "B";
    locus.sequence = to_string(seq);
    return locus;
}

const char* to_string(Criterion c) {
    switch (c) {
        case Criterion::NC: return "NC";
        case Criterion::GNC: return "GNC";
        case Criterion::Passivity: return "passivity";
    }
    return "?";
}

StabilityVerdict nc_verdict(const VscModel& m, ModelKind kind, const FrequencyGrid& grid) {
    StabilityVerdict v;
    v.criterion = Criterion::NC;
    v.model = kind == ModelKind::Accurate ? "A" : "B";
    for (Sequence seq : {Sequence::Positive, Sequence::Negative}) {
        Locus l = nyquist_locus(m, kind, seq, grid);
        v.encirclements.push_back(count_encirclements(l));
        v.loci.push_back(std::move(l));
    }
    // Both contours describe the same SISO system (one is the mirror of the
    // other), so the positive-sequence count decides.
    v.stable = v.encirclements.front() == 0;
    return v;
}

int det_encirclements(const VscModel& m, const FrequencyGrid& grid) {
    const SignedGain shifted_det = [&](double omega) {
        const SeqMatrix l = return_ratio(m, omega);
        return (SeqMatrix::identity() + l).det() - 1.0;
    };
    return count_encirclements(trace_locus(shifted_det, grid));
}

StabilityVerdict gnc_verdict(const VscModel& m, const FrequencyGrid& grid) {
    const SignedMatrix lmat = [&](double omega) { return return_ratio(m, omega); };
    const int reference = det_encirclements(m, grid);

    FrequencyGrid g = grid;
    for (int attempt = 0; attempt < 2; ++attempt, g = g.doubled()) {
        EigenTrace tr = trace_eigen_loci(lmat, g);
        const int n1 = count_encirclements(tr.l1);
        const int n2 = count_encirclements(tr.l2);
        if (tr.unresolved == 0 && n1 + n2 == reference) {
            StabilityVerdict v;
            v.criterion = Criterion::GNC;
            v.model = "C";
            v.encirclements = {n1, n2};
            v.stable = n1 + n2 == 0;
            tr.l1.label = "l1";
            tr.l2.label = "l2";
            tr.l1.model = tr.l2.model = "C";
            v.loci.push_back(std::move(tr.l1));
            v.loci.push_back(std::move(tr.l2));
            return v;
        }
    }
    throw TrackingError("eigenvalue loci could not be separated at double resolution");
}

std::vector<Resonance> passivity_crossings(const VscModel& m, ModelKind kind, Sequence seq, double f_lo_hz,
                                           double f_hi_hz, int scan_points) {
    if (!(f_hi_hz > f_lo_hz) || scan_points < 2) throw UsageError("passivity band must be non-empty");
    f_lo_hz = std::max(f_lo_hz, 1e-3);
    const SisoModel siso(m, kind, seq);
    auto z_at = [&](double f) { return siso.loop_impedance({0.0, kTwoPi * f}); };
    auto finite = [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };

    std::vector<double> f(static_cast<std::size_t>(scan_points));
    std::vector<cplx> z(f.size());
    std::vector<bool> ok(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        f[k] = f_lo_hz + (f_hi_hz - f_lo_hz) * static_cast<double>(k) / (scan_points - 1);
        try {
            z[k] = z_at(f[k]);
            ok[k] = finite(z[k]);
        } catch (const SingularMatrixError&) {
            ok[k] = false;
        }
    }

    std::vector<Resonance> out;
    for (std::size_t k = 1; k < f.size(); ++k) {
        if (!ok[k - 1] || !ok[k]) continue;
        const double im_a = z[k - 1].imag();
        const double im_b = z[k].imag();
        if (im_a == 0.0 || (im_a > 0.0) == (im_b > 0.0)) continue;
        double lo = f[k - 1], hi = f[k];
        double im_lo = im_a;
        while (hi - lo > 1e-3) {
            const double mid = 0.5 * (lo + hi);
            const double im_mid = z_at(mid).imag();
            if ((im_mid > 0.0) == (im_lo > 0.0)) {
                lo = mid;
                im_lo = im_mid;
            } else {
                hi = mid;
            }
        }
        const double root = 0.5 * (lo + hi);
        const cplx zr = z_at(root);
        // A pole flips the sign through infinity; a zero shrinks |Im|.
        if (!(std::abs(zr.imag()) < std::min(std::abs(im_a), std::abs(im_b)))) continue;
        out.push_back({root, zr.real() > 0.0, zr.real()});
    }
    return out;
}

StabilityVerdict passivity_verdict(const VscModel& m, ModelKind kind, double f_lo_hz, double f_hi_hz) {
    StabilityVerdict v;
    v.criterion = Criterion::Passivity;
    v.model = kind == ModelKind::Accurate ? "A" : "B";
    for (Sequence seq : {Sequence::Positive, Sequence::Negative}) {
        for (const auto& r : passivity_crossings(m, kind, seq, f_lo_hz, f_hi_hz)) {
            v.resonances.push_back(r);
            if (!r.positive_re) v.stable = false;
        }
    }
    return v;
}

MarginalResult marginal_pll_search(const SystemSetup& setup, double bw_lo_hz, double bw_hi_hz, ModelKind kind,
                                   const FrequencyGrid& grid, double resonance_band_hz) {
    if (!(bw_hi_hz > bw_lo_hz) || bw_lo_hz < 0.0) throw SearchDomainError("PLL bandwidth interval is empty");
    auto stable_at = [&](double bw) {
        SystemSetup s = setup;
        s.pll_bw = bw;
        return nc_verdict(VscModel::from_setup(s), kind, grid).stable;
    };
    const bool lo_stable = stable_at(bw_lo_hz);
    const bool hi_stable = stable_at(bw_hi_hz);
    if (lo_stable == hi_stable) {
        throw SearchDomainError(std::string("same verdict (") + (lo_stable ? "stable" : "unstable") +
                                ") at both ends of the PLL bandwidth interval");
    }
    double lo = bw_lo_hz, hi = bw_hi_hz;
    while (hi - lo > 0.1) {
        const double mid = 0.5 * (lo + hi);
        if (stable_at(mid) == lo_stable) lo = mid;
        else hi = mid;
    }

    MarginalResult r{};
    r.boundary_hz = 0.5 * (lo + hi);
    r.stable_hz = lo_stable ? lo : hi;
    r.unstable_hz = lo_stable ? hi : lo;
    SystemSetup at = setup;
    at.pll_bw = r.boundary_hz;
    const VscModel m = VscModel::from_setup(at);
    r.positive_resonances = passivity_crossings(m, ModelKind::Accurate, Sequence::Positive, 0.1, resonance_band_hz);
    r.negative_resonances = passivity_crossings(m, ModelKind::Accurate, Sequence::Negative, 0.1, resonance_band_hz);
    return r;
}

}  // namespace seqimp
