#pragma once

#include "seqimp/siso.hpp"

#include <functional>
#include <string>
#include <vector>

namespace seqimp {

struct LocusSample {
    /// Signed angular frequency (rad/s) in the dq frame.
    double omega;
    cplx value;
};

/// Closed Nyquist contour: samples ordered by increasing omega, from
/// -omega_max to +omega_max. The contour is closed by joining the last
/// sample to the first.
struct Locus {
    std::string label;
    std::string model;
    std::string sequence;
    std::vector<LocusSample> samples;
};

/// Logarithmic base grid mirrored to negative frequencies, refined near the
/// critical point.
struct FrequencyGrid {
    double f_min_hz = 0.01;
    double f_max_hz = 1.0e4;
    int points = 2000;
    /// Refine where |value + 1| is below this radius ...
    double refine_radius = 0.2;
    /// ... until consecutive samples differ by less than this.
    double refine_step = 0.05;
    int max_depth = 24;

    FrequencyGrid doubled() const {
        FrequencyGrid g = *this;
        g.points = 2 * points;
        return g;
    }
};

/// n log-spaced frequencies in [f_min, f_max].
std::vector<double> log_space(double f_min, double f_max, int n);

/// Gain as a function of signed angular frequency.
using SignedGain = std::function<cplx(double omega)>;

Locus trace_locus(const SignedGain& gain, const FrequencyGrid& grid);

/// Winding number of the closed locus about `point`, counterclockwise
/// positive. Throws MarginalCaseError if a sample lies within 1e-9 of it.
int count_encirclements(const Locus& locus, cplx point = {-1.0, 0.0});

/// Gamma = Z_S * Y_L-eq (accurate) or Z_S * Y_L,diag (reduced).
cplx minor_loop_gain(const VscModel& m, cplx s, ModelKind kind, Sequence seq);

/// Full contour of the SISO gain of `seq`. Its negative-frequency branch is
/// the conjugate of the opposite-sequence gain at positive frequency.
Locus nyquist_locus(const VscModel& m, ModelKind kind, Sequence seq, const FrequencyGrid& grid);

enum class Criterion { NC, GNC, Passivity };

const char* to_string(Criterion c);

struct Resonance {
    double f_res_hz;
    bool positive_re;
    double re_ohm;
};

struct StabilityVerdict {
    bool stable = true;
    Criterion criterion = Criterion::NC;
    /// One count per locus (NC: gamma_p, gamma_n; GNC: l1, l2; passivity: empty).
    std::vector<int> encirclements;
    std::vector<Resonance> resonances;
    std::vector<Locus> loci;
    std::string model;
};

/// Classic Nyquist on the SISO minor loop gains; assumes open-loop stable gains.
StabilityVerdict nc_verdict(const VscModel& m, ModelKind kind, const FrequencyGrid& grid = {});

/// Generalized Nyquist on the eigenvalues of L = Z_S^PN Y_L^PN, traced over
/// negative and positive frequency explicitly.
StabilityVerdict gnc_verdict(const VscModel& m, const FrequencyGrid& grid = {});

/// Winding of det(I + L(j omega)) about the origin over the same contour;
/// independent of eigenvalue tracking.
int det_encirclements(const VscModel& m, const FrequencyGrid& grid = {});

/// Zeros of Im(Z_loop(j 2 pi f)) in [f_lo, f_hi] (dq frame), located to
/// 1e-3 Hz, with the sign of Re(Z_loop) at each. Poles (Im jumping through
/// infinity) are not reported.
std::vector<Resonance> passivity_crossings(const VscModel& m, ModelKind kind, Sequence seq, double f_lo_hz,
                                           double f_hi_hz, int scan_points = 4000);

/// Stable when every crossing of both sequences is positive-resistive.
StabilityVerdict passivity_verdict(const VscModel& m, ModelKind kind, double f_lo_hz, double f_hi_hz);

struct MarginalResult {
    double boundary_hz;
    double stable_hz;
    double unstable_hz;
    std::vector<Resonance> positive_resonances;
    std::vector<Resonance> negative_resonances;
};

/// Bisection on the PLL bandwidth (0.1 Hz resolution) using the SISO NC
/// verdict of `kind`. Throws SearchDomainError when both ends agree.
MarginalResult marginal_pll_search(const SystemSetup& setup, double bw_lo_hz, double bw_hi_hz,
                                   ModelKind kind = ModelKind::Accurate, const FrequencyGrid& grid = {},
                                   double resonance_band_hz = 200.0);

}  // namespace seqimp
