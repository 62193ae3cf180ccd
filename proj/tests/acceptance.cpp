// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance                 run all criteria
//   acceptance --criterion N   run criterion N only

#include "seqimp/commands.hpp"
#include "seqimp/errors.hpp"
#include "seqimp/stability.hpp"
#include "seqimp/timesim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace seqimp;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr Sequence kSeq[] = {Sequence::Positive, Sequence::Negative};

struct Outcome {
    bool pass;
    std::string detail;
};

SystemSetup condition(double scr, double pll, double i_ref = 0.5) {
    SystemSetup s;
    s.circuit.scr = scr;
    s.cc_bw = 200.0;
    s.pll_bw = pll;
    s.i_ref_pu = {i_ref, 0.0};
    return s;
}

// The three frequency-scan conditions: weak grid / slow PLL, strong grid /
// fast PLL with power flowing out and in.
const SystemSetup kScanConditions[] = {condition(4.0, 5.0), condition(8.0, 100.0), condition(8.0, 100.0, -0.5)};

std::string label(const SystemSetup& s) {
    std::ostringstream os;
    os << "SCR=" << s.circuit.scr << "/PLL=" << s.pll_bw << "Hz/i_ref=" << s.i_ref_pu.real();
    return os.str();
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const char* word(bool stable) { return stable ? "stable" : "unstable"; }

Outcome closed_form_identity() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto f = log_space(0.1, 1.0e4, 2000);
    double worst = 0.0;
    for (const SystemSetup& s : kScanConditions) {
        const VscModel m = VscModel::from_setup(s);
        for (double fk : f) {
            for (Sequence q : kSeq) {
                const cplx sk{0.0, kTwoPi * fk};
                worst = std::max(worst, rel(loop_impedance_matrix_form(m, sk, q), loop_impedance_accurate(m, sk, q)));
            }
        }
    }
    const double dt = seconds_since(t0);
    std::ostringstream os;
    os << "max rel diff " << worst << " (tol 1e-10), runtime " << dt << " s (limit 1 s)";
    return {worst <= 1e-10 && dt < 1.0, os.str()};
}

Outcome verdict_table() {
    const double plls[] = {5.0, 50.0, 100.0};
    const bool expected[] = {true, false, false};
    bool ok = true;
    std::ostringstream os;
    for (int k = 0; k < 3; ++k) {
        const VscModel m = VscModel::from_setup(condition(4.0, plls[k]));
        const bool a = nc_verdict(m, ModelKind::Accurate).stable;
        const bool c = gnc_verdict(m).stable;
        ok = ok && a == expected[k] && c == expected[k];
        os << "PLL " << plls[k] << ": A " << word(a) << ", C " << word(c) << "; ";
    }
    int b_disagrees = -1;
    for (int pll = 50; pll <= 100; ++pll) {
        const VscModel m = VscModel::from_setup(condition(4.0, pll));
        if (nc_verdict(m, ModelKind::Reduced).stable != gnc_verdict(m).stable) {
            b_disagrees = pll;
            break;
        }
    }
    os << "expected {stable, unstable, unstable}; ";
    if (b_disagrees < 0) os << "B never disagrees with C in [50, 100] Hz";
    else os << "B disagrees with C at " << b_disagrees << " Hz";
    return {ok && b_disagrees >= 0, os.str()};
}

Outcome passivity() {
    const VscModel m = VscModel::from_setup(condition(4.0, 100.0));
    const double lo = 0.1, hi = 200.0;
    auto describe = [](const std::vector<Resonance>& r) {
        std::ostringstream os;
        os << "[";
        for (std::size_t k = 0; k < r.size(); ++k) {
            os << (k ? " " : "") << r[k].f_res_hz << "Hz:" << (r[k].positive_re ? "+" : "-");
        }
        os << "]";
        return os.str();
    };
    auto all_positive = [](const std::vector<Resonance>& r) {
        if (r.empty()) return false;
        for (const auto& c : r) {
            if (!c.positive_re) return false;
        }
        return true;
    };
    const auto ap = passivity_crossings(m, ModelKind::Accurate, Sequence::Positive, lo, hi);
    const auto an = passivity_crossings(m, ModelKind::Accurate, Sequence::Negative, lo, hi);
    const auto bp = passivity_crossings(m, ModelKind::Reduced, Sequence::Positive, lo, hi);
    const auto bn = passivity_crossings(m, ModelKind::Reduced, Sequence::Negative, lo, hi);
    bool ap_negative = false;
    for (const auto& c : ap) ap_negative = ap_negative || !c.positive_re;
    const bool ok = ap_negative && all_positive(an) && all_positive(bp) && all_positive(bn);
    return {ok, "A_p " + describe(ap) + " (needs a '-'), A_n " + describe(an) + ", B_p " + describe(bp) + ", B_n " +
                    describe(bn) + " (need all '+')"};
}

// Bounded: no divergence flag and the dq current stays within 0.5 p.u. of
// its reference over the final second.
bool run_bounded(double pll, double duration, std::string& note) {
    const SimParams p = make_sim_params(condition(4.0, pll));
    SimState x = initial_state(p);
    x.theta_pll += 1e-3;
    Scenario sc;
    sc.duration = duration;
    const Timeseries ts = integrate(p, sc, x);
    const double dev = ts.diverged ? INFINITY : dq_deviation(ts, p.op.i_c0, duration - 1.0, duration + 1.0);
    std::ostringstream os;
    os << "PLL " << pll << " Hz: " << (ts.diverged ? "diverged" : "deviation " + std::to_string(dev / p.circuit.i_base_peak()) + " p.u.");
    note = os.str();
    return !ts.diverged && dev < 0.5 * p.circuit.i_base_peak();
}

Outcome marginal_boundary() {
    MarginalResult r{};
    try {
        r = marginal_pll_search(condition(4.0, 5.0), 5.0, 50.0);
    } catch (const SearchDomainError& e) {
        return {false, std::string("bisection on [5, 50] Hz: ") + e.what()};
    }
    std::ostringstream os;
    os << "boundary " << r.boundary_hz << " Hz (required [10, 30])";
    bool ok = r.boundary_hz >= 10.0 && r.boundary_hz <= 30.0;
    std::string below, above;
    const bool bounded_below = run_bounded(r.boundary_hz - 2.0, 20.0, below);
    const bool bounded_above = run_bounded(r.boundary_hz + 2.0, 20.0, above);
    ok = ok && bounded_below && !bounded_above;
    os << "; " << below << "; " << above;
    return {ok, os.str()};
}

Outcome oracle_match() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto f = frequency_range(2.0, 98.0, 2.0);
    MeasureOptions opt;
    opt.sample_rate = 1000.0;
    opt.window_s = 0.5;
    bool ok = true;
    std::ostringstream os;
    double worst_a_n = 0.0, worst_b_n = 0.0;
    for (int c = 0; c < 3; ++c) {
        const SystemSetup& s = kScanConditions[c];
        const SimParams p = make_sim_params(s);
        const VscModel m = VscModel::from_setup(s);
        int good = 0, total = 0;
        for (Sequence q : kSeq) {
            for (const auto& meas : impedance_sweep(p, f, q, opt)) {
                if (meas.skipped) continue;
                ++total;
                if (!meas.usable()) continue;
                const cplx sk{0.0, kTwoPi * meas.f_dq_hz};
                const cplx za = loop_impedance(m, sk, ModelKind::Accurate, q);
                const double mag_err = std::abs(std::abs(meas.z_loop) / std::abs(za) - 1.0);
                const double ph_err = std::abs(std::arg(meas.z_loop / za)) * 180.0 / std::numbers::pi;
                if (mag_err <= 0.05 && ph_err <= 5.0) ++good;
                if (c == 1 && q == Sequence::Negative) {
                    const cplx zb = loop_impedance(m, sk, ModelKind::Reduced, q);
                    worst_a_n = std::max(worst_a_n, std::abs(meas.z_loop - za) / std::abs(meas.z_loop));
                    worst_b_n = std::max(worst_b_n, std::abs(meas.z_loop - zb) / std::abs(meas.z_loop));
                }
            }
        }
        const double frac = total ? static_cast<double>(good) / total : 0.0;
        ok = ok && frac >= 0.95;
        os << label(s) << ": " << good << "/" << total << " within 5%/5deg; ";
    }
    const double dt = seconds_since(t0);
    const bool diverges = worst_b_n >= 3.0 * worst_a_n;
    os << "SCR=8/PLL=100 negative-sequence worst error A " << worst_a_n << ", B " << worst_b_n << " (need B >= 3A); runtime "
       << dt << " s (limit 300 s)";
    return {ok && diverges && dt < 300.0, os.str()};
}

Outcome mirror_frequencies() {
    const SimParams p = make_sim_params(condition(4.0, 5.0));
    SimState x = initial_state(p);
    x.theta_pll += 1e-3;
    Scenario sc;
    sc.duration = 8.0;
    sc.events = {{2.0, "pll_bw", 20.0}};
    const Timeseries ts = integrate(p, sc, x);
    std::ostringstream os;
    if (ts.diverged) os << "run diverged at " << ts.divergence_time << " s; ";
    std::vector<double> ia;
    for (const auto& s : ts.samples) ia.push_back(phase_currents(s.i_ab)[0]);
    const Spectrum sp = spectrum_report(ia, 1000.0, 1.0, p.circuit.f1, 2);
    if (sp.peaks.size() < 2) return {false, os.str() + "fewer than two non-fundamental peaks"};
    const double f_a = std::min(sp.peaks[0].f_hz, sp.peaks[1].f_hz);
    const double f_b = std::max(sp.peaks[0].f_hz, sp.peaks[1].f_hz);
    const bool ok = std::abs(f_a - 40.0) <= 3.0 && std::abs(f_b - 60.0) <= 3.0;
    os << "top peaks " << sp.peaks[0].f_hz << " Hz (" << sp.peaks[0].magnitude << " A), " << sp.peaks[1].f_hz << " Hz ("
       << sp.peaks[1].magnitude << " A); expected 40 +/- 3 and 60 +/- 3 Hz; fundamental "
       << sp.magnitude[static_cast<std::size_t>(p.circuit.f1)] << " A";
    return {ok, os.str()};
}

Outcome structural_invariants() {
    bool ok = true;
    std::ostringstream os;
    int checks = 0;
    for (const SystemSetup& s : kScanConditions) {
        Config cfg;
        cfg.system = s;
        for (const auto& c : run_identity_suite(cfg)) {
            ++checks;
            if (!c.passed) {
                ok = false;
                os << label(s) << " " << c.name << " error " << c.max_error << "; ";
            }
        }
    }
    const FrequencyGrid g;
    int robust_failures = 0;
    for (double scr : {2.0, 4.0, 8.0}) {
        for (double pll : {5.0, 20.0, 50.0, 100.0}) {
            for (double ir : {0.5, -0.5}) {
                const VscModel m = VscModel::from_setup(condition(scr, pll, ir));
                for (ModelKind k : {ModelKind::Accurate, ModelKind::Reduced}) {
                    if (nc_verdict(m, k, g).encirclements != nc_verdict(m, k, g.doubled()).encirclements) ++robust_failures;
                }
                if (gnc_verdict(m, g).encirclements != gnc_verdict(m, g.doubled()).encirclements) ++robust_failures;
            }
        }
    }
    ok = ok && robust_failures == 0;
    os << checks << " identity checks over 3 conditions, " << robust_failures
       << " encirclement changes under grid doubling over 24 configurations";
    return {ok, os.str()};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list = {
        {1, "closed-form loop impedance identity", closed_form_identity},
        {2, "verdict table at SCR=4 for PLL 5/50/100 Hz", verdict_table},
        {3, "passivity signs at SCR=4, PLL=100 Hz", passivity},
        {4, "marginal PLL bandwidth and simulator confirmation", marginal_boundary},
        {5, "simulator impedance scan matches the accurate model", oracle_match},
        {6, "mirror-frequency oscillation after PLL step", mirror_frequencies},
        {7, "structural invariants", structural_invariants},
    };
    return list;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int k = 1; k < argc; ++k) {
        if (std::strcmp(argv[k], "--criterion") == 0 && k + 1 < argc) {
            only = std::atoi(argv[++k]);
        } else {
            std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
            return 64;
        }
    }
    int failed = 0;
    int ran = 0;
    for (const auto& c : criteria()) {
        if (only != 0 && c.id != only) continue;
        ++ran;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s criterion %d: %s -- %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    if (ran == 0) {
        std::fprintf(stderr, "no criterion %d\n", only);
        return 64;
    }
    return failed == 0 ? 0 : 1;
}
