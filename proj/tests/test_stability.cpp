#include <doctest.h>

#include "seqimp/errors.hpp"
#include "seqimp/stability.hpp"

#include <cmath>
#include <limits>
#include <numbers>

using namespace seqimp;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

SystemSetup setup(double scr, double pll, double i_ref = 0.5) {
    SystemSetup s;
    s.circuit.scr = scr;
    s.pll_bw = pll;
    s.i_ref_pu = {i_ref, 0.0};
    return s;
}

Locus circle(cplx centre, double radius, int n) {
    Locus l;
    for (int k = 0; k < n; ++k) {
        const double a = kTwoPi * k / n;
        l.samples.push_back({a, centre + std::polar(radius, a)});
    }
    return l;
}

}  // namespace

TEST_CASE("log grid") {
    const auto f = log_space(0.01, 1e4, 7);
    REQUIRE(f.size() == 7);
    CHECK(f.front() == doctest::Approx(0.01));
    CHECK(f[3] == doctest::Approx(10.0));
    CHECK(f.back() == doctest::Approx(1e4));
}

TEST_CASE("winding numbers") {
    CHECK(count_encirclements(circle(0.0, 1.0, 64), 0.0) == 1);
    CHECK(count_encirclements(circle(0.0, 1.0, 64), 2.0) == 0);
    Locus cw = circle(-1.0, 0.5, 64);
    std::reverse(cw.samples.begin(), cw.samples.end());
    CHECK(count_encirclements(cw) == -1);
    Locus on;
    on.samples = {{-1.0, {1.0, 0.0}}, {0.0, {-1.0, 0.0}}, {1.0, {0.0, 1.0}}};
    CHECK_THROWS_AS(count_encirclements(on), MarginalCaseError);
}

TEST_CASE("trivial gains") {
    const FrequencyGrid g;
    CHECK(count_encirclements(trace_locus([](double) { return cplx(0.5, 0.0); }, g)) == 0);
    const SignedGain first_order = [](double w) { return 0.9 / (1.0 + cplx(0.0, w) / 100.0); };
    CHECK(count_encirclements(trace_locus(first_order, g)) == 0);
    // 27 / (1 + s/w0)^3 encircles -1 twice clockwise (two closed-loop RHP poles).
    const SignedGain third_order = [](double w) { return 27.0 / std::pow(1.0 + cplx(0.0, w) / 100.0, 3); };
    CHECK(count_encirclements(trace_locus(third_order, g)) == -2);
    FrequencyGrid bad;
    bad.f_min_hz = 0.0;
    CHECK_THROWS_AS(trace_locus(first_order, bad), UsageError);
}

TEST_CASE("refinement keeps steps small near the critical point") {
    const SignedGain g = [](double w) { return -1.05 * std::exp(cplx(0.0, -w / 500.0)) / (1.0 + cplx(0.0, w) / 5000.0); };
    const FrequencyGrid grid;
    const Locus l = trace_locus(g, grid);
    for (std::size_t k = 1; k < l.samples.size(); ++k) {
        if ((l.samples[k].omega < 0.0) != (l.samples[k - 1].omega < 0.0)) continue;
        const cplx a = l.samples[k - 1].value;
        const cplx b = l.samples[k].value;
        if (std::abs(a + 1.0) < grid.refine_radius || std::abs(b + 1.0) < grid.refine_radius) {
            CHECK(std::abs(b - a) <= grid.refine_step);
        }
        CHECK(l.samples[k].omega > l.samples[k - 1].omega);
    }
}

TEST_CASE("ideal grid is always stable") {
    SystemSetup s = setup(4.0, 100.0);
    s.circuit.scr = std::numeric_limits<double>::infinity();
    const VscModel m = VscModel::from_setup(s);
    CHECK(minor_loop_gain(m, {0.0, 100.0}, ModelKind::Accurate, Sequence::Positive) == cplx(0.0, 0.0));
    CHECK(nc_verdict(m, ModelKind::Accurate).stable);
    CHECK(gnc_verdict(m).stable);
}

TEST_CASE("frozen PLL: all criteria agree") {
    const VscModel m = VscModel::from_setup(setup(2.0, 0.0));
    const cplx s{0.0, 80.0};
    CHECK(minor_loop_gain(m, s, ModelKind::Accurate, Sequence::Positive) ==
          minor_loop_gain(m, s, ModelKind::Reduced, Sequence::Positive));
    const bool a = nc_verdict(m, ModelKind::Accurate).stable;
    CHECK(a == nc_verdict(m, ModelKind::Reduced).stable);
    CHECK(a == gnc_verdict(m).stable);
}

TEST_CASE("negative-frequency branch is the conjugated opposite sequence") {
    const VscModel m = VscModel::from_setup(setup(4.0, 50.0));
    const Locus l = nyquist_locus(m, ModelKind::Accurate, Sequence::Positive, {});
    for (const auto& smp : l.samples) {
        if (smp.omega >= 0.0) continue;
        const cplx expect = std::conj(minor_loop_gain(m, {0.0, -smp.omega}, ModelKind::Accurate, Sequence::Negative));
        CHECK(std::abs(smp.value - expect) <= 1e-14 * std::abs(expect));
    }
    CHECK(l.model == "A");
    CHECK(l.label == "gamma_p");
}

TEST_CASE("accurate NC agrees with GNC over the test matrix") {
    for (double scr : {2.0, 4.0, 8.0}) {
        for (double pll : {5.0, 20.0, 50.0, 100.0}) {
            for (double ir : {0.5, -0.5}) {
                const VscModel m = VscModel::from_setup(setup(scr, pll, ir));
                const StabilityVerdict a = nc_verdict(m, ModelKind::Accurate);
                const StabilityVerdict c = gnc_verdict(m);
                CAPTURE(scr);
                CAPTURE(pll);
                CAPTURE(ir);
                CHECK(a.stable == c.stable);
                CHECK(c.encirclements[0] + c.encirclements[1] == det_encirclements(m));
            }
        }
    }
}

TEST_CASE("reduced model gives a wrong verdict at high PLL bandwidth") {
    const VscModel m = VscModel::from_setup(setup(2.0, 100.0));
    CHECK_FALSE(gnc_verdict(m).stable);
    CHECK_FALSE(nc_verdict(m, ModelKind::Accurate).stable);
    CHECK(nc_verdict(m, ModelKind::Reduced).stable);
}

TEST_CASE("encirclement counts survive grid doubling") {
    const FrequencyGrid g;
    for (double scr : {2.0, 4.0, 8.0}) {
        for (double pll : {5.0, 20.0, 50.0, 100.0}) {
            for (double ir : {0.5, -0.5}) {
                const VscModel m = VscModel::from_setup(setup(scr, pll, ir));
                for (ModelKind k : {ModelKind::Accurate, ModelKind::Reduced}) {
                    CHECK(nc_verdict(m, k, g).encirclements == nc_verdict(m, k, g.doubled()).encirclements);
                }
                CHECK(gnc_verdict(m, g).encirclements == gnc_verdict(m, g.doubled()).encirclements);
            }
        }
    }
}

TEST_CASE("passivity crossings") {
    // Frozen PLL, ideal grid: the loop is the passive RL filter plus the PI.
    SystemSetup s = setup(4.0, 0.0);
    s.circuit.scr = std::numeric_limits<double>::infinity();
    for (const auto& r : passivity_crossings(VscModel::from_setup(s), ModelKind::Accurate, Sequence::Positive, 0.1, 500.0)) {
        CHECK(r.positive_re);
    }

    const VscModel m = VscModel::from_setup(setup(4.0, 100.0));
    const auto cr = passivity_crossings(m, ModelKind::Accurate, Sequence::Negative, 0.1, 200.0);
    REQUIRE_FALSE(cr.empty());
    for (const auto& r : cr) {
        const cplx z = loop_impedance(m, {0.0, kTwoPi * r.f_res_hz}, ModelKind::Accurate, Sequence::Negative);
        CHECK(std::abs(z.imag()) < 1e-3 * std::abs(z));
        CHECK(r.positive_re == (z.real() > 0.0));
    }
    CHECK_THROWS_AS(passivity_crossings(m, ModelKind::Accurate, Sequence::Positive, 10.0, 5.0), UsageError);
}

TEST_CASE("passivity and NC are consistent over the test matrix") {
    for (double scr : {2.0, 4.0, 8.0}) {
        for (double pll : {5.0, 20.0, 50.0, 100.0}) {
            for (double ir : {0.5, -0.5}) {
                const VscModel m = VscModel::from_setup(setup(scr, pll, ir));
                if (passivity_verdict(m, ModelKind::Accurate, 0.1, 500.0).stable) {
                    CHECK(nc_verdict(m, ModelKind::Accurate).stable);
                }
            }
        }
    }
}

TEST_CASE("marginal search") {
    CHECK_THROWS_AS(marginal_pll_search(setup(8.0, 5.0), 5.0, 50.0), SearchDomainError);
    const MarginalResult r = marginal_pll_search(setup(2.0, 5.0), 50.0, 100.0);
    CHECK(r.boundary_hz > 50.0);
    CHECK(r.boundary_hz < 100.0);
    CHECK(r.unstable_hz - r.stable_hz <= 0.1);
    CHECK(r.unstable_hz > r.stable_hz);
    SystemSetup lo = setup(2.0, r.stable_hz);
    SystemSetup hi = setup(2.0, r.unstable_hz);
    CHECK(nc_verdict(VscModel::from_setup(lo), ModelKind::Accurate).stable);
    CHECK_FALSE(nc_verdict(VscModel::from_setup(hi), ModelKind::Accurate).stable);
}
