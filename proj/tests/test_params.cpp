#include <doctest.h>

#include "seqimp/errors.hpp"
#include "seqimp/params.hpp"

#include <cmath>
#include <limits>
#include <numbers>

using namespace seqimp;

TEST_CASE("default circuit matches the per-unit table") {
    const CircuitParams c = build_circuit({});
    CHECK(c.z_base() == doctest::Approx(0.23805).epsilon(1e-14));
    CHECK(c.rf == doctest::Approx(0.00595125).epsilon(1e-14));
    CHECK(c.lf == doctest::Approx(7.577366840605138e-05).epsilon(1e-13));
    CHECK(c.rs == doctest::Approx(0.011671361492411178).epsilon(1e-13));
    CHECK(c.ls == doctest::Approx(0.00018575548741296395).epsilon(1e-13));
    const cplx zs_pu = c.grid_impedance_at_f1() / c.z_base();
    CHECK(zs_pu.real() == doctest::Approx(0.04903).epsilon(1e-4));
    CHECK(zs_pu.imag() == doctest::Approx(0.24515).epsilon(1e-4));
    CHECK(c.v_base_peak() == doctest::Approx(563.38).epsilon(1e-4));
    CHECK(c.i_base_peak() == doctest::Approx(2366.6567563122494).epsilon(1e-13));
}

TEST_CASE("invalid circuit values name their key") {
    PerUnitCircuit p;
    p.scr = -1.0;
    try {
        build_circuit(p);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "circuit.scr");
    }
    p = {};
    p.zf_pu = {0.0, 0.1};
    CHECK_THROWS_AS(build_circuit(p), ConfigError);
}

TEST_CASE("infinite scr gives an ideal grid") {
    PerUnitCircuit p;
    p.scr = std::numeric_limits<double>::infinity();
    const CircuitParams c = build_circuit(p);
    CHECK(c.rs == 0.0);
    CHECK(c.ls == 0.0);
}

TEST_CASE("per-unit round trip") {
    PerUnitCircuit p;
    p.scr = 8.0;
    p.xr_ratio = 3.0;
    const PerUnitCircuit q = to_per_unit(build_circuit(p));
    CHECK(q.scr == doctest::Approx(8.0).epsilon(1e-13));
    CHECK(q.xr_ratio == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(std::abs(q.zf_pu - p.zf_pu) < 1e-15);
}

TEST_CASE("controller gain mapping") {
    const CircuitParams c = build_circuit({});
    const double v0 = 563.0;
    const ControllerParams k = tune_controllers(200.0, 5.0, c, v0);
    CHECK(k.kp_cc == doctest::Approx(0.09522).epsilon(1e-12));
    CHECK(k.ki_cc == doctest::Approx(7.478561311870504).epsilon(1e-12));
    const double wn = 2.0 * std::numbers::pi * 5.0;
    CHECK(v0 * k.kp_pll == doctest::Approx(std::numbers::sqrt2 * wn).epsilon(1e-13));
    CHECK(v0 * k.ki_pll == doctest::Approx(wn * wn).epsilon(1e-13));
    CHECK(pll_closed_loop(k, v0, 0.0) == cplx(1.0, 0.0));
    const ControllerParams frozen = tune_controllers(200.0, 0.0, c, v0);
    CHECK(frozen.pll_frozen());
    CHECK(pll_closed_loop(frozen, v0, {0.0, 10.0}) == cplx(0.0, 0.0));
    CHECK_THROWS_AS(tune_controllers(-1.0, 5.0, c, v0), ConfigError);
}

TEST_CASE("operating point matches the closed form") {
    const CircuitParams c = build_circuit({});
    const OperatingPoint op = solve_operating_point(c, {0.5, 0.0}, 1.0);
    CHECK(op.v0 / c.v_base_peak() == doctest::Approx(1.0169740684803774).epsilon(1e-13));
    CHECK(op.theta0 == doctest::Approx(0.12288160079454034).epsilon(1e-12));
    const cplx e = op.v0 - c.grid_impedance_at_f1() * op.i_c0;
    CHECK(std::abs(e) / c.v_base_peak() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::arg(e) == doctest::Approx(-op.theta0).epsilon(1e-12));
    const cplx vc = op.v0 + c.filter_impedance_at_f1() * op.i_c0;
    CHECK(std::abs(op.v_c0 - vc) < 1e-9);

    const OperatingPoint idle = solve_operating_point(c, {0.0, 0.0}, 1.0);
    CHECK(idle.v0 == doctest::Approx(c.v_base_peak()).epsilon(1e-14));
}

TEST_CASE("infeasible operating point") {
    PerUnitCircuit p;
    p.scr = 0.1;
    CHECK_THROWS_AS(solve_operating_point(build_circuit(p), {0.5, 0.0}, 1.0), InfeasibleOperatingPoint);
}

TEST_CASE("nominal PLL voltage switch") {
    SystemSetup s;
    s.pll_nominal_v0 = true;
    const SolvedSystem sys = solve_system(s);
    CHECK(sys.pll_v0 == doctest::Approx(sys.circuit.v_base_peak()));
    s.pll_nominal_v0 = false;
    CHECK(solve_system(s).pll_v0 == doctest::Approx(solve_system(s).op.v0));
}
