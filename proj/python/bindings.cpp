#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "seqimp/commands.hpp"
#include "seqimp/config.hpp"
#include "seqimp/errors.hpp"
#include "seqimp/stability.hpp"
#include "seqimp/timesim.hpp"

#include <numbers>

namespace py = pybind11;
using namespace seqimp;

namespace {

Sequence parse_sequence(const std::string& s) {
    if (s == "p" || s == "positive") return Sequence::Positive;
    if (s == "n" || s == "negative") return Sequence::Negative;
    throw py::value_error("sequence must be 'p' or 'n'");
}

ModelKind parse_kind(const std::string& s) {
    if (s == "accurate" || s == "A") return ModelKind::Accurate;
    if (s == "reduced" || s == "B") return ModelKind::Reduced;
    throw py::value_error("model must be 'accurate' or 'reduced'");
}

Config load(const std::string& text, const std::vector<std::string>& overrides) {
    Config cfg = parse_config_text(text);
    for (const auto& o : overrides) apply_override(cfg, o);
    return cfg;
}

py::dict verdict_dict(const StabilityVerdict& v) {
    py::dict d;
    d["stable"] = v.stable;
    d["criterion"] = to_string(v.criterion);
    d["model"] = v.model;
    d["encirclements"] = v.encirclements;
    py::list loci;
    for (const auto& l : v.loci) {
        std::vector<double> w;
        std::vector<cplx> z;
        for (const auto& s : l.samples) {
            w.push_back(s.omega);
            z.push_back(s.value);
        }
        py::dict ld;
        ld["label"] = l.label;
        ld["omega"] = w;
        ld["value"] = z;
        loci.append(ld);
    }
    d["loci"] = loci;
    return d;
}

py::list resonance_list(const std::vector<Resonance>& rs) {
    py::list out;
    for (const auto& r : rs) {
        py::dict d;
        d["f_res_hz"] = r.f_res_hz;
        d["positive_re"] = r.positive_re;
        d["re_ohm"] = r.re_ohm;
        out.append(d);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_seqimp, m) {
    m.doc() = "Sequence-impedance modelling and stability analysis of a grid-tied VSC";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<SearchDomainError>(m, "SearchDomainError", PyExc_ValueError);
    py::register_exception<InfeasibleOperatingPoint>(m, "InfeasibleOperatingPoint", PyExc_ValueError);
    py::register_exception<SingularMatrixError>(m, "SingularMatrixError", PyExc_ArithmeticError);

    m.def("config_keys", &config_keys);

    m.def(
        "loop_impedance",
        [](const std::vector<double>& f_dq_hz, const std::string& model, const std::string& seq,
           const std::vector<std::string>& overrides) {
            const Config cfg = load("", overrides);
            const VscModel vm = VscModel::from_setup(cfg.system);
            const Sequence q = parse_sequence(seq);
            std::vector<cplx> z;
            for (double f : f_dq_hz) {
                const cplx s{0.0, 2.0 * std::numbers::pi * f};
                z.push_back(model == "mimo" ? loop_impedance_matrix_form(vm, s, q)
                                            : loop_impedance(vm, s, parse_kind(model), q));
            }
            return z;
        },
        py::arg("f_dq_hz"), py::arg("model") = "accurate", py::arg("seq") = "p",
        py::arg("overrides") = std::vector<std::string>{},
        "Loop impedance (ohm) at s = j 2 pi f for each dq-frame frequency.");

    m.def(
        "load_admittance",
        [](double f_dq_hz, const std::vector<std::string>& overrides) {
            const VscModel vm = VscModel::from_setup(load("", overrides).system);
            const SeqMatrix y = vm.load_admittance_pn({0.0, 2.0 * std::numbers::pi * f_dq_hz});
            return std::vector<std::vector<cplx>>{{y.pp, y.pn}, {y.np, y.nn}};
        },
        py::arg("f_dq_hz"), py::arg("overrides") = std::vector<std::string>{});

    m.def(
        "nyquist",
        [](const std::string& model, const std::vector<std::string>& overrides) {
            const Config cfg = load("", overrides);
            const VscModel vm = VscModel::from_setup(cfg.system);
            FrequencyGrid g;
            g.f_min_hz = cfg.analysis.f_min;
            g.f_max_hz = cfg.analysis.f_max;
            g.points = cfg.analysis.points;
            if (model == "C" || model == "mimo") return verdict_dict(gnc_verdict(vm, g));
            return verdict_dict(nc_verdict(vm, parse_kind(model), g));
        },
        py::arg("model") = "A", py::arg("overrides") = std::vector<std::string>{},
        "NC verdict for models A/B or GNC verdict for model C, with loci.");

    m.def(
        "passivity_crossings",
        [](const std::string& model, const std::string& seq, double f_lo, double f_hi,
           const std::vector<std::string>& overrides) {
            const VscModel vm = VscModel::from_setup(load("", overrides).system);
            return resonance_list(passivity_crossings(vm, parse_kind(model), parse_sequence(seq), f_lo, f_hi));
        },
        py::arg("model"), py::arg("seq"), py::arg("f_lo_hz") = 0.1, py::arg("f_hi_hz") = 200.0,
        py::arg("overrides") = std::vector<std::string>{});

    m.def(
        "marginal_pll",
        [](double lo, double hi, const std::vector<std::string>& overrides) {
            const MarginalResult r = marginal_pll_search(load("", overrides).system, lo, hi);
            py::dict d;
            d["boundary_hz"] = r.boundary_hz;
            d["stable_hz"] = r.stable_hz;
            d["unstable_hz"] = r.unstable_hz;
            d["positive_resonances"] = resonance_list(r.positive_resonances);
            d["negative_resonances"] = resonance_list(r.negative_resonances);
            return d;
        },
        py::arg("lo_hz"), py::arg("hi_hz"), py::arg("overrides") = std::vector<std::string>{});

    m.def(
        "measure",
        [](const std::vector<double>& f_dq_hz, const std::string& seq, double amplitude_pu,
           const std::vector<std::string>& overrides) {
            const SimParams p = make_sim_params(load("", overrides).system);
            MeasureOptions opt;
            opt.amplitude_pu = amplitude_pu;
            std::vector<cplx> z;
            std::vector<bool> usable;
            {
                py::gil_scoped_release release;
                for (const auto& r : impedance_sweep(p, f_dq_hz, parse_sequence(seq), opt)) {
                    z.push_back(r.z_loop);
                    usable.push_back(r.usable());
                }
            }
            return py::make_tuple(z, usable);
        },
        py::arg("f_dq_hz"), py::arg("seq") = "p", py::arg("amplitude_pu") = 0.01,
        py::arg("overrides") = std::vector<std::string>{},
        "Simulated frequency scan; returns (z_loop list, usable flags).");

    m.def(
        "simulate",
        [](double duration, const std::vector<std::string>& overrides) {
            const Config cfg = load("", overrides);
            const SimParams p = make_sim_params(cfg.system);
            Scenario sc;
            sc.duration = duration;
            sc.dt = cfg.sim.dt;
            sc.output_rate = cfg.sim.output_rate;
            sc.events = cfg.sim.events;
            Timeseries ts;
            {
                py::gil_scoped_release release;
                ts = integrate(p, sc, initial_state(p));
            }
            std::vector<double> t, theta;
            std::vector<cplx> i_dq;
            for (const auto& s : ts.samples) {
                t.push_back(s.t);
                i_dq.push_back(s.i_dq);
                theta.push_back(s.theta_pll);
            }
            py::dict d;
            d["t"] = t;
            d["i_dq"] = i_dq;
            d["theta_pll"] = theta;
            d["diverged"] = ts.diverged;
            return d;
        },
        py::arg("duration"), py::arg("overrides") = std::vector<std::string>{});

    m.def(
        "verify",
        [](const std::vector<std::string>& overrides) {
            py::list out;
            for (const auto& c : run_identity_suite(load("", overrides))) {
                py::dict d;
                d["name"] = c.name;
                d["max_error"] = c.max_error;
                d["tolerance"] = c.tolerance;
                d["passed"] = c.passed;
                out.append(d);
            }
            return out;
        },
        py::arg("overrides") = std::vector<std::string>{});

    m.def(
        "run_command",
        [](const std::string& command, const std::string& config_text, const std::vector<std::string>& overrides,
           const std::string& out_dir) {
            Config cfg = load(config_text, overrides);
            if (!out_dir.empty()) cfg.output.dir = out_dir;
            const CommandResult r = run_command(command, cfg);
            std::vector<std::string> files;
            for (const auto& f : r.files) files.push_back(f.string());
            return py::make_tuple(r.exit_code, files, r.summary);
        },
        py::arg("command"), py::arg("config_text") = "", py::arg("overrides") = std::vector<std::string>{},
        py::arg("out_dir") = "", "Same as the command-line tool; returns (exit_code, files, summary).");
}
