#include "seqimp/commands.hpp"

#include "seqimp/errors.hpp"
#include "seqimp/io.hpp"
#include "seqimp/stability.hpp"
#include "seqimp/timesim.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace seqimp {

namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr Sequence kSequences[] = {Sequence::Positive, Sequence::Negative};

std::string num(double v) { return format_double(v); }

std::string bw_tag(double bw) {
    std::ostringstream os;
    os << "pll_" << bw;
    return os.str();
}

SystemSetup with_pll(const SystemSetup& s, double bw) {
    SystemSetup out = s;
    out.pll_bw = bw;
    return out;
}

FrequencyGrid contour_grid(const Config& cfg) {
    FrequencyGrid g;
    g.f_min_hz = cfg.analysis.f_min;
    g.f_max_hz = cfg.analysis.f_max;
    g.points = cfg.analysis.points;
    return g;
}

double rel(cplx a, cplx b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

CsvTable bode_table(const std::vector<ImpedanceSample>& samples, Sequence seq, double f1) {
    CsvTable t{{"f_dq_hz", "f_phase_hz", "re_ohm", "im_ohm", "mag_ohm", "phase_deg"}, {}};
    for (const auto& s : samples) {
        t.rows.push_back({num(s.f_dq_hz), num(phase_frequency(seq, s.f_dq_hz, f1)), num(s.value.real()),
                          num(s.value.imag()), num(std::abs(s.value)), num(std::arg(s.value) * 180.0 / std::numbers::pi)});
    }
    return t;
}

CsvTable locus_table(const Locus& l) {
    CsvTable t{{"omega_rad_s", "re", "im"}, {}};
    t.rows.reserve(l.samples.size());
    for (const auto& s : l.samples) t.rows.push_back({num(s.omega), num(s.value.real()), num(s.value.imag())});
    return t;
}

CsvTable verdict_header() {
    return {{"pll_bw_hz", "scr", "model", "criterion", "locus", "encirclements", "stable"}, {}};
}

void add_verdict_rows(CsvTable& t, const StabilityVerdict& v, double bw, double scr) {
    if (v.loci.empty()) {
        t.rows.push_back({num(bw), num(scr), v.model, to_string(v.criterion), "-", "0", v.stable ? "1" : "0"});
        return;
    }
    for (std::size_t k = 0; k < v.loci.size(); ++k) {
        t.rows.push_back({num(bw), num(scr), v.model, to_string(v.criterion), v.loci[k].label,
                          std::to_string(v.encirclements[k]), v.stable ? "1" : "0"});
    }
}

void emit(CommandResult& r, const fs::path& path, const CsvTable& t) {
    write_csv(path, t);
    r.files.push_back(path);
}

CommandResult cmd_bode(const Config& cfg) {
    CommandResult r;
    const fs::path out = cfg.output.dir;
    const VscModel m = VscModel::from_setup(cfg.system);
    const auto f = log_space(cfg.analysis.bode_f_min, cfg.analysis.bode_f_max, cfg.analysis.bode_points);
    const double f1 = cfg.system.circuit.f1;
    for (Sequence seq : kSequences) {
        const std::string s = to_string(seq);
        emit(r, out / ("bode_accurate_" + s + ".csv"),
             bode_table(sweep_loop_impedance(SisoModel(m, ModelKind::Accurate, seq), f), seq, f1));
        emit(r, out / ("bode_reduced_" + s + ".csv"),
             bode_table(sweep_loop_impedance(SisoModel(m, ModelKind::Reduced, seq), f), seq, f1));
        emit(r, out / ("bode_mimo_" + s + ".csv"), bode_table(sweep_loop_impedance_matrix_form(m, seq, f), seq, f1));
    }
    r.summary.push_back("bode: " + std::to_string(f.size()) + " points per table");
    return r;
}

CommandResult cmd_nyquist(const Config& cfg) {
    CommandResult r;
    const fs::path out = cfg.output.dir;
    const FrequencyGrid grid = contour_grid(cfg);
    CsvTable verdicts = verdict_header();
    bool unstable = false;
    for (double bw : cfg.analysis.pll_sweep) {
        const VscModel m = VscModel::from_setup(with_pll(cfg.system, bw));
        const StabilityVerdict a = nc_verdict(m, ModelKind::Accurate, grid);
        const StabilityVerdict b = nc_verdict(m, ModelKind::Reduced, grid);
        const StabilityVerdict c = gnc_verdict(m, grid);
        const fs::path dir = cfg.analysis.pll_sweep.size() > 1 ? out / bw_tag(bw) : out;
        for (const StabilityVerdict* v : {&a, &b, &c}) {
            for (const auto& l : v->loci) emit(r, dir / ("nyquist_" + v->model + "_" + l.label + ".csv"), locus_table(l));
            add_verdict_rows(verdicts, *v, bw, cfg.system.circuit.scr);
        }
        unstable = unstable || !c.stable;
        std::ostringstream line;
        line << "pll_bw=" << bw << " Hz: A " << (a.stable ? "stable" : "unstable") << ", B "
             << (b.stable ? "stable" : "unstable") << ", C " << (c.stable ? "stable" : "unstable");
        r.summary.push_back(line.str());
    }
    emit(r, out / "verdicts.csv", verdicts);
    r.exit_code = unstable ? kExitUnstable : 0;
    return r;
}

CommandResult cmd_passivity(const Config& cfg) {
    CommandResult r;
    const fs::path out = cfg.output.dir;
    CsvTable crossings{{"pll_bw_hz", "model", "sequence", "f_res_hz", "re_ohm", "re_sign"}, {}};
    CsvTable verdicts = verdict_header();
    bool unstable = false;
    for (double bw : cfg.analysis.pll_sweep) {
        const VscModel m = VscModel::from_setup(with_pll(cfg.system, bw));
        for (ModelKind kind : {ModelKind::Accurate, ModelKind::Reduced}) {
            const StabilityVerdict v =
                passivity_verdict(m, kind, cfg.analysis.passivity_f_min, cfg.analysis.passivity_f_max);
            add_verdict_rows(verdicts, v, bw, cfg.system.circuit.scr);
            if (kind == ModelKind::Accurate && !v.stable) unstable = true;
            for (Sequence seq : kSequences) {
                for (const auto& c : passivity_crossings(m, kind, seq, cfg.analysis.passivity_f_min,
                                                         cfg.analysis.passivity_f_max)) {
                    crossings.rows.push_back({num(bw), v.model, to_string(seq), num(c.f_res_hz), num(c.re_ohm),
                                              c.positive_re ? "positive" : "negative"});
                    std::ostringstream line;
                    line << "pll_bw=" << bw << " Hz model " << v.model << " " << to_string(seq)
                         << ": crossing at " << c.f_res_hz << " Hz, Re " << (c.positive_re ? "> 0" : "< 0");
                    r.summary.push_back(line.str());
                }
            }
        }
    }
    emit(r, out / "passivity.csv", crossings);
    emit(r, out / "verdicts.csv", verdicts);
    r.exit_code = unstable ? kExitUnstable : 0;
    return r;
}

CommandResult cmd_marginal(const Config& cfg) {
    CommandResult r;
    const MarginalResult m = marginal_pll_search(cfg.system, cfg.analysis.marginal_lo, cfg.analysis.marginal_hi,
                                                 ModelKind::Accurate, contour_grid(cfg), cfg.analysis.passivity_f_max);
    CsvTable t{{"boundary_hz", "stable_hz", "unstable_hz"}, {{num(m.boundary_hz), num(m.stable_hz), num(m.unstable_hz)}}};
    emit(r, fs::path(cfg.output.dir) / "marginal.csv", t);
    CsvTable res{{"sequence", "f_res_hz", "re_ohm"}, {}};
    for (const auto& c : m.positive_resonances) res.rows.push_back({"p", num(c.f_res_hz), num(c.re_ohm)});
    for (const auto& c : m.negative_resonances) res.rows.push_back({"n", num(c.f_res_hz), num(c.re_ohm)});
    emit(r, fs::path(cfg.output.dir) / "marginal_resonances.csv", res);
    std::ostringstream line;
    line << "marginal PLL bandwidth: " << m.boundary_hz << " Hz";
    r.summary.push_back(line.str());
    return r;
}

MeasureOptions measure_options(const Config& cfg) {
    MeasureOptions o;
    o.amplitude_pu = cfg.sim.injection_amplitude;
    o.dt = cfg.sim.dt;
    o.sample_rate = cfg.sim.output_rate;
    o.window_s = cfg.sim.window;
    o.threads = cfg.sim.threads;
    return o;
}

CommandResult cmd_measure(const Config& cfg) {
    CommandResult r;
    const fs::path out = cfg.output.dir;
    const SimParams p = make_sim_params(cfg.system);
    const auto f = frequency_range(cfg.sim.sweep_start, cfg.sim.sweep_stop, cfg.sim.sweep_step);
    CsvTable flags{{"sequence", "f_dq_hz", "skipped", "diverged", "stationary", "coherent", "ill_conditioned"}, {}};
    bool diverged = false;
    for (Sequence seq : kSequences) {
        const auto meas = impedance_sweep(p, f, seq, measure_options(cfg));
        std::vector<ImpedanceSample> rows;
        for (const auto& m : meas) {
            flags.rows.push_back({to_string(seq), num(m.f_dq_hz), m.skipped ? "1" : "0", m.diverged ? "1" : "0",
                                  m.stationary ? "1" : "0", m.coherent ? "1" : "0", m.ill_conditioned ? "1" : "0"});
            diverged = diverged || m.diverged;
            if (m.usable()) rows.push_back({m.f_dq_hz, m.z_loop, false});
        }
        emit(r, out / (std::string("bode_measured_") + to_string(seq) + ".csv"), bode_table(rows, seq, p.circuit.f1));
        r.summary.push_back(std::string("measure ") + to_string(seq) + ": " + std::to_string(rows.size()) + " of " +
                            std::to_string(meas.size()) + " points usable");
    }
    emit(r, out / "measure_flags.csv", flags);
    r.exit_code = diverged ? kExitUnstable : 0;
    return r;
}

CommandResult cmd_simulate(const Config& cfg) {
    CommandResult r;
    const fs::path out = cfg.output.dir;
    const SimParams p = make_sim_params(cfg.system);
    Scenario sc;
    sc.duration = cfg.sim.duration;
    sc.dt = cfg.sim.dt;
    sc.output_rate = cfg.sim.output_rate;
    sc.events = cfg.sim.events;
    const Timeseries ts = integrate(p, sc, initial_state(p));

    CsvTable t{{"t_s", "ia", "ib", "ic", "id", "iq", "theta_pll"}, {}};
    std::vector<double> ia;
    ia.reserve(ts.samples.size());
    for (const auto& s : ts.samples) {
        const auto abc = phase_currents(s.i_ab);
        ia.push_back(abc[0]);
        t.rows.push_back({num(s.t), num(abc[0]), num(abc[1]), num(abc[2]), num(s.i_dq.real()), num(s.i_dq.imag()),
                          num(s.theta_pll)});
    }
    emit(r, out / "timeseries.csv", t);

    const double span = ts.samples.empty() ? 0.0 : static_cast<double>(ts.samples.size() - 1) / cfg.sim.output_rate;
    if (span >= cfg.sim.spectrum_window) {
        const Spectrum spec = spectrum_report(ia, cfg.sim.output_rate, cfg.sim.spectrum_window, p.circuit.f1);
        CsvTable st{{"f_hz", "magnitude"}, {}};
        for (std::size_t k = 0; k < spec.f_hz.size(); ++k) st.rows.push_back({num(spec.f_hz[k]), num(spec.magnitude[k])});
        emit(r, out / "spectrum.csv", st);
        for (const auto& pk : spec.peaks) {
            std::ostringstream line;
            line << "spectrum peak " << pk.f_hz << " Hz, amplitude " << pk.magnitude << " A";
            r.summary.push_back(line.str());
        }
    }
    if (ts.diverged) {
        std::ostringstream line;
        line << "diverged at t=" << ts.divergence_time << " s";
        r.summary.push_back(line.str());
        r.exit_code = kExitUnstable;
    } else {
        r.summary.push_back("bounded over " + num(cfg.sim.duration) + " s");
    }
    return r;
}

CommandResult cmd_verify(const Config& cfg) {
    CommandResult r;
    CsvTable t{{"check", "max_error", "tolerance", "passed"}, {}};
    bool ok = true;
    for (const auto& c : run_identity_suite(cfg)) {
        t.rows.push_back({c.name, num(c.max_error), num(c.tolerance), c.passed ? "1" : "0"});
        r.summary.push_back(std::string(c.passed ? "PASS " : "FAIL ") + c.name + " (max error " + num(c.max_error) + ")");
        ok = ok && c.passed;
    }
    emit(r, fs::path(cfg.output.dir) / "verify.csv", t);
    r.exit_code = ok ? 0 : 1;
    return r;
}

IdentityCheck check(std::string name, double err, double tol) { return {std::move(name), err, tol, err <= tol}; }

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"bode", "nyquist", "passivity", "marginal", "measure", "simulate", "verify"};
    return names;
}

CommandResult run_command(const std::string& command, const Config& cfg) {
    if (command == "bode") return cmd_bode(cfg);
    if (command == "nyquist") return cmd_nyquist(cfg);
    if (command == "passivity") return cmd_passivity(cfg);
    if (command == "marginal") return cmd_marginal(cfg);
    if (command == "measure") return cmd_measure(cfg);
    if (command == "simulate") return cmd_simulate(cfg);
    if (command == "verify") return cmd_verify(cfg);
    throw UsageError("unknown command '" + command + "'");
}

std::vector<IdentityCheck> run_identity_suite(const Config& cfg) {
    std::vector<IdentityCheck> checks;
    const VscModel m = VscModel::from_setup(cfg.system);
    const double w1 = m.omega1();

    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> logf(-1.0, 3.0);
    std::uniform_real_distribution<double> sigma(-20.0, 20.0);
    std::bernoulli_distribution flip(0.5);
    std::vector<cplx> pts;
    for (int k = 0; k < 500; ++k) {
        const double w = kTwoPi * std::pow(10.0, logf(rng)) * (flip(rng) ? -1.0 : 1.0);
        pts.emplace_back(k % 2 == 0 ? 0.0 : sigma(rng), w);
    }

    double e = 0.0;
    for (double f : log_space(0.1, 1.0e4, 2000)) {
        const cplx s{0.0, kTwoPi * f};
        for (Sequence seq : kSequences) {
            e = std::max(e, rel(loop_impedance_matrix_form(m, s, seq), loop_impedance_accurate(m, s, seq)));
        }
    }
    checks.push_back(check("matrix_form_equals_closed_form", e, 1e-10));

    e = 0.0;
    for (cplx s : pts) {
        const SeqMatrix y = m.load_admittance_pn(s);
        const SeqMatrix yc = m.load_admittance_pn(std::conj(s));
        e = std::max({e, rel(y.nn, std::conj(yc.pp)), rel(y.np, std::conj(yc.pn))});
    }
    checks.push_back(check("load_admittance_coefficient_conjugate", e, 1e-12));

    e = 0.0;
    for (cplx s : pts) e = std::max(e, max_rel_diff(dq_to_modified_sequence(m.dq_load_admittance(s)), m.load_admittance_pn(s)));
    checks.push_back(check("dq_to_sequence_transform", e, 1e-10));

    e = 0.0;
    {
        const VscModel frozen = VscModel::from_setup(with_pll(cfg.system, 0.0));
        for (double f : log_space(0.1, 1.0e4, 2000)) {
            const cplx s{0.0, kTwoPi * f};
            for (Sequence seq : kSequences) {
                e = std::max(e, rel(loop_impedance_accurate(frozen, s, seq), loop_impedance_reduced(frozen, s, seq)));
            }
        }
    }
    checks.push_back(check("frozen_pll_accurate_equals_reduced", e, 1e-14));

    e = 0.0;
    {
        const SeqEvaluator y = [&](cplx s) { return m.load_admittance_pn(s); };
        const SeqEvaluator back = from_phase_domain_notation(to_phase_domain_notation(y, w1), w1);
        for (cplx s : pts) e = std::max(e, max_rel_diff(back(s), y(s)));
    }
    checks.push_back(check("phase_domain_notation_round_trip", e, 1e-12));

    e = 0.0;
    {
        const SeqEvaluator z = [&](cplx s) { return m.load_impedance_pn(s); };
        for (cplx s : pts) {
            const SeqMatrix zs = z(s);
            const SeqMatrix zc = z(std::conj(s));
            e = std::max({e, rel(std::conj(zc.np), zs.pn), rel(std::conj(zc.pp), zs.nn)});
            const SeqMatrix cv = to_complex_vector_form(z, s, w1);
            const SeqMatrix mirror = z(std::conj(s) + cplx{0.0, w1});
            e = std::max({e, rel(cv.pn, mirror.pn), rel(cv.nn, mirror.nn)});
        }
    }
    checks.push_back(check("complex_vector_form_structure", e, 1e-12));

    e = 0.0;
    for (double f : log_space(0.1, 1.0e4, 200)) {
        for (ModelKind kind : {ModelKind::Accurate, ModelKind::Reduced}) {
            const cplx zn = loop_impedance(m, {0.0, kTwoPi * f}, kind, Sequence::Negative);
            const cplx zp = loop_impedance(m, {0.0, -kTwoPi * f}, kind, Sequence::Positive);
            e = std::max(e, rel(zn, std::conj(zp)));
        }
    }
    checks.push_back(check("loop_impedance_conjugate_symmetry", e, 1e-10));

    {
        const FrequencyGrid g = contour_grid(cfg);
        int changed = 0;
        for (ModelKind kind : {ModelKind::Accurate, ModelKind::Reduced}) {
            if (nc_verdict(m, kind, g).encirclements != nc_verdict(m, kind, g.doubled()).encirclements) ++changed;
        }
        if (gnc_verdict(m, g).encirclements != gnc_verdict(m, g.doubled()).encirclements) ++changed;
        checks.push_back(check("encirclements_stable_under_grid_doubling", changed, 0.0));
    }
    return checks;
}

}  // namespace seqimp
