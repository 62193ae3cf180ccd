#include "seqimp/timesim.hpp"

#include "seqimp/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

namespace seqimp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

SimState axpy(const SimState& x, double h, const SimState& d) {
    SimState y;
    y.i_ab = x.i_ab + h * d.i_ab;
    y.theta_pll = x.theta_pll + h * d.theta_pll;
    y.x_pll = x.x_pll + h * d.x_pll;
    y.x_cc = x.x_cc + h * d.x_cc;
    y.t = x.t + h * d.t;
    return y;
}

struct Rates {
    cplx di;
    cplx u_pcc;
    SimState d;
};

Rates evaluate(const SimState& x, const SimParams& p, const Injection* inj) {
    const CircuitParams& c = p.circuit;
    const ControllerParams& k = p.controllers;
    const cplx rot = std::polar(1.0, x.theta_pll);
    const cplx e = std::polar(p.e_peak, c.omega1 * x.t);
    const cplx u_inj = injection_voltage(p, inj, x.t);

    const cplx i_c = x.i_ab * std::conj(rot);
    const cplx err = p.op.i_c0 - i_c;
    cplx u_c = k.kp_cc * err + x.x_cc;
    if (p.decoupling) u_c += cplx{0.0, c.omega1 * c.lf} * i_c;

    Rates r;
    r.di = (u_c * rot - e - u_inj - (c.rf + c.rs) * x.i_ab) / (c.lf + c.ls);
    r.u_pcc = e + u_inj + c.rs * x.i_ab + c.ls * r.di;
    const double uq = (r.u_pcc * std::conj(rot)).imag();

    r.d.i_ab = r.di;
    r.d.theta_pll = c.omega1 + k.kp_pll * uq + x.x_pll;
    r.d.x_pll = k.ki_pll * uq;
    r.d.x_cc = k.ki_cc * err;
    r.d.t = 1.0;
    return r;
}

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

OutputSample sample_of(const SimState& x, const SimParams& p, const Injection* inj) {
    OutputSample s;
    s.t = x.t;
    s.i_ab = x.i_ab;
    s.i_dq = x.i_ab * std::polar(1.0, -x.theta_pll);
    s.theta_pll = x.theta_pll;
    s.u_pcc_ab = evaluate(x, p, inj).u_pcc;
    s.u_inj_ab = injection_voltage(p, inj, x.t);
    return s;
}

bool is_multiple_of(double f, double base) {
    const double r = f / base;
    return std::abs(r - std::round(r)) < 1e-9;
}

bool window_coherent(double f_hz, double window_s) {
    const double cycles = f_hz * window_s;
    return std::abs(cycles - std::round(cycles)) < 1e-9;
}

std::size_t window_length(std::size_t available, double fs_hz, double window_s) {
    if (!(fs_hz > 0.0) || !(window_s > 0.0)) throw UsageError("sample rate and window must be > 0");
    const auto n = static_cast<std::size_t>(std::llround(window_s * fs_hz));
    if (n == 0 || n > available) throw UsageError("series shorter than the requested window");
    return n;
}

}  // namespace

SimParams make_sim_params(const SystemSetup& setup) {
    const SolvedSystem sys = solve_system(setup);
    SimParams p{sys.circuit, sys.controllers, sys.op, sys.pll_v0, setup.e_grid_pu * sys.circuit.v_base_peak(),
                setup.decoupling};
    return p;
}

SimState initial_state(const SimParams& p) {
    SimState x;
    x.t = 0.0;
    x.theta_pll = p.op.theta0;
    x.i_ab = p.op.i_c0 * std::polar(1.0, p.op.theta0);
    x.x_pll = 0.0;
    x.x_cc = p.op.v_c0;
    if (p.decoupling) x.x_cc -= cplx{0.0, p.circuit.omega1 * p.circuit.lf} * p.op.i_c0;
    return x;
}

double phase_frequency(Sequence seq, double f_dq_hz, double f1_hz) {
    return seq == Sequence::Positive ? f1_hz + f_dq_hz : f1_hz - f_dq_hz;
}

cplx injection_voltage(const SimParams& p, const Injection* inj, double t) {
    if (inj == nullptr || t < inj->start_s) return {};
    const double f = phase_frequency(inj->sequence, inj->f_dq_hz, p.circuit.f1);
    return std::polar(inj->amplitude_pu * p.circuit.v_base_peak(), kTwoPi * f * t);
}

SimState derivative(const SimState& x, const SimParams& p, const Injection* inj) { return evaluate(x, p, inj).d; }

cplx pcc_voltage(const SimState& x, const SimParams& p, const Injection* inj) { return evaluate(x, p, inj).u_pcc; }

void apply_event(SimParams& p, const SimEvent& ev) {
    if (ev.key == "pll_bw") {
        p.controllers = tune_controllers(p.controllers.cc_bw, ev.value, p.circuit, p.pll_v0);
    } else if (ev.key == "cc_bw") {
        p.controllers = tune_controllers(ev.value, p.controllers.pll_bw, p.circuit, p.pll_v0);
    } else {
        throw UsageError("unknown simulation event key: " + ev.key);
    }
}

Timeseries integrate(const SimParams& params, const Scenario& sc, SimState x) {
    if (!(sc.dt > 0.0)) throw UsageError("dt must be > 0");
    if (!(sc.duration >= 0.0)) throw UsageError("duration must be >= 0");
    if (!(sc.output_rate > 0.0)) throw UsageError("output rate must be > 0");
    for (std::size_t k = 1; k < sc.events.size(); ++k) {
        if (sc.events[k].t_s < sc.events[k - 1].t_s) throw UsageError("events must be time-ordered");
    }

    SimParams p = params;
    const Injection* inj = sc.injection ? &*sc.injection : nullptr;
    const auto steps = static_cast<long long>(std::llround(sc.duration / sc.dt));
    const auto every = std::max(1LL, static_cast<long long>(std::llround(1.0 / (sc.output_rate * sc.dt))));
    const double i_lim = 1e6 * p.circuit.i_base_peak();
    const double v_lim = 1e6 * p.circuit.v_base_peak();
    const double t0 = x.t;

    Timeseries ts;
    ts.samples.reserve(static_cast<std::size_t>(steps / every + 2));
    std::size_t next_event = 0;

    for (long long n = 0;; ++n) {
        x.t = t0 + static_cast<double>(n) * sc.dt;
        while (next_event < sc.events.size() && sc.events[next_event].t_s <= x.t + 1e-12) {
            apply_event(p, sc.events[next_event++]);
        }
        if (n % every == 0) ts.samples.push_back(sample_of(x, p, inj));
        if (n == steps) break;

        const double h = sc.dt;
        const SimState k1 = derivative(x, p, inj);
        const SimState k2 = derivative(axpy(x, 0.5 * h, k1), p, inj);
        const SimState k3 = derivative(axpy(x, 0.5 * h, k2), p, inj);
        const SimState k4 = derivative(axpy(x, h, k3), p, inj);
        x.i_ab += h / 6.0 * (k1.i_ab + 2.0 * k2.i_ab + 2.0 * k3.i_ab + k4.i_ab);
        x.theta_pll += h / 6.0 * (k1.theta_pll + 2.0 * k2.theta_pll + 2.0 * k3.theta_pll + k4.theta_pll);
        x.x_pll += h / 6.0 * (k1.x_pll + 2.0 * k2.x_pll + 2.0 * k3.x_pll + k4.x_pll);
        x.x_cc += h / 6.0 * (k1.x_cc + 2.0 * k2.x_cc + 2.0 * k3.x_cc + k4.x_cc);
        x.theta_pll = std::fmod(x.theta_pll, kTwoPi);
        if (x.theta_pll < 0.0) x.theta_pll += kTwoPi;

        if (!finite(x.i_ab) || !finite(x.x_cc) || !std::isfinite(x.theta_pll) || !std::isfinite(x.x_pll) ||
            std::abs(x.i_ab) > i_lim || std::abs(x.x_cc) > v_lim) {
            ts.diverged = true;
            ts.divergence_time = t0 + static_cast<double>(n + 1) * sc.dt;
            break;
        }
    }
    return ts;
}

PhasorEstimate fft_phasor(const std::vector<cplx>& x, double f_hz, double fs_hz, double window_s) {
    const std::size_t n = window_length(x.size(), fs_hz, window_s);
    const std::size_t off = x.size() - n;
    cplx acc{};
    for (std::size_t k = 0; k < n; ++k) {
        acc += x[off + k] * std::polar(1.0, -kTwoPi * f_hz * static_cast<double>(k) / fs_hz);
    }
    return {acc / static_cast<double>(n), window_coherent(f_hz, static_cast<double>(n) / fs_hz)};
}

PhasorEstimate fft_phasor(const std::vector<double>& x, double f_hz, double fs_hz, double window_s) {
    const std::size_t n = window_length(x.size(), fs_hz, window_s);
    const std::size_t off = x.size() - n;
    cplx acc{};
    for (std::size_t k = 0; k < n; ++k) {
        acc += x[off + k] * std::polar(1.0, -kTwoPi * f_hz * static_cast<double>(k) / fs_hz);
    }
    return {2.0 * acc / static_cast<double>(n), window_coherent(f_hz, static_cast<double>(n) / fs_hz)};
}

double settle_time(const SimParams& p, const MeasureOptions& opt) {
    const double bw = p.controllers.pll_bw;
    const double pll = bw > 0.0 ? 5.0 / (kTwoPi * bw) : 0.0;
    return std::max(pll, opt.settle_min_s);
}

PhasorMeasurement inject_and_measure(const SimParams& p, Sequence seq, double f_dq_hz, const MeasureOptions& opt) {
    PhasorMeasurement m;
    m.f_dq_hz = f_dq_hz;
    m.sequence = seq;
    const double f1 = p.circuit.f1;
    const double f_phase = phase_frequency(seq, f_dq_hz, f1);
    if (std::abs(f_phase) < 1e-9 || is_multiple_of(f_phase, f1)) {
        m.skipped = true;
        return m;
    }

    Scenario sc;
    sc.dt = opt.dt;
    sc.output_rate = opt.sample_rate;
    sc.duration = settle_time(p, opt) + 2.0 * opt.window_s;
    sc.injection = Injection{seq, f_dq_hz, opt.amplitude_pu, 0.0};
    const Timeseries ts = integrate(p, sc, initial_state(p));
    if (ts.diverged) {
        m.diverged = true;
        return m;
    }

    // Last sample closes the final window; drop it so both windows hold
    // exactly window*fs samples.
    const std::size_t w = static_cast<std::size_t>(std::llround(opt.window_s * opt.sample_rate));
    if (ts.samples.size() < 2 * w + 1) throw UsageError("run too short for two measurement windows");
    std::vector<cplx> u, i;
    u.reserve(2 * w);
    i.reserve(2 * w);
    for (std::size_t k = ts.samples.size() - 1 - 2 * w; k + 1 < ts.samples.size(); ++k) {
        u.push_back(ts.samples[k].u_inj_ab);
        i.push_back(ts.samples[k].i_ab);
    }

    auto z_of = [&](const PhasorEstimate& pu, const PhasorEstimate& pi) {
        const cplx z = -pu.value / pi.value;
        return seq == Sequence::Positive ? z : std::conj(z);
    };
    const std::vector<cplx> u1(u.begin(), u.begin() + static_cast<long>(w));
    const std::vector<cplx> i1(i.begin(), i.begin() + static_cast<long>(w));
    const PhasorEstimate pu1 = fft_phasor(u1, f_phase, opt.sample_rate, opt.window_s);
    const PhasorEstimate pi1 = fft_phasor(i1, f_phase, opt.sample_rate, opt.window_s);
    const PhasorEstimate pu2 = fft_phasor(u, f_phase, opt.sample_rate, opt.window_s);
    const PhasorEstimate pi2 = fft_phasor(i, f_phase, opt.sample_rate, opt.window_s);

    m.coherent = pu2.coherent;
    if (std::abs(pi2.value) * p.circuit.z_base() < 1e-9 * std::abs(pu2.value)) {
        m.ill_conditioned = true;
        return m;
    }
    // Window 1 starts a whole number of samples earlier; its phase reference
    // differs but the ratio does not.
    const cplx z1 = z_of(pu1, pi1);
    m.z_loop = z_of(pu2, pi2);
    m.stationary = std::abs(m.z_loop - z1) <= opt.stationarity_tol * std::abs(m.z_loop);
    m.u_inj = seq == Sequence::Positive ? pu2.value : std::conj(pu2.value);
    m.i_resp = seq == Sequence::Positive ? pi2.value : std::conj(pi2.value);
    return m;
}

std::vector<PhasorMeasurement> impedance_sweep(const SimParams& p, const std::vector<double>& f_dq_hz, Sequence seq,
                                               const MeasureOptions& opt) {
    std::vector<PhasorMeasurement> out(f_dq_hz.size());
    if (f_dq_hz.empty()) return out;
    unsigned workers = opt.threads != 0 ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(f_dq_hz.size()));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t k = next++; k < f_dq_hz.size(); k = next++) {
            try {
                out[k] = inject_and_measure(p, seq, f_dq_hz[k], opt);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

std::vector<double> frequency_range(double f_start_hz, double f_stop_hz, double step_hz) {
    if (!(step_hz > 0.0)) throw UsageError("frequency step must be > 0");
    std::vector<double> f;
    for (long k = 0;; ++k) {
        const double fk = f_start_hz + static_cast<double>(k) * step_hz;
        if (fk > f_stop_hz + 1e-9) break;
        f.push_back(fk);
    }
    return f;
}

Spectrum spectrum_report(const std::vector<double>& x, double fs_hz, double window_s, double f1_hz, int top_k,
                         double exclude_hz) {
    const std::size_t n = window_length(x.size(), fs_hz, window_s);
    const std::size_t off = x.size() - n;
    std::vector<cplx> twiddle(n);
    for (std::size_t k = 0; k < n; ++k) {
        twiddle[k] = std::polar(1.0, -kTwoPi * static_cast<double>(k) / static_cast<double>(n));
    }

    Spectrum s;
    const std::size_t bins = n / 2 + 1;
    s.f_hz.resize(bins);
    s.magnitude.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        cplx acc{};
        for (std::size_t j = 0; j < n; ++j) acc += x[off + j] * twiddle[(k * j) % n];
        const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
        s.f_hz[k] = static_cast<double>(k) * fs_hz / static_cast<double>(n);
        s.magnitude[k] = (edge ? 1.0 : 2.0) * std::abs(acc) / static_cast<double>(n);
    }

    for (std::size_t k = 1; k < bins; ++k) {
        if (std::abs(s.f_hz[k] - f1_hz) < exclude_hz) continue;
        const double left = s.magnitude[k - 1];
        const double right = k + 1 < bins ? s.magnitude[k + 1] : 0.0;
        if (s.magnitude[k] > left && s.magnitude[k] >= right) s.peaks.push_back({s.f_hz[k], s.magnitude[k]});
    }
    std::stable_sort(s.peaks.begin(), s.peaks.end(),
                     [](const SpectralPeak& a, const SpectralPeak& b) { return a.magnitude > b.magnitude; });
    if (top_k >= 0 && s.peaks.size() > static_cast<std::size_t>(top_k)) s.peaks.resize(static_cast<std::size_t>(top_k));
    return s;
}

double dq_deviation(const Timeseries& ts, cplx i_ref, double t0, double t1) {
    double dev = 0.0;
    for (const auto& s : ts.samples) {
        if (s.t >= t0 && s.t < t1) dev = std::max(dev, std::abs(s.i_dq - i_ref));
    }
    return dev;
}

std::array<double, 3> phase_currents(cplx i_ab) {
    const cplx a = std::polar(1.0, kTwoPi / 3.0);
    return {i_ab.real(), (i_ab * std::conj(a)).real(), (i_ab * a).real()};
}

}  // namespace seqimp
