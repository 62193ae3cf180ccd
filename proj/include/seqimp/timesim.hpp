#pragma once

#include "seqimp/params.hpp"
#include "seqimp/siso.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace seqimp {

/// Averaged plant states in the stationary frame. Currents are
/// amplitude-invariant alpha-beta vectors (i_a = Re(i_ab)).
struct SimState {
    cplx i_ab;
    double theta_pll = 0.0;
    /// PLL integrator output, rad/s.
    double x_pll = 0.0;
    /// Current PI integrator, d + jq in the PLL frame, V.
    cplx x_cc;
    double t = 0.0;
};

/// Series tone injected between grid EMF and PCC.
struct Injection {
    Sequence sequence = Sequence::Positive;
    double f_dq_hz = 10.0;
    double amplitude_pu = 0.01;
    double start_s = 0.0;
};

/// Step change of a controller bandwidth; key is "pll_bw" or "cc_bw".
struct SimEvent {
    double t_s;
    std::string key;
    double value;
};

struct Scenario {
    double duration = 1.0;
    double dt = 20e-6;
    double output_rate = 1000.0;
    std::vector<SimEvent> events;
    std::optional<Injection> injection;
};

struct OutputSample {
    double t;
    cplx i_ab;
    /// Current in the PLL frame.
    cplx i_dq;
    double theta_pll;
    cplx u_pcc_ab;
    cplx u_inj_ab;
};

struct Timeseries {
    std::vector<OutputSample> samples;
    bool diverged = false;
    double divergence_time = 0.0;
};

/// Everything the right-hand side needs; mutable only through events.
struct SimParams {
    CircuitParams circuit;
    ControllerParams controllers;
    OperatingPoint op;
    double pll_v0;
    /// Grid EMF phase peak, V.
    double e_peak;
    bool decoupling = false;
};

SimParams make_sim_params(const SystemSetup& setup);

/// State at the solved operating point: PLL aligned with the PCC voltage,
/// integrators holding the steady control voltage.
SimState initial_state(const SimParams& p);

/// Injected alpha-beta voltage at t (zero before the start time).
cplx injection_voltage(const SimParams& p, const Injection* inj, double t);

SimState derivative(const SimState& x, const SimParams& p, const Injection* inj);

/// PCC voltage for a state; needs the current derivative since the grid is inductive.
cplx pcc_voltage(const SimState& x, const SimParams& p, const Injection* inj);

/// Apply one bandwidth event (retunes the corresponding gains).
void apply_event(SimParams& p, const SimEvent& ev);

/// Fixed-step RK4. Events fire at the first step boundary at or after their
/// time stamp. Divergence (|i| or |x_cc| beyond 1e6 p.u., or non-finite)
/// stops the run and sets the flag.
Timeseries integrate(const SimParams& params, const Scenario& scenario, SimState initial);

struct PhasorEstimate {
    cplx value;
    /// False when the window does not hold an integer number of cycles.
    bool coherent = true;
};

/// Single-bin projection over the last round(window*fs) samples.
/// Complex series: (1/N) sum x e^{-j 2 pi f t}, so A e^{j(2 pi f t + phi)} -> A e^{j phi}.
PhasorEstimate fft_phasor(const std::vector<cplx>& x, double f_hz, double fs_hz, double window_s);
/// Real series: (2/N) sum x e^{-j 2 pi f t}, so A cos(2 pi f t + phi) -> A e^{j phi}.
PhasorEstimate fft_phasor(const std::vector<double>& x, double f_hz, double fs_hz, double window_s);

/// Phase-domain (stationary-frame) frequency of a sequence tone at f_dq.
/// Negative sequence appears at f1 - f_dq as a conjugated rotating vector.
double phase_frequency(Sequence seq, double f_dq_hz, double f1_hz);

struct MeasureOptions {
    double amplitude_pu = 0.01;
    double dt = 20e-6;
    double sample_rate = 1000.0;
    double window_s = 0.5;
    double settle_min_s = 0.5;
    /// Relative change allowed between the two last windows.
    double stationarity_tol = 0.005;
    /// Worker threads for sweeps; 0 uses the hardware concurrency.
    unsigned threads = 0;
};

struct PhasorMeasurement {
    double f_dq_hz = 0.0;
    Sequence sequence = Sequence::Positive;
    cplx u_inj;
    cplx i_resp;
    cplx z_loop;
    /// Phase-domain frequency is 0 or a multiple of f1; no run was made.
    bool skipped = false;
    bool diverged = false;
    bool stationary = true;
    bool coherent = true;
    /// Current response below 1e-9 of the injected voltage scale.
    bool ill_conditioned = false;

    bool usable() const { return !skipped && !diverged && !ill_conditioned; }
};

/// Settling time before the measurement windows: max(5/(2 pi pll_bw), settle_min).
double settle_time(const SimParams& p, const MeasureOptions& opt);

PhasorMeasurement inject_and_measure(const SimParams& p, Sequence seq, double f_dq_hz,
                                     const MeasureOptions& opt = {});

/// One independent run per frequency, executed in parallel.
std::vector<PhasorMeasurement> impedance_sweep(const SimParams& p, const std::vector<double>& f_dq_hz, Sequence seq,
                                               const MeasureOptions& opt = {});

/// f_start, f_start + step, ... up to f_stop inclusive (within 1e-9).
std::vector<double> frequency_range(double f_start_hz, double f_stop_hz, double step_hz);

struct SpectralPeak {
    double f_hz;
    double magnitude;
};

struct Spectrum {
    std::vector<double> f_hz;
    /// Single-sided amplitude: a cosine of amplitude A shows as A.
    std::vector<double> magnitude;
    std::vector<SpectralPeak> peaks;
};

/// Rectangular-window DFT of the last `window_s` of x. Peaks are local maxima
/// sorted by magnitude, excluding DC and bins within `exclude_hz` of f1.
Spectrum spectrum_report(const std::vector<double>& x, double fs_hz, double window_s, double f1_hz, int top_k = 4,
                         double exclude_hz = 2.0);

/// Peak deviation of |i_dq - i_ref| over [t0, t1), in A.
double dq_deviation(const Timeseries& ts, cplx i_ref, double t0, double t1);

/// Phase currents of a sample.
std::array<double, 3> phase_currents(cplx i_ab);

}  // namespace seqimp
