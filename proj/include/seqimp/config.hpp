#pragma once

#include "seqimp/params.hpp"
#include "seqimp/timesim.hpp"

#include <string>
#include <vector>

namespace seqimp {

struct AnalysisConfig {
    /// Nyquist contour grid.
    double f_min = 0.01;
    double f_max = 1.0e4;
    int points = 2000;
    /// Bode tables (dq frame, log-spaced).
    double bode_f_min = 0.1;
    double bode_f_max = 1000.0;
    int bode_points = 500;
    /// PLL bandwidths visited by `nyquist` and `passivity`.
    std::vector<double> pll_sweep{5.0, 50.0, 100.0};
    double passivity_f_min = 0.1;
    double passivity_f_max = 200.0;
    double marginal_lo = 5.0;
    double marginal_hi = 50.0;
};

struct SimConfig {
    double dt = 20e-6;
    double duration = 8.0;
    double output_rate = 1000.0;
    double injection_amplitude = 0.01;
    std::vector<SimEvent> events{{2.0, "pll_bw", 20.0}};
    double window = 0.5;
    double spectrum_window = 1.0;
    double sweep_start = 2.0;
    double sweep_stop = 98.0;
    double sweep_step = 2.0;
    unsigned threads = 0;
};

struct OutputConfig {
    std::string dir = "out";
    std::vector<std::string> formats{"csv"};
};

struct Config {
    SystemSetup system;
    AnalysisConfig analysis;
    SimConfig sim;
    OutputConfig output;
};

/// Parse `section.key = value` lines. '#' starts a comment; blank lines are
/// ignored. Errors name the key, the line and the violated constraint.
Config parse_config_text(const std::string& text, const std::string& origin = "<config>");

Config parse_config(const std::string& path);

/// Apply one `section.key=value` override on top of cfg and re-validate.
void apply_override(Config& cfg, const std::string& assignment);

/// Cross-field checks plus a trial solve of the operating point.
void validate(const Config& cfg);

/// Every accepted key, in file order.
const std::vector<std::string>& config_keys();

/// "a", "a+bj", "a-bj", "bj" with optional spaces.
cplx parse_complex(const std::string& text);

}  // namespace seqimp
