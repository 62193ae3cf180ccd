#include "seqimp/config.hpp"

#include "seqimp/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace seqimp {

namespace {

// Thrown by setters; converted to ConfigError with key and line attached.
struct Constraint {
    std::string what;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    if (!t.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (t.empty() || ec != std::errc() || ptr != last) throw Constraint{"expected a number, got '" + t + "'"};
    return v;
}

double positive(const std::string& text) {
    const double v = parse_double(text);
    if (!(v > 0.0)) throw Constraint{"must be > 0 (got " + trim(text) + ")"};
    return v;
}

double non_negative(const std::string& text) {
    const double v = parse_double(text);
    if (!(v >= 0.0)) throw Constraint{"must be >= 0 (got " + trim(text) + ")"};
    return v;
}

double finite_positive(const std::string& text) {
    const double v = positive(text);
    if (!std::isfinite(v)) throw Constraint{"must be finite"};
    return v;
}

int count(const std::string& text, int min) {
    const double v = parse_double(text);
    if (v != std::floor(v) || v < min || v > 1e8) {
        throw Constraint{"must be an integer >= " + std::to_string(min) + " (got " + trim(text) + ")"};
    }
    return static_cast<int>(v);
}

bool parse_bool(const std::string& text) {
    std::string t = trim(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "true" || t == "1" || t == "on" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "off" || t == "no") return false;
    throw Constraint{"expected true or false, got '" + trim(text) + "'"};
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
    return parts;
}

std::vector<double> positive_list(const std::string& text) {
    std::vector<double> v;
    for (const auto& p : split(text, ',')) {
        if (p.empty()) continue;
        v.push_back(non_negative(p));
    }
    if (v.empty()) throw Constraint{"must list at least one value"};
    return v;
}

std::vector<SimEvent> parse_events(const std::string& text) {
    std::vector<SimEvent> ev;
    const std::string t = trim(text);
    if (t.empty() || t == "none") return ev;
    for (const auto& item : split(t, ';')) {
        if (item.empty()) continue;
        const auto colon = item.find(':');
        const auto eq = item.find('=');
        if (colon == std::string::npos || eq == std::string::npos || eq < colon) {
            throw Constraint{"event '" + item + "' must look like <t>:<pll_bw|cc_bw>=<value>"};
        }
        SimEvent e{non_negative(item.substr(0, colon)), trim(item.substr(colon + 1, eq - colon - 1)),
                   non_negative(item.substr(eq + 1))};
        if (e.key != "pll_bw" && e.key != "cc_bw") throw Constraint{"event key must be pll_bw or cc_bw"};
        if (!ev.empty() && e.t_s < ev.back().t_s) throw Constraint{"events must be time-ordered"};
        ev.push_back(e);
    }
    return ev;
}

using Setter = std::function<void(Config&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
    static const std::vector<std::pair<std::string, Setter>> table = {
        {"circuit.s_base", [](Config& c, const std::string& v) { c.system.circuit.s_base = finite_positive(v); }},
        {"circuit.v_base", [](Config& c, const std::string& v) { c.system.circuit.v_base = finite_positive(v); }},
        {"circuit.f1", [](Config& c, const std::string& v) { c.system.circuit.f1 = finite_positive(v); }},
        {"circuit.zf_r",
         [](Config& c, const std::string& v) { c.system.circuit.zf_pu.real(finite_positive(v)); }},
        {"circuit.zf_x",
         [](Config& c, const std::string& v) { c.system.circuit.zf_pu.imag(finite_positive(v)); }},
        {"circuit.scr", [](Config& c, const std::string& v) { c.system.circuit.scr = positive(v); }},
        {"circuit.xr_ratio", [](Config& c, const std::string& v) { c.system.circuit.xr_ratio = finite_positive(v); }},
        {"circuit.e_grid", [](Config& c, const std::string& v) { c.system.e_grid_pu = finite_positive(v); }},
        {"control.cc_bw", [](Config& c, const std::string& v) { c.system.cc_bw = finite_positive(v); }},
        {"control.pll_bw", [](Config& c, const std::string& v) { c.system.pll_bw = non_negative(v); }},
        {"control.i_ref",
         [](Config& c, const std::string& v) {
             try {
                 c.system.i_ref_pu = parse_complex(v);
             } catch (const std::invalid_argument& e) {
                 throw Constraint{e.what()};
             }
         }},
        {"control.pll_v0",
         [](Config& c, const std::string& v) {
             const std::string t = trim(v);
             if (t == "solved") c.system.pll_nominal_v0 = false;
             else if (t == "nominal") c.system.pll_nominal_v0 = true;
             else throw Constraint{"must be 'solved' or 'nominal'"};
         }},
        {"control.decoupling", [](Config& c, const std::string& v) { c.system.decoupling = parse_bool(v); }},
        {"analysis.f_min", [](Config& c, const std::string& v) { c.analysis.f_min = finite_positive(v); }},
        {"analysis.f_max", [](Config& c, const std::string& v) { c.analysis.f_max = finite_positive(v); }},
        {"analysis.points", [](Config& c, const std::string& v) { c.analysis.points = count(v, 2); }},
        {"analysis.bode_f_min", [](Config& c, const std::string& v) { c.analysis.bode_f_min = finite_positive(v); }},
        {"analysis.bode_f_max", [](Config& c, const std::string& v) { c.analysis.bode_f_max = finite_positive(v); }},
        {"analysis.bode_points", [](Config& c, const std::string& v) { c.analysis.bode_points = count(v, 2); }},
        {"analysis.pll_sweep", [](Config& c, const std::string& v) { c.analysis.pll_sweep = positive_list(v); }},
        {"analysis.passivity_f_min",
         [](Config& c, const std::string& v) { c.analysis.passivity_f_min = finite_positive(v); }},
        {"analysis.passivity_f_max",
         [](Config& c, const std::string& v) { c.analysis.passivity_f_max = finite_positive(v); }},
        {"analysis.marginal_lo", [](Config& c, const std::string& v) { c.analysis.marginal_lo = non_negative(v); }},
        {"analysis.marginal_hi", [](Config& c, const std::string& v) { c.analysis.marginal_hi = finite_positive(v); }},
        {"sim.dt", [](Config& c, const std::string& v) { c.sim.dt = finite_positive(v); }},
        {"sim.duration", [](Config& c, const std::string& v) { c.sim.duration = finite_positive(v); }},
        {"sim.output_rate", [](Config& c, const std::string& v) { c.sim.output_rate = finite_positive(v); }},
        {"sim.injection_amplitude",
         [](Config& c, const std::string& v) { c.sim.injection_amplitude = finite_positive(v); }},
        {"sim.events", [](Config& c, const std::string& v) { c.sim.events = parse_events(v); }},
        {"sim.window", [](Config& c, const std::string& v) { c.sim.window = finite_positive(v); }},
        {"sim.spectrum_window", [](Config& c, const std::string& v) { c.sim.spectrum_window = finite_positive(v); }},
        {"sim.sweep_start", [](Config& c, const std::string& v) { c.sim.sweep_start = non_negative(v); }},
        {"sim.sweep_stop", [](Config& c, const std::string& v) { c.sim.sweep_stop = non_negative(v); }},
        {"sim.sweep_step", [](Config& c, const std::string& v) { c.sim.sweep_step = finite_positive(v); }},
        {"sim.threads", [](Config& c, const std::string& v) { c.sim.threads = static_cast<unsigned>(count(v, 0)); }},
        {"output.dir",
         [](Config& c, const std::string& v) {
             if (trim(v).empty()) throw Constraint{"must not be empty"};
             c.output.dir = trim(v);
         }},
        {"output.formats",
         [](Config& c, const std::string& v) {
             std::vector<std::string> f;
             for (const auto& p : split(v, ',')) {
                 if (p.empty()) continue;
                 if (p != "csv") throw Constraint{"unsupported format '" + p + "' (only csv)"};
                 f.push_back(p);
             }
             if (f.empty()) throw Constraint{"must list at least one format"};
             c.output.formats = f;
         }},
    };
    return table;
}

const Setter* find_setter(const std::string& key) {
    for (const auto& [k, s] : setters()) {
        if (k == key) return &s;
    }
    return nullptr;
}

void assign(Config& cfg, const std::string& key, const std::string& value, const std::string& where) {
    const Setter* s = find_setter(key);
    if (s == nullptr) throw ConfigError(key, where + ": unknown key");
    try {
        (*s)(cfg, value);
    } catch (const Constraint& c) {
        throw ConfigError(key, where + ": " + c.what);
    }
}

void require(bool ok, const char* key, const char* what) {
    if (!ok) throw ConfigError(key, what);
}

}  // namespace

cplx parse_complex(const std::string& text) {
    std::string t;
    for (char ch : text) {
        if (ch != ' ' && ch != '\t') t.push_back(ch);
    }
    auto number = [&](const std::string& s) {
        try {
            return parse_double(s);
        } catch (const Constraint&) {
            throw std::invalid_argument("expected a complex number like 0.5+0j, got '" + text + "'");
        }
    };
    if (t.empty()) throw std::invalid_argument("expected a complex number, got ''");
    if (t.back() != 'j' && t.back() != 'i') return {number(t), 0.0};
    const std::string body = t.substr(0, t.size() - 1);
    // Split at the last sign that is not an exponent sign or the leading one.
    for (std::size_t k = body.size(); k-- > 1;) {
        if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            const std::string im = body.substr(k);
            return {number(body.substr(0, k)), im.size() == 1 ? (im == "-" ? -1.0 : 1.0) : number(im)};
        }
    }
    if (body.empty() || body == "+") return {0.0, 1.0};
    if (body == "-") return {0.0, -1.0};
    return {0.0, number(body)};
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, s] : setters()) k.push_back(name);
        return k;
    }();
    return keys;
}

void validate(const Config& cfg) {
    const AnalysisConfig& a = cfg.analysis;
    require(a.f_max > a.f_min, "analysis.f_max", "must exceed analysis.f_min");
    require(a.bode_f_max > a.bode_f_min, "analysis.bode_f_max", "must exceed analysis.bode_f_min");
    require(a.passivity_f_max > a.passivity_f_min, "analysis.passivity_f_max", "must exceed analysis.passivity_f_min");
    require(a.marginal_hi > a.marginal_lo, "analysis.marginal_hi", "must exceed analysis.marginal_lo");
    const SimConfig& s = cfg.sim;
    require(s.dt * s.output_rate <= 1.0, "sim.output_rate", "must not exceed 1/sim.dt");
    require(s.sweep_stop >= s.sweep_start, "sim.sweep_stop", "must be >= sim.sweep_start");
    require(s.window * s.output_rate >= 1.0, "sim.window", "must hold at least one sample");
    solve_system(cfg.system);
}

Config parse_config_text(const std::string& text, const std::string& origin) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + " line " + std::to_string(number);
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(line, where + ": expected section.key = value");
        const std::string key = trim(line.substr(0, eq));
        assign(cfg, key, line.substr(eq + 1), where);
    }
    validate(cfg);
    return cfg;
}

Config parse_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("--config", "cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), path);
}

void apply_override(Config& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError(assignment, "--set: expected section.key=value");
    assign(cfg, trim(assignment.substr(0, eq)), assignment.substr(eq + 1), "--set");
    validate(cfg);
}

}  // namespace seqimp
