#ifndef ADIAB_CONFIG_HPP
#define ADIAB_CONFIG_HPP

// Experiment configuration: plain-text "key = value" with dotted section
// prefixes, '#' comments, UTF-8. Unknown keys are errors; missing keys take
// the documented defaults.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "adiab/integrator.hpp"
#include "adiab/model.hpp"

namespace adiab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    // model
    double omega = 1.0;
    double eta0 = 2.0;
    std::string g_spec = "cos"; // "cos" or "fourier k:cos:sin, k:cos:sin, ..."
    // initial
    double I0 = 1.0;
    double phi0 = 1.5707963267948966; // pi/2: maximal leading-order signal
    // integration
    std::string method = "rk8_adaptive"; // or rk4_fixed
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    double step = 1e-2;
    double xi_reach = 60.0;
    // sweep
    std::vector<double> eps_list;  // explicit grid; wins over min/max/count
    double eps_min = 0.08;
    double eps_max = 0.2;
    int eps_count = 8;
    std::string spacing = "log"; // or "linear"
    // phase scan
    double phase_eps = 0.12;
    int phase_count = 16;
    // run
    int threads = 0; // 0: all available processors
    // output
    std::string out_dir = ".";
    std::string formats = "csv,json,svg";
    // report tolerances
    double gamma_rel_tol = 0.05;
    double oracle_rel_tol = 1e-8;
    double first_order_tol_factor = 0.5; // measured vs oracle <= factor * eps
    double k_drift_max = 1e-10;
    double flatness_max = 1e-12;

    void validate() const {
        for (double v : {omega, eta0, I0, phi0, abs_tol, rel_tol, step, xi_reach,
                         eps_min, eps_max, phase_eps, gamma_rel_tol, oracle_rel_tol,
                         first_order_tol_factor, k_drift_max, flatness_max})
            if (!std::isfinite(v))
                throw ConfigError("config: non-finite numeric value");
        for (double e : eps_list)
            if (!(e > 0.0)) throw ConfigError("config: sweep eps entries must be > 0");
        if (!(eps_min > 0.0 && eps_max > 0.0))
            throw ConfigError("config: sweep eps bounds must be > 0");
        if (!(xi_reach >= 40.0))
            throw ConfigError("config: integration.xi_reach must be >= 40");
        if (method != "rk8_adaptive" && method != "rk4_fixed")
            throw ConfigError("config: unknown integration.method '" + method + "'");
        if (spacing != "log" && spacing != "linear")
            throw ConfigError("config: sweep.spacing must be 'log' or 'linear'");
        if (eps_count < 1 || phase_count < 1)
            throw ConfigError("config: counts must be >= 1");
    }

    std::vector<double> eps_grid() const {
        if (!eps_list.empty()) return eps_list;
        std::vector<double> grid;
        if (eps_count == 1) return {eps_min};
        for (int i = 0; i < eps_count; ++i) {
            const double t = double(i) / (eps_count - 1);
            grid.push_back(spacing == "log"
                               ? std::exp(std::log(eps_min)
                                          + t * (std::log(eps_max) - std::log(eps_min)))
                               : eps_min + t * (eps_max - eps_min));
        }
        return grid;
    }

    GCoupling coupling() const {
        if (g_spec == "cos") return GCoupling::cosine();
        if (g_spec.rfind("fourier", 0) == 0) {
            std::vector<GCoupling::Harmonic> terms;
            std::string rest = g_spec.substr(7);
            std::replace(rest.begin(), rest.end(), ',', ' ');
            std::istringstream in(rest);
            std::string tok;
            while (in >> tok) {
                GCoupling::Harmonic h{};
                if (std::sscanf(tok.c_str(), "%d:%lf:%lf", &h.k, &h.cos_amp,
                                &h.sin_amp) != 3)
                    throw ConfigError("config: bad fourier term '" + tok
                                      + "', expected k:cos:sin");
                terms.push_back(h);
            }
            return GCoupling::fourier(terms);
        }
        throw ConfigError("config: unknown coupling spec '" + g_spec + "'");
    }

    ExampleSystem system() const { return ExampleSystem(omega, coupling()); }

    Method integration_method() const {
        return method == "rk4_fixed" ? Method::rk4_fixed : Method::rk8_adaptive;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& v, const std::string& key, int line) {
    std::size_t pos = 0;
    double x;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError("config line " + std::to_string(line) + ": key '" + key
                          + "' expects a number, got '" + v + "'");
    }
    if (pos != v.size())
        throw ConfigError("config line " + std::to_string(line) + ": key '" + key
                          + "' expects a number, got '" + v + "'");
    return x;
}

inline int parse_int(const std::string& v, const std::string& key, int line) {
    std::size_t pos = 0;
    int x;
    try {
        x = std::stoi(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError("config line " + std::to_string(line) + ": key '" + key
                          + "' expects an integer, got '" + v + "'");
    }
    if (pos != v.size())
        throw ConfigError("config line " + std::to_string(line) + ": key '" + key
                          + "' expects an integer, got '" + v + "'");
    return x;
}

inline std::vector<double> parse_double_list(const std::string& v, const std::string& key,
                                             int line) {
    std::vector<double> out;
    std::string s = v;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(parse_double(tok, key, line));
    return out;
}

} // namespace detail

// Applies one "key = value" assignment. Shared by the file parser and by
// command-line overrides.
inline void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                               const std::string& value, int line) {
    using detail::parse_double;
    using detail::parse_double_list;
    using detail::parse_int;
    if (key == "model.omega") cfg.omega = parse_double(value, key, line);
    else if (key == "model.eta0") cfg.eta0 = parse_double(value, key, line);
    else if (key == "model.g") cfg.g_spec = value;
    else if (key == "initial.I0") cfg.I0 = parse_double(value, key, line);
    else if (key == "initial.phi0") cfg.phi0 = parse_double(value, key, line);
    else if (key == "integration.method") cfg.method = value;
    else if (key == "integration.abs_tol") cfg.abs_tol = parse_double(value, key, line);
    else if (key == "integration.rel_tol") cfg.rel_tol = parse_double(value, key, line);
    else if (key == "integration.step") cfg.step = parse_double(value, key, line);
    else if (key == "integration.xi_reach") cfg.xi_reach = parse_double(value, key, line);
    else if (key == "sweep.eps_list") cfg.eps_list = parse_double_list(value, key, line);
    else if (key == "sweep.eps_min") cfg.eps_min = parse_double(value, key, line);
    else if (key == "sweep.eps_max") cfg.eps_max = parse_double(value, key, line);
    else if (key == "sweep.eps_count") cfg.eps_count = parse_int(value, key, line);
    else if (key == "sweep.spacing") cfg.spacing = value;
    else if (key == "phase.eps") cfg.phase_eps = parse_double(value, key, line);
    else if (key == "phase.count") cfg.phase_count = parse_int(value, key, line);
    else if (key == "run.threads") cfg.threads = parse_int(value, key, line);
    else if (key == "output.directory") cfg.out_dir = value;
    else if (key == "output.formats") cfg.formats = value;
    else if (key == "report.gamma_rel_tol") cfg.gamma_rel_tol = parse_double(value, key, line);
    else if (key == "report.oracle_rel_tol") cfg.oracle_rel_tol = parse_double(value, key, line);
    else if (key == "report.first_order_tol_factor")
        cfg.first_order_tol_factor = parse_double(value, key, line);
    else if (key == "report.k_drift_max") cfg.k_drift_max = parse_double(value, key, line);
    else if (key == "report.flatness_max") cfg.flatness_max = parse_double(value, key, line);
    else
        throw ConfigError("config line " + std::to_string(line) + ": unknown key '"
                          + key + "'");
}

inline ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::map<std::string, int> seen; // key -> first line
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string s = detail::trim(raw);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line)
                              + ": expected 'key = value', got '" + s + "'");
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string value = detail::trim(s.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line) + ": empty key");
        const auto [it, inserted] = seen.emplace(key, line);
        if (!inserted)
            throw ConfigError("config line " + std::to_string(line) + ": duplicate key '"
                              + key + "' (first set on line "
                              + std::to_string(it->second) + ")");
        apply_config_entry(cfg, key, value, line);
    }
    cfg.validate();
    return cfg;
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
    auto num = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    std::ostringstream out;
    out << "model.omega = " << num(cfg.omega) << "\n"
        << "model.eta0 = " << num(cfg.eta0) << "\n"
        << "model.g = " << cfg.g_spec << "\n"
        << "initial.I0 = " << num(cfg.I0) << "\n"
        << "initial.phi0 = " << num(cfg.phi0) << "\n"
        << "integration.method = " << cfg.method << "\n"
        << "integration.abs_tol = " << num(cfg.abs_tol) << "\n"
        << "integration.rel_tol = " << num(cfg.rel_tol) << "\n"
        << "integration.step = " << num(cfg.step) << "\n"
        << "integration.xi_reach = " << num(cfg.xi_reach) << "\n";
    if (!cfg.eps_list.empty()) {
        out << "sweep.eps_list = ";
        for (std::size_t i = 0; i < cfg.eps_list.size(); ++i)
            out << (i ? ", " : "") << num(cfg.eps_list[i]);
        out << "\n";
    }
    out << "sweep.eps_min = " << num(cfg.eps_min) << "\n"
        << "sweep.eps_max = " << num(cfg.eps_max) << "\n"
        << "sweep.eps_count = " << cfg.eps_count << "\n"
        << "sweep.spacing = " << cfg.spacing << "\n"
        << "phase.eps = " << num(cfg.phase_eps) << "\n"
        << "phase.count = " << cfg.phase_count << "\n"
        << "run.threads = " << cfg.threads << "\n"
        << "output.directory = " << cfg.out_dir << "\n"
        << "output.formats = " << cfg.formats << "\n"
        << "report.gamma_rel_tol = " << num(cfg.gamma_rel_tol) << "\n"
        << "report.oracle_rel_tol = " << num(cfg.oracle_rel_tol) << "\n"
        << "report.first_order_tol_factor = " << num(cfg.first_order_tol_factor) << "\n"
        << "report.k_drift_max = " << num(cfg.k_drift_max) << "\n"
        << "report.flatness_max = " << num(cfg.flatness_max) << "\n";
    return out.str();
}

} // namespace adiab

#endif
