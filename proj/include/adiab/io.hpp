#ifndef ADIAB_IO_HPP
#define ADIAB_IO_HPP

// Result serialization: CSV tables (17 significant digits, headered), JSON
// documents, and a minimal standalone SVG line-plot writer.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "adiab/analysis.hpp"
#include "adiab/integrator.hpp"
#include "adiab/reduction.hpp"

namespace adiab {

inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream out;
    out << "t,I,phi,xi,eta,K\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const auto& s = traj.states[i];
        out << format_full(traj.times[i]) << ',' << format_full(s.I) << ','
            << format_full(s.phi) << ',' << format_full(s.xi) << ','
            << format_full(s.eta) << ',' << format_full(traj.K_values[i]) << '\n';
    }
    return out.str();
}

inline std::string sweep_csv(const SweepResult& sweep) {
    std::ostringstream out;
    out << "eps,phi0,I_minus,I_plus,delta_I,plateau_flatness,K_drift,resolved\n";
    for (const auto& row : sweep.rows) {
        const auto& r = row.result;
        out << format_full(row.eps) << ',' << format_full(row.phi0) << ','
            << format_full(r.I_minus) << ',' << format_full(r.I_plus) << ','
            << format_full(r.delta_I) << ',' << format_full(r.plateau_flatness) << ','
            << format_full(r.K_drift) << ',' << (r.resolved ? 1 : 0) << '\n';
    }
    return out.str();
}

inline std::string phase_scan_csv(const PhaseScanResult& scan) {
    std::ostringstream out;
    out << "phi0,delta_I,plateau_flatness,K_drift,resolved\n";
    for (const auto& row : scan.rows) {
        const auto& r = row.result;
        out << format_full(row.phi0) << ',' << format_full(r.delta_I) << ','
            << format_full(r.plateau_flatness) << ',' << format_full(r.K_drift) << ','
            << (r.resolved ? 1 : 0) << '\n';
    }
    return out.str();
}

inline std::string chart_csv(const FlowBoxChart& chart) {
    std::ostringstream out;
    out << "xi,eta,x,y\n";
    for (const auto& p : chart.grid)
        out << format_full(p.xi) << ',' << format_full(p.eta) << ','
            << format_full(p.x) << ',' << format_full(p.y) << '\n';
    return out.str();
}

struct OracleRow {
    double omega, eta0, eps, phi0;
    double closed_form;
    double quadrature;
    double rel_diff;
};

inline std::string oracle_csv(const std::vector<OracleRow>& rows) {
    std::ostringstream out;
    out << "omega,eta0,eps,phi0,closed_form,quadrature,rel_diff\n";
    for (const auto& r : rows)
        out << format_full(r.omega) << ',' << format_full(r.eta0) << ','
            << format_full(r.eps) << ',' << format_full(r.phi0) << ','
            << format_full(r.closed_form) << ',' << format_full(r.quadrature) << ','
            << format_full(r.rel_diff) << '\n';
    return out.str();
}

inline nlohmann::json gamma_fit_json(const GammaFit& fit, double gamma_theory) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["gamma_hat"] = fit.gamma_hat;
    j["gamma_theory"] = gamma_theory;
    j["log_prefactor"] = fit.log_prefactor;
    j["stderr_gamma"] = fit.stderr_gamma;
    j["eps_lo"] = fit.eps_lo;
    j["eps_hi"] = fit.eps_hi;
    j["n_points"] = fit.n_points;
    j["poor_fit"] = fit.poor_fit;
    j["residuals"] = fit.residuals;
    return j;
}

inline nlohmann::json singularities_json(const SingularitySet& set) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["eta0"] = set.eta0;
    j["gamma_theory"] = set.gamma_theory;
    auto& pts = j["points"] = nlohmann::json::array();
    for (const auto& z : set.points)
        pts.push_back({{"re", z.real()}, {"im", z.imag()}});
    return j;
}

// --- SVG line plot -------------------------------------------------------

struct PlotSeries {
    std::string name;
    std::string color = "#1f6fb2";
    std::vector<std::pair<double, double>> points;
};

// Single-panel line plot with linear axes, frame, tick labels, and a legend.
// Callers wanting log axes pass pre-transformed coordinates.
inline std::string svg_line_plot(const std::string& title, const std::string& xlabel,
                                 const std::string& ylabel,
                                 const std::vector<PlotSeries>& series) {
    const double W = 800, H = 560, ml = 80, mr = 30, mt = 50, mb = 60;
    double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
    bool first = true;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            if (first) { x_lo = x_hi = x; y_lo = y_hi = y; first = false; continue; }
            x_lo = std::min(x_lo, x); x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y); y_hi = std::max(y_hi, y);
        }
    if (x_hi == x_lo) { x_lo -= 0.5; x_hi += 0.5; }
    if (y_hi == y_lo) { y_lo -= 0.5; y_hi += 0.5; }
    const double x_pad = 0.03 * (x_hi - x_lo), y_pad = 0.05 * (y_hi - y_lo);
    x_lo -= x_pad; x_hi += x_pad; y_lo -= y_pad; y_hi += y_pad;
    auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - y_lo) / (y_hi - y_lo) * (H - mt - mb); };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", v);
        return std::string(buf);
    };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
        << H << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << W / 2 << "\" y=\"28\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"18\">" << title << "</text>\n"
        << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr
        << "\" height=\"" << H - mt - mb
        << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
    const int nticks = 5;
    for (int i = 0; i <= nticks; ++i) {
        const double fx = x_lo + i * (x_hi - x_lo) / nticks;
        const double fy = y_lo + i * (y_hi - y_lo) / nticks;
        out << "<line x1=\"" << px(fx) << "\" y1=\"" << H - mb << "\" x2=\"" << px(fx)
            << "\" y2=\"" << H - mb + 5 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << px(fx) << "\" y=\"" << H - mb + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
            << num(fx) << "</text>\n"
            << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(fy) << "\" x2=\"" << ml
            << "\" y2=\"" << py(fy) << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << ml - 8 << "\" y=\"" << py(fy) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
            << num(fy) << "</text>\n";
    }
    out << "<text x=\"" << W / 2 << "\" y=\"" << H - 15
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
        << xlabel << "</text>\n"
        << "<text x=\"20\" y=\"" << H / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
           "transform=\"rotate(-90 20 " << H / 2 << ")\">" << ylabel << "</text>\n";
    double legend_y = mt + 18;
    for (const auto& s : series) {
        if (s.points.empty()) continue;
        out << "<polyline fill=\"none\" stroke=\"" << s.color
            << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : s.points) out << px(x) << ',' << py(y) << ' ';
        out << "\"/>\n";
        for (const auto& [x, y] : s.points)
            out << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y)
                << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
        if (!s.name.empty()) {
            out << "<line x1=\"" << W - mr - 160 << "\" y1=\"" << legend_y - 4
                << "\" x2=\"" << W - mr - 140 << "\" y2=\"" << legend_y - 4
                << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n"
                << "<text x=\"" << W - mr - 134 << "\" y=\"" << legend_y
                << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.name
                << "</text>\n";
            legend_y += 18;
        }
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace adiab

#endif
