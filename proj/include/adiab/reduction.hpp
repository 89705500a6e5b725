#ifndef ADIAB_REDUCTION_HPP
#define ADIAB_REDUCTION_HPP

// Isoenergetic reduction and the flow-box chart. Solving H = h0 for -I turns
// phi into the new time; on the slow plane the level value eta = F0(y, x)
// and the slow time xi along the F0 flow form canonical coordinates with
// unit Jacobian determinant.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "adiab/integrator.hpp"
#include "adiab/model.hpp"

namespace adiab {

// The unique I in the box with H0(I,y,x) + eps H1(I,phi,y,x) = h0, by Newton
// iteration with derivative omega0 + eps dH1/dI, bisection fallback.
// Residual on return is at most 1e-12 * max(1, |h0|).
inline double isoenergetic_reduce(const GenericSlowFast& sys, double phi, double y,
                                  double x, double h0, double eps) {
    auto resid = [&](double I) {
        return sys.H0(I, y, x) + eps * sys.H1(I, phi, y, x) - h0;
    };
    auto dresid = [&](double I) {
        return sys.dH0_dI(I, y, x) + eps * sys.dH1_dI(I, phi, y, x);
    };
    const double tol = 1e-12 * std::max(1.0, std::fabs(h0));

    double I = 0.5 * (sys.box.I_min + sys.box.I_max);
    for (int it = 0; it < 50; ++it) {
        const double r = resid(I);
        if (std::fabs(r) <= tol) {
            if (I < sys.box.I_min || I > sys.box.I_max)
                throw std::runtime_error("isoenergetic_reduce: root I = "
                                         + std::to_string(I) + " outside the I box");
            return I;
        }
        const double d = dresid(I);
        if (d == 0.0) break;
        const double I_next = I - r / d;
        if (!std::isfinite(I_next)) break;
        I = I_next;
    }
    // Newton did not settle; bisect over the declared box.
    double a = sys.box.I_min, b = sys.box.I_max;
    double fa = resid(a), fb = resid(b);
    if (fa * fb > 0.0)
        throw std::runtime_error(
            "isoenergetic_reduce: Newton diverged (residual "
            + std::to_string(resid(I)) + ") and h0 is not bracketed by the I box");
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = resid(m);
        if (std::fabs(fm) <= tol) return m;
        if (fa * fm <= 0.0) {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    throw std::runtime_error("isoenergetic_reduce: bisection failed to meet tolerance");
}

// A chart (xi, eta) -> (x, y) with inverse; maps are stored as callables so
// synthetic charts (identity, linear distortions) share the interface.
struct FlowBoxChart {
    std::function<std::pair<double, double>(double xi, double eta)> forward;
    std::function<std::pair<double, double>(double x, double y)> inverse;
    double xi_min, xi_max, eta_min, eta_max;

    // Grid dump rows (xi, eta, x, y) for export; empty for synthetic charts.
    struct GridPoint {
        double xi, eta, x, y;
    };
    std::vector<GridPoint> grid;
};

// Central-difference Jacobian determinant D(x,y)/D(xi,eta) at a point
// strictly inside the validity box; step 1e-6 scaled by coordinate size.
inline double jacobian_det(const FlowBoxChart& chart, double xi, double eta) {
    const double h_xi = 1e-6 * std::max(1.0, std::fabs(xi));
    const double h_eta = 1e-6 * std::max(1.0, std::fabs(eta));
    if (xi - h_xi < chart.xi_min || xi + h_xi > chart.xi_max || eta - h_eta < chart.eta_min
        || eta + h_eta > chart.eta_max)
        throw std::runtime_error("jacobian_det: point too close to the box edge for "
                                 "the difference stencil");
    // realized stencil widths (xi +/- h need not be representable exactly)
    const double xi_p = xi + h_xi, xi_m = xi - h_xi;
    const double eta_p = eta + h_eta, eta_m = eta - h_eta;
    const auto [x_p, y_p] = chart.forward(xi_p, eta);
    const auto [x_m, y_m] = chart.forward(xi_m, eta);
    const auto [x_q, y_q] = chart.forward(xi, eta_p);
    const auto [x_r, y_r] = chart.forward(xi, eta_m);
    const double dx_dxi = (x_p - x_m) / (xi_p - xi_m);
    const double dy_dxi = (y_p - y_m) / (xi_p - xi_m);
    const double dx_deta = (x_q - x_r) / (eta_p - eta_m);
    const double dy_deta = (y_q - y_r) / (eta_p - eta_m);
    return dx_dxi * dy_deta - dy_dxi * dx_deta;
}

namespace detail {

// Slow flow of F0 at fixed level eta: along its own orbit I = -eta, so
//   dx/dxi = dF0/dy = (dH0/dy)/omega0,  dy/dxi = -dF0/dx = -(dH0/dx)/omega0.
struct SlowFlow {
    const GenericSlowFast& sys;
    double eta;
    void operator()(const std::array<double, 2>& v, std::array<double, 2>& d) const {
        const double x = v[0], y = v[1];
        const double w0 = sys.dH0_dI(-eta, y, x);
        if (w0 == 0.0)
            throw std::domain_error("slow flow: omega0 vanished");
        d[0] = sys.dH0_dy(-eta, y, x) / w0;
        d[1] = -sys.dH0_dx(-eta, y, x) / w0;
    }
};

// Section point of the level F0 = eta: the point with y = 0, x solved from
// H0(-eta, 0, x) = h0 inside the x box.
inline double section_x(const GenericSlowFast& sys, double eta, double h0) {
    auto resid = [&](double x) { return sys.H0(-eta, 0.0, x) - h0; };
    const int n_scan = 400;
    double x_prev = sys.box.x_min, r_prev = resid(x_prev);
    for (int i = 1; i <= n_scan; ++i) {
        const double x = sys.box.x_min + (sys.box.x_max - sys.box.x_min) * i / n_scan;
        const double r = resid(x);
        if (r_prev == 0.0 || r_prev * r < 0.0) {
            // bisection + Newton polish
            double a = x_prev, b = x, fa = r_prev;
            for (int k = 0; k < 100; ++k) {
                const double m = 0.5 * (a + b);
                const double fm = resid(m);
                if (fm == 0.0) return m;
                if (fa * fm < 0.0)
                    b = m;
                else {
                    a = m;
                    fa = fm;
                }
            }
            return 0.5 * (a + b);
        }
        x_prev = x;
        r_prev = r;
    }
    throw std::runtime_error("build_flowbox: no section point with y = 0 found for "
                             "eta = " + std::to_string(eta));
}

} // namespace detail

// Builds the flow-box chart of the slow system: for each eta the initial
// section point is transported along the F0 flow to slow time xi. Forward
// evaluation integrates the slow flow on demand (DOP853 at tol 1e-12); the
// stored grid seeds the Newton inverse.
inline FlowBoxChart build_flowbox(const GenericSlowFast& sys, double h0,
                                  const std::vector<double>& xi_grid,
                                  const std::vector<double>& eta_grid) {
    if (xi_grid.size() < 2 || eta_grid.size() < 2)
        throw std::invalid_argument("build_flowbox: need at least a 2x2 grid");

    FlowBoxChart chart;
    chart.xi_min = xi_grid.front();
    chart.xi_max = xi_grid.back();
    chart.eta_min = eta_grid.front();
    chart.eta_max = eta_grid.back();

    auto forward = [&sys, h0](double xi, double eta) {
        std::array<double, 2> v{detail::section_x(sys, eta, h0), 0.0};
        if (xi != 0.0)
            detail::dop853_integrate(detail::SlowFlow{sys, eta}, v, 0.0, xi, 1e-13,
                                     1e-13, [](double, const auto&, const auto&, long) {});
        return std::pair<double, double>{v[0], v[1]};
    };

    for (double eta : eta_grid)
        for (double xi : xi_grid) {
            const auto [x, y] = forward(xi, eta);
            chart.grid.push_back({xi, eta, x, y});
        }

    // Fold check: the (xi, eta) -> (x, y) map preserves orientation, so every
    // grid cell must have the same signed area; a sign change or a collapsed
    // cell marks a fold and breaks the inverse seeding.
    const std::size_t nxi = xi_grid.size();
    int orient = 0;
    for (std::size_t j = 0; j + 1 < eta_grid.size(); ++j)
        for (std::size_t i = 0; i + 1 < nxi; ++i) {
            const auto& p00 = chart.grid[j * nxi + i];
            const auto& p10 = chart.grid[j * nxi + i + 1];
            const auto& p01 = chart.grid[(j + 1) * nxi + i];
            const double cross = (p10.x - p00.x) * (p01.y - p00.y)
                                 - (p10.y - p00.y) * (p01.x - p00.x);
            const int s = cross > 0.0 ? 1 : cross < 0.0 ? -1 : 0;
            if (s == 0 || (orient != 0 && s != orient))
                throw std::runtime_error("build_flowbox: fold detected in the grid map");
            orient = s;
        }

    auto grid_copy = chart.grid;
    auto inverse = [&sys, h0, forward, grid_copy](double x, double y) {
        // eta is the value of F0 = -I on the level line through (x, y).
        const double eta = -isoenergetic_reduce(sys, 0.0, y, x, h0, 0.0);
        // seed xi from the nearest grid sample
        double xi = 0.0, best = std::numeric_limits<double>::max();
        for (const auto& gp : grid_copy) {
            const double d = (gp.x - x) * (gp.x - x) + (gp.y - y) * (gp.y - y);
            if (d < best) {
                best = d;
                xi = gp.xi;
            }
        }
        // Gauss-Newton along the orbit parameter
        for (int it = 0; it < 60; ++it) {
            const auto [xc, yc] = forward(xi, eta);
            std::array<double, 2> d;
            detail::SlowFlow{sys, eta}({xc, yc}, d);
            const double denom = d[0] * d[0] + d[1] * d[1];
            if (denom == 0.0)
                throw std::runtime_error("chart inverse: stationary slow flow point");
            const double step = ((x - xc) * d[0] + (y - yc) * d[1]) / denom;
            xi += step;
            if (std::fabs(step) <= 1e-13 * std::max(1.0, std::fabs(xi)))
                return std::pair<double, double>{xi, eta};
        }
        throw std::runtime_error("chart inverse: Newton did not converge");
    };

    chart.forward = forward;
    chart.inverse = inverse;
    return chart;
}

} // namespace adiab

#endif
