// End-to-end acceptance run: nine numbered checks, one pass/fail line each.
// Exits nonzero if any check fails. All tolerances are pinned here.

#include <cmath>
#include <cstdio>
#include <vector>

#include "adiab/action.hpp"
#include "adiab/analysis.hpp"
#include "adiab/model.hpp"
#include "adiab/reduction.hpp"

using namespace adiab;

namespace {

constexpr double kPi = 3.14159265358979323846;
int failures = 0;

void verdict(int id, bool ok, const char* what, double value, double limit) {
    std::printf("[%s] %d. %s (value %.3e, limit %.3e)\n", ok ? "PASS" : "FAIL", id,
                what, value, limit);
    if (!ok) ++failures;
}

std::vector<double> standard_window() {
    std::vector<double> eps;
    for (int i = 0; i < 8; ++i)
        eps.push_back(std::exp(std::log(0.08) + (std::log(0.2) - std::log(0.08)) * i / 7.0));
    return eps;
}

} // namespace

int main() {
    const ExampleSystem sys(1.0);
    const double gamma_th = theoretical_gamma(1.0, 2.0); // pi/2

    // Shared standard-window sweep: omega = 1, eta0 = 2, cosine coupling,
    // phi0 = pi/2, eps in [0.08, 0.2] log-spaced, adaptive tol 1e-12.
    SweepSettings settings;
    const SweepResult sweep =
        sweep_epsilon(sys, 2.0, kPi / 2, standard_window(), settings);

    // 1. Fitted decay rate within 5% of the predicted pi/2.
    {
        const GammaFit fit = fit_gamma(sweep);
        const double rel = std::fabs(fit.gamma_hat - gamma_th) / gamma_th;
        verdict(1, rel <= 0.05, "fitted decay rate matches the prediction", rel, 0.05);
    }

    // 2. Closed-form first-order jump vs quad-precision quadrature, 27 cases.
    {
        double worst = 0.0;
        for (double omega : {0.5, 1.0, 2.0})
            for (double eta0 : {1.0, 2.0, 4.0})
                for (double eps : {0.08, 0.1, 0.15}) {
                    const double a = melnikov_oracle(omega, eta0, eps, kPi / 2);
                    const double b = melnikov_quadrature(omega, eta0, eps, kPi / 2);
                    worst = std::max(worst, std::fabs(a - b) / std::fabs(a));
                }
        verdict(2, worst <= 1e-8, "closed form agrees with quadrature", worst, 1e-8);
    }

    // 3. Measured jump vs first-order prediction: relative deviation
    //    bounded by half of eps at every standard-window point.
    {
        double worst = 0.0;
        bool ok = true;
        for (const auto& row : sweep.rows) {
            const double oracle = melnikov_oracle(1.0, 2.0, row.eps, kPi / 2);
            const double rel_over_eps =
                std::fabs(row.result.delta_I - oracle) / std::fabs(oracle) / row.eps;
            worst = std::max(worst, rel_over_eps);
            ok = ok && row.result.resolved && rel_over_eps <= 0.5;
        }
        verdict(3, ok, "measurement is first-order accurate", worst, 0.5);
    }

    // 4. Conserved-quantity drift at tolerance 1e-12 stays below 1e-10.
    {
        double worst = 0.0;
        for (const auto& row : sweep.rows)
            worst = std::max(worst, row.result.K_drift);
        verdict(4, worst <= 1e-10, "energy drift bounded on every trajectory", worst,
                1e-10);
    }

    // 5. Canonicity: unit Jacobian of the slow chart on a 40x40 grid over
    //    xi in [-10, 10], eta in [1, 3]; the chart built by slow-flow
    //    integration matches the closed form to 1e-8.
    {
        FlowBoxChart closed;
        closed.forward = [](double xi, double eta) { return xy_from_flowbox(xi, eta); };
        closed.xi_min = -50.0;
        closed.xi_max = 50.0;
        closed.eta_min = 0.5;
        closed.eta_max = 5.0;
        double worst_det = 0.0;
        for (int i = 0; i < 40; ++i)
            for (int j = 0; j < 40; ++j) {
                const double xi = -10.0 + 20.0 * i / 39.0;
                const double eta = 1.0 + 2.0 * j / 39.0;
                worst_det =
                    std::max(worst_det, std::fabs(jacobian_det(closed, xi, eta) - 1.0));
            }
        verdict(5, worst_det <= 1e-6, "slow chart has unit Jacobian", worst_det, 1e-6);

        const GenericSlowFast gen =
            make_cartesian_example(sys, DomainBox{-4.0, 1.0, -3.0, 3.0, -2.0, 26.0});
        std::vector<double> xi_grid, eta_grid;
        for (double xi = -10.0; xi <= 10.0 + 1e-9; xi += 2.5) xi_grid.push_back(xi);
        for (double eta = 1.0; eta <= 3.0 + 1e-9; eta += 0.5) eta_grid.push_back(eta);
        const FlowBoxChart built = build_flowbox(gen, 0.0, xi_grid, eta_grid);
        double worst_map = 0.0;
        for (const auto& gp : built.grid) {
            const auto [xr, yr] = xy_from_flowbox(gp.xi, gp.eta);
            worst_map = std::max({worst_map, std::fabs(gp.x - xr), std::fabs(gp.y - yr)});
        }
        verdict(5, worst_map <= 1e-8, "integrated chart matches the closed form",
                worst_map, 1e-8);
    }

    // 6. The action settles: plateau variation over the outer 10% of each
    //    side below 1e-12 on every standard-window trajectory.
    {
        double worst = 0.0;
        for (const auto& row : sweep.rows)
            worst = std::max(worst, row.result.plateau_flatness);
        verdict(6, worst <= 1e-12, "action plateaus are flat", worst, 1e-12);
    }

    // 7. Frozen-system action utilities: harmonic-oscillator action h/Omega
    //    to 1e-9 and the identity dI/dh = 1/omega to 1e-6 on the quartic.
    {
        FrozenFastSystem harm;
        harm.energy = [](double p, double q) { return 0.5 * p * p + 2.0 * q * q; };
        harm.dE_dp = [](double p, double) { return p; };
        harm.dE_dq = [](double, double q) { return 4.0 * q; };
        harm.q_min = -10.0;
        harm.q_max = 10.0;
        harm.p_max = 10.0;
        const double err_harm = std::fabs(action_of_energy(harm, 3.0) - 1.5);
        verdict(7, err_harm <= 1e-9 * 1.5, "harmonic action is energy over frequency",
                err_harm / 1.5, 1e-9);

        FrozenFastSystem quart;
        quart.energy = [](double p, double q) {
            return 0.5 * p * p + 0.25 * q * q * q * q;
        };
        quart.dE_dp = [](double p, double) { return p; };
        quart.dE_dq = [](double, double q) { return q * q * q; };
        quart.q_min = -5.0;
        quart.q_max = 5.0;
        quart.p_max = 5.0;
        double worst = 0.0;
        for (double h : {0.5, 1.0, 1.5, 2.0}) {
            const double dh = 1e-5;
            const double dI_dh =
                (action_of_energy(quart, h + dh) - action_of_energy(quart, h - dh))
                / (2 * dh);
            worst = std::max(worst,
                             std::fabs(dI_dh * frequency_of_energy(quart, h) - 1.0));
        }
        verdict(7, worst <= 1e-6, "action slope is the inverse frequency", worst, 1e-6);
    }

    // 8. Sinusoidal phase structure at eps = 0.12; the zero-phase jump is at
    //    least ten times smaller than the quarter-phase jump.
    {
        std::vector<double> phis;
        for (int i = 0; i < 8; ++i) phis.push_back(2.0 * kPi * i / 8.0);
        const PhaseScanResult scan = phase_scan(sys, 2.0, 0.12, phis, settings);
        verdict(8, scan.rel_residual <= 0.05, "jump is sinusoidal in the phase",
                scan.rel_residual, 0.05);
        const double at_zero = std::fabs(scan.rows[0].result.delta_I);
        const double at_quarter = std::fabs(scan.rows[2].result.delta_I);
        verdict(8, at_zero * 10.0 <= at_quarter,
                "zero-phase jump is suppressed tenfold", at_zero / at_quarter, 0.1);
    }

    // 9. Adiabatic invariance along the passage: sup |I(t) - I(0)| scales
    //    linearly in eps (log-log slope within [0.8, 1.2]).
    {
        std::vector<double> eps_list{0.1, 0.2, 0.3}, sups;
        for (double eps : eps_list) {
            const IntegrationSettings is = IntegrationSettings::for_epsilon(eps);
            const Trajectory traj = integrate(sys, {1.0, kPi / 2, 0.0, 2.0}, eps, is);
            double sup = 0.0;
            for (const auto& s : traj.states)
                sup = std::max(sup, std::fabs(s.I - 1.0));
            sups.push_back(sup);
        }
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        const int n = int(eps_list.size());
        for (int i = 0; i < n; ++i) {
            const double x = std::log(eps_list[i]), y = std::log(sups[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        const bool bounded = sups[2] <= 10.0 * eps_list[2];
        verdict(9, bounded && slope >= 0.8 && slope <= 1.2,
                "action deviation scales linearly in eps", slope, 1.2);
    }

    std::printf("%s\n", failures == 0 ? "all acceptance checks passed"
                                      : "ACCEPTANCE FAILURES PRESENT");
    return failures == 0 ? 0 : 1;
}
