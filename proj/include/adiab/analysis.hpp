#ifndef ADIAB_ANALYSIS_HPP
#define ADIAB_ANALYSIS_HPP

// Quantitative experiments: measure the adiabatic-invariant jump delta I
// across the passage, predict the decay rate gamma from the complex
// singularities of the slow solution, evaluate the first-order (Melnikov)
// oracle, sweep epsilon, and fit gamma from the sweep.

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "adiab/detail/real.hpp"
#include "adiab/integrator.hpp"
#include "adiab/model.hpp"

namespace adiab {

struct DeltaIResult {
    double I_minus = 0.0;          // plateau mean, t -> t_min side
    double I_plus = 0.0;           // plateau mean, t -> t_max side
    double delta_I = 0.0;          // I_plus - I_minus
    double plateau_flatness = 0.0; // max in-plateau variation (worse side)
    double K_drift = 0.0;          // integrator conservation diagnostic
    bool resolved = false;         // |delta_I| dominates flatness and drift
};

struct SweepRow {
    double eps = 0.0;
    double phi0 = 0.0;
    DeltaIResult result;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double omega = 0.0; // model snapshot
    double eta0 = 0.0;
    GCoupling::Kind g_kind = GCoupling::Kind::cosine;
};

struct GammaFit {
    double gamma_hat = 0.0;
    double log_prefactor = 0.0;
    double stderr_gamma = 0.0;
    std::vector<double> residuals; // log units, per used point
    double eps_lo = 0.0, eps_hi = 0.0;
    int n_points = 0;
    bool poor_fit = false; // max |residual| > 0.1
};

struct SingularitySet {
    double eta0 = 0.0;
    std::vector<std::complex<double>> points; // purely imaginary
    double gamma_theory = 0.0;                // NaN when omega not supplied
};

// Sharp decay-rate constant pi*omega/sqrt(2*eta0): omega times the distance
// from the real axis to the nearest singularity of the slow solution. (The
// rigorous bound holds for any gamma strictly below this value; the fit is
// compared against the supremum.)
inline double theoretical_gamma(double omega, double eta0) {
    if (!(omega > 0.0))
        throw std::domain_error("theoretical_gamma: omega must be positive");
    if (!(eta0 > 0.0))
        throw std::domain_error("theoretical_gamma: eta0 must be positive");
    return detail::pi_v<double> * omega / std::sqrt(2.0 * eta0);
}

// Singularities of the envelope in the complex xi plane:
// xi_k = (2k+1) pi i / sqrt(2 eta0), k in [k_min, k_max].
inline SingularitySet singularities(double eta0, int k_min, int k_max,
                                    double omega = std::numeric_limits<double>::quiet_NaN()) {
    if (!(eta0 > 0.0))
        throw std::domain_error("singularities: eta0 must be positive");
    if (k_min > k_max)
        throw std::invalid_argument("singularities: empty k range");
    SingularitySet out;
    out.eta0 = eta0;
    const double base = detail::pi_v<double> / std::sqrt(2.0 * eta0);
    for (int k = k_min; k <= k_max; ++k)
        out.points.emplace_back(0.0, (2 * k + 1) * base);
    out.gamma_theory = std::isnan(omega) ? omega : omega * base;
    return out;
}

// First-order jump for cosine coupling, closed form:
//   delta I_1 = 2 pi omega sin(phi0) / (eps sinh(gamma/eps)),
// from the standard Fourier transform of sech^2. Guarded by the asymptotic
// form 4 pi omega sin(phi0) e^{-gamma/eps} / eps when sinh would overflow.
inline double melnikov_oracle(double omega, double eta0, double eps, double phi0) {
    if (!(omega > 0.0 && eta0 > 0.0 && eps > 0.0))
        throw std::domain_error("melnikov_oracle: omega, eta0, eps must be positive");
    const double gamma = theoretical_gamma(omega, eta0);
    const double r = gamma / eps;
    if (r > 700.0)
        return 4.0 * detail::pi_v<double> * omega * std::sin(phi0) / eps * std::exp(-r);
    return 2.0 * detail::pi_v<double> * omega * std::sin(phi0) / (eps * std::sinh(r));
}

namespace detail {

// Quad-precision Gauss-Legendre table: nodes polished in __float128. Needed
// because the Melnikov integral suffers near-total cancellation -- the
// result can be 20+ decades below the integrand scale.
template <std::size_t N>
struct GaussLegendreQ {
    std::array<__float128, N> node{}, weight{};

    GaussLegendreQ() {
        for (std::size_t i = 0; i < N; ++i) {
            __float128 x = cosq(pi_v<__float128> * (__float128(i) + __float128(0.75))
                                / (__float128(N) + __float128(0.5)));
            __float128 pp = 0;
            for (int it = 0; it < 200; ++it) {
                __float128 p0 = 1, p1 = x;
                for (std::size_t j = 2; j <= N; ++j) {
                    const __float128 p2 =
                        ((2 * __float128(j) - 1) * x * p1 - (__float128(j) - 1) * p0)
                        / __float128(j);
                    p0 = p1;
                    p1 = p2;
                }
                pp = __float128(N) * (x * p1 - p0) / (x * x - 1);
                const __float128 dx = p1 / pp;
                x -= dx;
                if (fabsq(dx) < __float128(1e-35)) break;
            }
            node[i] = x;
            weight[i] = 2 / ((1 - x * x) * pp * pp);
        }
    }
};

inline const GaussLegendreQ<24>& glq24() {
    static const GaussLegendreQ<24> table;
    return table;
}

// Neumaier compensation in __float128.
struct CompensatedSumQ {
    __float128 sum = 0, comp = 0;
    void add(__float128 x) {
        const __float128 t = sum + x;
        if (fabsq(sum) >= fabsq(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    __float128 value() const { return sum + comp; }
};

} // namespace detail

// Brute-force first-order jump: quadrature of the action equation
// dI/dt = -eps f(eps t, eta0) g'(omega t + phi0) over t, in quad precision,
// panel width <= pi/(4 omega), extended until the envelope tail bound
// falls below 1e-18 of the running result. Independent of the closed form.
inline double melnikov_quadrature(double omega, double eta0, double eps, double phi0,
                                  const GCoupling& g = GCoupling::cosine(),
                                  bool* tol_met = nullptr) {
    if (!(omega > 0.0 && eta0 > 0.0 && eps > 0.0))
        throw std::domain_error("melnikov_quadrature: omega, eta0, eps must be positive");
    using Q = __float128;
    const auto& gl = detail::glq24();
    const Q eta = eta0;
    const Q a = sqrtq(eta / 2);
    const Q aeps = a * Q(eps);

    auto integrand = [&](Q t) -> Q {
        const Q z = aeps * t;
        const Q e = expq(-2 * fabsq(z));
        const Q d = 1 + e;
        const Q f = 4 * eta * e / (d * d);
        // dI/dt = -eps f g'(phi) along the unperturbed solution
        return -Q(eps) * f * g.eval_derivative(Q(omega) * t + Q(phi0));
    };

    const Q width = std::min(detail::pi_v<double> / (4.0 * omega),
                             0.5 / double(aeps)); // resolve both scales
    detail::CompensatedSumQ acc;
    Q T = 0;
    bool met = false;
    // symmetric panel pairs, stop on the tail bound
    const long hard_cap = 4000000;
    for (long p = 0; p < hard_cap; ++p) {
        const Q t0 = T, t1 = T + width;
        const Q mid = (t0 + t1) / 2, half = (t1 - t0) / 2;
        Q pos = 0, neg = 0;
        for (std::size_t i = 0; i < 24; ++i) {
            const Q t = mid + half * gl.node[i];
            pos += gl.weight[i] * integrand(t);
            neg += gl.weight[i] * integrand(-t);
        }
        acc.add(half * pos);
        acc.add(half * neg);
        T = t1;
        if (p % 16 == 15) {
            // integrand tail is bounded by eps * 4 eta e^{-2 a eps t}
            const Q tail = (2 * eta / a) * expq(-2 * aeps * T);
            const Q run = fabsq(acc.value());
            if (tail <= __float128(1e-18) * run || tail <= __float128(1e-42) * (2 * eta / a)) {
                met = true;
                break;
            }
        }
    }
    if (tol_met) *tol_met = met;
    return double(acc.value());
}

// Plateau means of I over the outer 10% of each side of the trajectory.
inline DeltaIResult measure_delta_I(const ExampleSystem& system,
                                    const ReducedState& state0, double eps,
                                    const IntegrationSettings& settings) {
    settings.validate();
    if (eps > 0.0) {
        const double reach = eps * std::min(-settings.t_min, settings.t_max);
        if (reach < 40.0)
            throw std::invalid_argument(
                "measure_delta_I: span only reaches |xi| = " + std::to_string(reach)
                + "; the plateau regime needs |xi| >= 40 on both sides");
    }
    const Trajectory traj = integrate(system, state0, eps, settings);

    auto plateau = [&](bool plus_side, double& mean, double& flatness) {
        const double t_edge = plus_side ? settings.t_max : settings.t_min;
        const double t_in = 0.9 * t_edge;
        CompensatedSum sum;
        std::size_t n = 0;
        double lo = std::numeric_limits<double>::max(), hi = -lo;
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            const double t = traj.times[i];
            const bool in_window = plus_side ? (t >= t_in) : (t <= t_in);
            if (!in_window) continue;
            const double I = traj.states[i].I;
            sum.add(I);
            lo = std::min(lo, I);
            hi = std::max(hi, I);
            ++n;
        }
        if (n == 0)
            throw std::runtime_error("measure_delta_I: no samples in the plateau "
                                     "window; reduce sample_stride");
        mean = sum.value() / double(n);
        flatness = std::max(flatness, hi - lo);
    };

    DeltaIResult out;
    out.K_drift = traj.max_K_drift;
    plateau(false, out.I_minus, out.plateau_flatness);
    plateau(true, out.I_plus, out.plateau_flatness);
    out.delta_I = out.I_plus - out.I_minus;
    out.resolved = std::fabs(out.delta_I) >= 100.0 * out.plateau_flatness
                   && std::fabs(out.delta_I) >= 10.0 * out.K_drift;
    return out;
}

struct SweepSettings {
    double I0 = 1.0;
    double xi_reach = 60.0;
    Method method = Method::rk8_adaptive;
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    double rk4_step = 1e-2;
    int sample_stride = 1;
    unsigned threads = 0; // 0: hardware concurrency

    IntegrationSettings integration_for(double eps) const {
        IntegrationSettings s = IntegrationSettings::for_epsilon(eps, xi_reach);
        s.method = method;
        s.abs_tol = abs_tol;
        s.rel_tol = rel_tol;
        s.step = rk4_step;
        s.sample_stride = sample_stride;
        return s;
    }
};

namespace detail {

// Data-parallel map over an index range; results are keyed by index so the
// outcome is independent of scheduling.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    unsigned n = threads == 0 ? std::thread::hardware_concurrency() : threads;
    if (n <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    n = std::min<unsigned>(n, count);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(n);
    for (unsigned w = 0; w < n; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += n) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace detail

// One measured jump per grid epsilon. Points whose predicted jump envelope
// sits below 1e-12 (unresolvable above integrator noise) are flagged and
// skipped; single-point failures are flagged, never fatal to the sweep.
inline SweepResult sweep_epsilon(const ExampleSystem& system, double eta0, double phi0,
                                 const std::vector<double>& eps_grid,
                                 const SweepSettings& settings = {}) {
    for (double eps : eps_grid)
        if (!(eps > 0.0))
            throw std::invalid_argument("sweep_epsilon: eps grid must be positive");
    SweepResult out;
    out.omega = system.omega();
    out.eta0 = eta0;
    out.g_kind = system.coupling().kind();
    out.rows.resize(eps_grid.size());

    detail::parallel_for(eps_grid.size(), settings.threads, [&](std::size_t i) {
        const double eps = eps_grid[i];
        SweepRow& row = out.rows[i];
        row.eps = eps;
        row.phi0 = phi0;
        // envelope of the first-order prediction, phase factor dropped
        const double gamma = theoretical_gamma(system.omega(), eta0);
        const double envelope =
            gamma / eps > 700.0
                ? 0.0
                : 2.0 * detail::pi_v<double> * system.omega() / (eps * std::sinh(gamma / eps));
        if (envelope < 1e-12) {
            row.result.resolved = false;
            return;
        }
        try {
            const ReducedState state0{settings.I0, phi0, 0.0, eta0};
            row.result = measure_delta_I(system, state0, eps,
                                         settings.integration_for(eps));
        } catch (const std::exception&) {
            row.result = DeltaIResult{};
            row.result.resolved = false;
        }
    });
    return out;
}

// Ordinary least squares of log(eps |delta I|) against 1/eps over the
// resolved rows; slope = -gamma_hat. The eps prefactor is divided out to
// match the first-order form A/eps * e^{-gamma/eps}.
inline GammaFit fit_gamma(const SweepResult& sweep) {
    std::vector<double> xs, ys;
    double eps_lo = std::numeric_limits<double>::max(), eps_hi = 0.0;
    const double* phi0 = nullptr;
    for (const auto& row : sweep.rows) {
        if (!row.result.resolved) continue;
        if (phi0 && std::fabs(*phi0 - row.phi0) > 1e-15)
            throw std::invalid_argument("fit_gamma: mixed phi0 values in the sweep");
        phi0 = &row.phi0;
        if (row.result.delta_I == 0.0) continue;
        xs.push_back(1.0 / row.eps);
        ys.push_back(std::log(row.eps * std::fabs(row.result.delta_I)));
        eps_lo = std::min(eps_lo, row.eps);
        eps_hi = std::max(eps_hi, row.eps);
    }
    const int n = int(xs.size());
    if (n < 5)
        throw std::invalid_argument("fit_gamma: need at least 5 resolved points, have "
                                    + std::to_string(n));
    double sx = 0.0, sy = 0.0;
    for (int i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;

    GammaFit fit;
    fit.gamma_hat = -slope;
    fit.log_prefactor = intercept;
    fit.n_points = n;
    fit.eps_lo = eps_lo;
    fit.eps_hi = eps_hi;
    double ssr = 0.0, max_r = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = ys[i] - (intercept + slope * xs[i]);
        fit.residuals.push_back(r);
        ssr += r * r;
        max_r = std::max(max_r, std::fabs(r));
    }
    fit.stderr_gamma = n > 2 ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
    fit.poor_fit = max_r > 0.1;
    return fit;
}

struct PhaseScanRow {
    double phi0 = 0.0;
    DeltaIResult result;
};

struct PhaseScanResult {
    std::vector<PhaseScanRow> rows;
    double amplitude = 0.0;    // A in delta I ~ A sin(phi0 + delta)
    double phase_offset = 0.0; // delta
    double rel_residual = 0.0;
};

// Least-squares fit of a given (phi0, delta I) table to A sin(phi0 + delta).
inline PhaseScanResult fit_phase(std::vector<PhaseScanRow> rows) {
    PhaseScanResult out;
    out.rows = std::move(rows);
    // delta I ~ a sin(phi0) + b cos(phi0), linear least squares. Points with
    // the jump buried under noise near the sinusoid's zeros still carry
    // signal, so only points that failed outright are excluded.
    std::vector<std::size_t> used;
    for (std::size_t i = 0; i < out.rows.size(); ++i)
        if (out.rows[i].result.resolved
            || std::fabs(out.rows[i].result.delta_I) > 0.0)
            used.push_back(i);
    if (used.size() < 6)
        throw std::runtime_error("phase_scan: fewer than 6 usable points");
    double saa = 0.0, sbb = 0.0, sab = 0.0, say = 0.0, sby = 0.0;
    for (std::size_t i : used) {
        const double s = std::sin(out.rows[i].phi0), c = std::cos(out.rows[i].phi0);
        const double v = out.rows[i].result.delta_I;
        saa += s * s;
        sbb += c * c;
        sab += s * c;
        say += s * v;
        sby += c * v;
    }
    const double det = saa * sbb - sab * sab;
    if (det == 0.0)
        throw std::runtime_error("phase_scan: degenerate phase grid");
    const double a = (sby * (-sab) + say * sbb) / det;
    const double b = (sby * saa - say * sab) / det;
    out.amplitude = std::hypot(a, b);
    out.phase_offset = std::atan2(b, a);
    // relative residual: RMS misfit over the fitted sinusoid's amplitude
    double ss_res = 0.0;
    for (std::size_t i : used) {
        const double v = out.rows[i].result.delta_I;
        const double fitv = a * std::sin(out.rows[i].phi0) + b * std::cos(out.rows[i].phi0);
        ss_res += (v - fitv) * (v - fitv);
    }
    out.rel_residual =
        out.amplitude > 0.0 ? std::sqrt(ss_res / double(used.size())) / out.amplitude : 0.0;
    return out;
}

// Measures the jump over a grid of at least 8 equally spaced phases on
// [0, 2 pi) and fits the sinusoidal leading-order structure.
inline PhaseScanResult phase_scan(const ExampleSystem& system, double eta0, double eps,
                                  const std::vector<double>& phi0_grid,
                                  const SweepSettings& settings = {}) {
    if (phi0_grid.size() < 8)
        throw std::invalid_argument("phase_scan: need at least 8 phase points");
    std::vector<PhaseScanRow> rows(phi0_grid.size());
    detail::parallel_for(phi0_grid.size(), settings.threads, [&](std::size_t i) {
        PhaseScanRow& row = rows[i];
        row.phi0 = phi0_grid[i];
        try {
            const ReducedState state0{settings.I0, row.phi0, 0.0, eta0};
            row.result = measure_delta_I(system, state0, eps,
                                         settings.integration_for(eps));
        } catch (const std::exception&) {
            row.result.resolved = false;
        }
    });
    return fit_phase(std::move(rows));
}

} // namespace adiab

#endif
