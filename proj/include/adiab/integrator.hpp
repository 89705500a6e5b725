#ifndef ADIAB_INTEGRATOR_HPP
#define ADIAB_INTEGRATOR_HPP

// Long-horizon integration of the model fields. The default method is the
// Dormand-Prince 8(7) pair (DOP853 coefficients of Hairer-Norsett-Wanner).
// A Fehlberg-type 7(8) pair is unusable here: its embedded error estimate
// vanishes on quadrature-like equations, and the action equation
// dI/dt = -eps f g'(phi) is exactly of that type.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "adiab/model.hpp"

namespace adiab {

enum class Method { rk4_fixed, rk8_adaptive };

struct IntegrationSettings {
    Method method = Method::rk8_adaptive;
    double step = 1e-2;       // rk4_fixed only
    double abs_tol = 1e-12;   // rk8_adaptive only
    double rel_tol = 1e-12;
    double t_min = -600.0;
    double t_max = 600.0;
    int sample_stride = 1;          // retain every N-th accepted step
    int conserved_check_stride = 1; // monitor K every N accepted steps

    void validate() const {
        if (!(t_min < 0.0 && 0.0 < t_max))
            throw std::invalid_argument("IntegrationSettings: need t_min < 0 < t_max");
        if (method == Method::rk8_adaptive) {
            for (double tol : {abs_tol, rel_tol})
                if (!(tol > 1e-15 && tol < 1e-3))
                    throw std::invalid_argument(
                        "IntegrationSettings: tolerances must lie in (1e-15, 1e-3)");
        } else if (!(step > 0.0)) {
            throw std::invalid_argument("IntegrationSettings: step must be positive");
        }
        if (sample_stride < 1 || conserved_check_stride < 1)
            throw std::invalid_argument("IntegrationSettings: strides must be >= 1");
    }

    // Span chosen so |xi| = eps |t| reaches xi_reach at the ends; the
    // envelope tail 4 eta e^{-sqrt(2 eta) xi_reach} is then far below
    // round-off and finite-horizon truncation is negligible.
    static IntegrationSettings for_epsilon(double eps, double xi_reach = 60.0) {
        if (!(eps > 0.0))
            throw std::invalid_argument("for_epsilon: eps must be positive");
        IntegrationSettings s;
        s.t_min = -xi_reach / eps;
        s.t_max = xi_reach / eps;
        return s;
    }
};

struct Trajectory {
    std::vector<double> times;           // strictly increasing, straddles 0
    std::vector<ReducedState> states;
    std::vector<double> K_values;        // K at each retained sample
    double max_K_drift = 0.0;            // max |K(t) - K(0)| over monitored steps
    double accumulated_delta_I = 0.0;    // I(t_max) - I(t_min), compensated sum
};

// Neumaier-compensated accumulator: worst-case error independent of the
// number of terms at fixed magnitude.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double accumulate_action(std::span<const double> increments) {
    CompensatedSum acc;
    for (double x : increments) {
        if (!std::isfinite(x))
            throw std::invalid_argument("accumulate_action: non-finite increment");
        acc.add(x);
    }
    return acc.value();
}

namespace detail {

// One DOP853 step: 12 stages, 8th-order solution, combined 5th/3rd order
// error estimate. Coefficients from Hairer, Norsett & Wanner, "Solving
// Ordinary Differential Equations I", DOP853.F.
template <std::size_t N, class F>
struct Dop853 {
    using Vec = std::array<double, N>;

    F f;
    double atol, rtol;

    Vec k1{}, k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, k8{}, k9{}, k10{}, ktmp{};

    // Computes the 8th-order update y8 = y + h * sum(b_i k_i) and the scaled
    // error norm. k1 must hold f(y) on entry; on acceptance k1 is refreshed
    // by the caller.
    double stage(const Vec& y, double h, Vec& y8, Vec& increment) {
        constexpr double c2 = 0.526001519587677318785587544488e-01,
                         c3 = 0.789002279381515978178381316732e-01,
                         c4 = 0.118350341907227396726757197510e+00,
                         c5 = 0.281649658092772603273242802490e+00,
                         c6 = 1.0 / 3.0, c7 = 0.25,
                         c8 = 0.307692307692307692307692307692e+00,
                         c9 = 0.651282051282051282051282051282e+00,
                         c10 = 0.6,
                         c11 = 0.857142857142857142857142857142e+00;
        (void)c2; (void)c3; (void)c4; (void)c5; (void)c6; (void)c7;
        (void)c8; (void)c9; (void)c10; (void)c11;
        constexpr double b1 = 5.42937341165687622380535766363e-2,
                         b6 = 4.45031289275240888144113950566e0,
                         b7 = 1.89151789931450038304281599044e0,
                         b8 = -5.8012039600105847814672114227e0,
                         b9 = 3.1116436695781989440891606237e-1,
                         b10 = -1.52160949662516078556178806805e-1,
                         b11 = 2.01365400804030348374776537501e-1,
                         b12 = 4.47106157277725905176885569043e-2;
        constexpr double a21 = 5.26001519587677318785587544488e-2,
                         a31 = 1.97250569845378994544595329183e-2,
                         a32 = 5.91751709536136983633785987549e-2,
                         a41 = 2.95875854768068491816892993775e-2,
                         a43 = 8.87627564304205475450678981324e-2,
                         a51 = 2.41365134159266685502369798665e-1,
                         a53 = -8.84549479328286085344864962717e-1,
                         a54 = 9.24834003261792003115737966543e-1,
                         a61 = 3.7037037037037037037037037037e-2,
                         a64 = 1.70828608729473871279604482173e-1,
                         a65 = 1.25467687566822425016691814123e-1,
                         a71 = 3.7109375e-2,
                         a74 = 1.70252211019544039314978060272e-1,
                         a75 = 6.02165389804559606850219397283e-2,
                         a76 = -1.7578125e-2,
                         a81 = 3.70920001185047927108779319836e-2,
                         a84 = 1.70383925712239993810214054705e-1,
                         a85 = 1.07262030446373284651809199168e-1,
                         a86 = -1.53194377486244017527936158236e-2,
                         a87 = 8.27378916381402288758473766002e-3,
                         a91 = 6.24110958716075717114429577812e-1,
                         a94 = -3.36089262944694129406857109825e0,
                         a95 = -8.68219346841726006818189891453e-1,
                         a96 = 2.75920996994467083049415600797e1,
                         a97 = 2.01540675504778934086186788979e1,
                         a98 = -4.34898841810699588477366255144e1,
                         a101 = 4.77662536438264365890433908527e-1,
                         a104 = -2.48811461997166764192642586468e0,
                         a105 = -5.90290826836842996371446475743e-1,
                         a106 = 2.12300514481811942347288949897e1,
                         a107 = 1.52792336328824235832596922938e1,
                         a108 = -3.32882109689848629194453265587e1,
                         a109 = -2.03312017085086261358222928593e-2,
                         a111 = -9.3714243008598732571704021658e-1,
                         a114 = 5.18637242884406370830023853209e0,
                         a115 = 1.09143734899672957818500254654e0,
                         a116 = -8.14978701074692612513997267357e0,
                         a117 = -1.85200656599969598641566180701e1,
                         a118 = 2.27394870993505042818970056734e1,
                         a119 = 2.49360555267965238987089396762e0,
                         a1110 = -3.0467644718982195003823669022e0,
                         a121 = 2.27331014751653820792359768449e0,
                         a124 = -1.05344954667372501984066689879e1,
                         a125 = -2.00087205822486249909675718444e0,
                         a126 = -1.79589318631187989172765950534e1,
                         a127 = 2.79488845294199600508499808837e1,
                         a128 = -2.85899827713502369474065508674e0,
                         a129 = -8.87285693353062954433549289258e0,
                         a1210 = 1.23605671757943030647266201528e1,
                         a1211 = 6.43392746015763530355970484046e-1;

        Vec w;
        for (std::size_t i = 0; i < N; ++i) w[i] = y[i] + h * a21 * k1[i];
        f(w, k2);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        f(w, k3);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y[i] + h * (a41 * k1[i] + a43 * k3[i]);
        f(w, k4);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y[i] + h * (a51 * k1[i] + a53 * k3[i] + a54 * k4[i]);
        f(w, k5);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y[i] + h * (a61 * k1[i] + a64 * k4[i] + a65 * k5[i]);
        f(w, k6);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y[i] + h * (a71 * k1[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        f(w, k7);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y[i] + h * (a81 * k1[i] + a84 * k4[i] + a85 * k5[i] + a86 * k6[i]
                               + a87 * k7[i]);
        f(w, k8);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y[i] + h * (a91 * k1[i] + a94 * k4[i] + a95 * k5[i] + a96 * k6[i]
                               + a97 * k7[i] + a98 * k8[i]);
        f(w, k9);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y[i] + h * (a101 * k1[i] + a104 * k4[i] + a105 * k5[i] + a106 * k6[i]
                               + a107 * k7[i] + a108 * k8[i] + a109 * k9[i]);
        f(w, k10);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y[i] + h * (a111 * k1[i] + a114 * k4[i] + a115 * k5[i] + a116 * k6[i]
                               + a117 * k7[i] + a118 * k8[i] + a119 * k9[i]
                               + a1110 * k10[i]);
        f(w, k2);  // stage 11 reuses k2 storage
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y[i] + h * (a121 * k1[i] + a124 * k4[i] + a125 * k5[i] + a126 * k6[i]
                               + a127 * k7[i] + a128 * k8[i] + a129 * k9[i]
                               + a1210 * k10[i] + a1211 * k2[i]);
        f(w, k3);  // stage 12 reuses k3 storage

        for (std::size_t i = 0; i < N; ++i) {
            ktmp[i] = b1 * k1[i] + b6 * k6[i] + b7 * k7[i] + b8 * k8[i] + b9 * k9[i]
                      + b10 * k10[i] + b11 * k2[i] + b12 * k3[i];
            increment[i] = h * ktmp[i];
            y8[i] = y[i] + increment[i];
        }
        return std::fabs(h) * error_norm(y, y8);
    }

    double error_norm(const Vec& y, const Vec& y8) const {
        constexpr double bhh1 = 0.244094488188976377952755905512e+00,
                         bhh2 = 0.733846688281611857341361741547e+00,
                         bhh3 = 0.220588235294117647058823529412e-01;
        constexpr double er1 = 0.1312004499419488073250102996e-01,
                         er6 = -0.1225156446376204440720569753e+01,
                         er7 = -0.4957589496572501915214079952e+00,
                         er8 = 0.1664377182454986536961530415e+01,
                         er9 = -0.3503288487499736816886487290e+00,
                         er10 = 0.3341791187130174790297318841e+00,
                         er11 = 0.8192320648511571246570742613e-01,
                         er12 = -0.2235530786388629525884427845e-01;
        double err5 = 0.0, err3 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sk = 1.0 / (atol + rtol * std::max(std::fabs(y[i]),
                                                            std::fabs(y8[i])));
            double s = ktmp[i] - bhh1 * k1[i] - bhh2 * k9[i] - bhh3 * k3[i];
            s *= sk;
            err3 += s * s;
            s = er1 * k1[i] + er6 * k6[i] + er7 * k7[i] + er8 * k8[i] + er9 * k9[i]
                + er10 * k10[i] + er11 * k2[i] + er12 * k3[i];
            s *= sk;
            err5 += s * s;
        }
        double deno = err5 + 0.01 * err3;
        if (deno <= 0.0) deno = double(N);
        else deno *= double(N);
        return err5 * std::sqrt(1.0 / deno);
    }

    // Hairer's starting step size heuristic.
    double initial_step(const Vec& y, double hmax, double posneg) {
        double dnf = 0.0, dny = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sk = atol + rtol * std::fabs(y[i]);
            const double a = k1[i] / sk, b = y[i] / sk;
            dnf += a * a;
            dny += b * b;
        }
        double h = (dnf <= 1e-10 || dny <= 1e-10)
                       ? 1e-6
                       : std::sqrt(dny / dnf) * 0.01;
        h = std::min(h, hmax) * posneg;
        Vec w;
        for (std::size_t i = 0; i < N; ++i) w[i] = y[i] + h * k1[i];
        f(w, k2);
        double der2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double s = (k2[i] - k1[i]) / (atol + rtol * std::fabs(y[i]));
            der2 += s * s;
        }
        der2 = std::sqrt(der2) / std::fabs(h);
        const double der12 = std::max(der2, std::sqrt(dnf));
        const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::fabs(h) * 1e-3)
                                         : std::pow(0.01 / der12, 0.125);
        return std::min(100.0 * std::fabs(h), std::min(h1, hmax)) * posneg;
    }
};

// Drives a DOP853 integration from t0 to t1 (either direction). The
// observer is called after each accepted step as
// observe(t, y, increment, accepted_step_index).
template <std::size_t N, class F, class Obs>
void dop853_integrate(F&& f, std::array<double, N>& y, double t0, double t1,
                      double atol, double rtol, Obs&& observe) {
    if (t0 == t1) return;
    Dop853<N, F&> stepper{f, atol, rtol};
    const double posneg = t1 > t0 ? 1.0 : -1.0;
    const double hmax = std::fabs(t1 - t0);
    constexpr double safe = 0.9, fac1 = 1.0 / 3.0, fac2 = 6.0, expo1 = 1.0 / 8.0;
    constexpr double uround = 2.3e-16;
    constexpr long max_steps = 100000000L;

    double t = t0;
    f(y, stepper.k1);
    double h = stepper.initial_step(y, hmax, posneg);
    double facold = 1e-4;
    long naccpt = 0;
    for (long nstep = 0;; ++nstep) {
        if (nstep > max_steps)
            throw std::runtime_error("dop853: step limit exceeded at t = "
                                     + std::to_string(t));
        if (0.1 * std::fabs(h) <= std::fabs(t) * uround)
            throw std::runtime_error("dop853: step size underflow, last good t = "
                                     + std::to_string(t));
        bool last = false;
        if ((t + 1.01 * h - t1) * posneg > 0.0) {
            h = t1 - t;
            last = true;
        }
        std::array<double, N> y8, inc;
        const double err = stepper.stage(y, h, y8, inc);
        const double fac11 = std::pow(err, expo1);
        double fac = std::clamp(fac11 / safe, 1.0 / fac2, 1.0 / fac1);
        if (err <= 1.0) {
            facold = std::max(err, 1e-4);
            t += h;
            y = y8;
            f(y, stepper.k1);
            ++naccpt;
            observe(t, y, inc, naccpt);
            if (last) return;
            h /= fac;
        } else {
            h /= std::min(1.0 / fac1, fac11 / safe);
            last = false;
        }
        (void)facold;
    }
}

// Classical fixed-step RK4 from t0 to t1 with uniform steps (count chosen so
// the grid lands on t1 exactly).
template <std::size_t N, class F, class Obs>
void rk4_integrate(F&& f, std::array<double, N>& y, double t0, double t1,
                   double step, Obs&& observe) {
    if (t0 == t1) return;
    const double span = t1 - t0;
    const long n = std::max(1L, std::lround(std::fabs(span) / step));
    const double h = span / double(n);
    std::array<double, N> k1, k2, k3, k4, w, inc;
    for (long i = 0; i < n; ++i) {
        const double t = t0 + h * double(i);
        f(y, k1);
        for (std::size_t j = 0; j < N; ++j) w[j] = y[j] + 0.5 * h * k1[j];
        f(w, k2);
        for (std::size_t j = 0; j < N; ++j) w[j] = y[j] + 0.5 * h * k2[j];
        f(w, k3);
        for (std::size_t j = 0; j < N; ++j) w[j] = y[j] + h * k3[j];
        f(w, k4);
        for (std::size_t j = 0; j < N; ++j) {
            inc[j] = h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            y[j] += inc[j];
        }
        observe(i + 1 == n ? t1 : t + h, y, inc, i + 1);
    }
}

inline std::array<double, 4> pack(const ReducedState& s) {
    return {s.I, s.phi, s.xi, s.eta};
}
inline ReducedState unpack(const std::array<double, 4>& v) {
    return {v[0], v[1], v[2], v[3]};
}

} // namespace detail

// Integrates the given system through the passage: backward from the initial
// condition at t = 0 to t_min, forward to t_max, then concatenates. state0
// appears at t = 0 exactly (it is the initial condition, not an interpolant).
//
// System must provide vector_field(ReducedState, eps) and
// hamiltonian_K(ReducedState, eps).
template <class System>
Trajectory integrate(const System& system, const ReducedState& state0, double eps,
                     const IntegrationSettings& settings) {
    settings.validate();
    if (eps < 0.0)
        throw std::invalid_argument("integrate: eps must be non-negative");

    auto rhs = [&](const std::array<double, 4>& v, std::array<double, 4>& dv) {
        const ReducedState d = system.vector_field(detail::unpack(v), eps);
        dv = detail::pack(d);
    };

    const double K0 = system.hamiltonian_K(state0, eps);
    Trajectory traj;
    traj.max_K_drift = 0.0;

    struct Pass {
        std::vector<double> times;
        std::vector<ReducedState> states;
        std::vector<double> K;
        CompensatedSum dI;
    };

    auto run = [&](double t_end) {
        Pass pass;
        auto observe = [&](double t, const std::array<double, 4>& v,
                           const std::array<double, 4>& inc, long naccpt) {
            pass.dI.add(inc[0]);
            const bool final_step = (t == t_end);
            if (naccpt % settings.conserved_check_stride == 0 || final_step) {
                const double K = system.hamiltonian_K(detail::unpack(v), eps);
                traj.max_K_drift = std::max(traj.max_K_drift, std::fabs(K - K0));
            }
            if (naccpt % settings.sample_stride == 0 || final_step) {
                if (!pass.times.empty() && pass.times.back() == t) return;
                pass.times.push_back(t);
                pass.states.push_back(detail::unpack(v));
                pass.K.push_back(system.hamiltonian_K(detail::unpack(v), eps));
            }
        };
        std::array<double, 4> y = detail::pack(state0);
        try {
            if (settings.method == Method::rk8_adaptive)
                detail::dop853_integrate(rhs, y, 0.0, t_end, settings.abs_tol,
                                         settings.rel_tol, observe);
            else
                detail::rk4_integrate(rhs, y, 0.0, t_end, settings.step, observe);
        } catch (const std::domain_error& e) {
            const double t_last = pass.times.empty() ? 0.0 : pass.times.back();
            throw std::domain_error(std::string(e.what()) + " (last accepted t = "
                                    + std::to_string(t_last) + ")");
        }
        return pass;
    };

    Pass backward = run(settings.t_min);
    Pass forward = run(settings.t_max);

    traj.times.reserve(backward.times.size() + forward.times.size() + 1);
    traj.states.reserve(traj.times.capacity());
    traj.K_values.reserve(traj.times.capacity());
    for (std::size_t i = backward.times.size(); i-- > 0;) {
        traj.times.push_back(backward.times[i]);
        traj.states.push_back(backward.states[i]);
        traj.K_values.push_back(backward.K[i]);
    }
    traj.times.push_back(0.0);
    traj.states.push_back(state0);
    traj.K_values.push_back(K0);
    for (std::size_t i = 0; i < forward.times.size(); ++i) {
        traj.times.push_back(forward.times[i]);
        traj.states.push_back(forward.states[i]);
        traj.K_values.push_back(forward.K[i]);
    }
    // I(t_max) - I(t_min): forward increments minus backward increments
    traj.accumulated_delta_I = forward.dI.value() - backward.dI.value();
    return traj;
}

} // namespace adiab

#endif
