#ifndef ADIAB_ACTION_HPP
#define ADIAB_ACTION_HPP

// Action-angle utilities for a frozen one-degree-of-freedom system E(p, q):
// the action as orbit-enclosed area over 2*pi, and the period/frequency,
// both by quadrature with square-root regularization at the turning points.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "adiab/detail/quadrature.hpp"

namespace adiab {

struct FrozenFastSystem {
    std::function<double(double p, double q)> energy;
    std::function<double(double p, double q)> dE_dp;
    std::function<double(double p, double q)> dE_dq;
    // Bracketing box: closed orbits of interest lie in
    // q in [q_min, q_max], |p| <= p_max.
    double q_min, q_max, p_max;
};

struct TurningPoints {
    double q_left, q_right;
};

namespace detail {

// Root of scalar function on [a, b] by bisection, polished by Newton when a
// derivative is supplied.
template <class F, class DF>
double bisect_newton(F&& f, DF&& df, double a, double b) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0)
        throw std::runtime_error("bisect_newton: no sign change on bracket");
    for (int i = 0; i < 80; ++i) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if (fa * fm < 0.0) {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    double x = 0.5 * (a + b);
    for (int i = 0; i < 4; ++i) {
        const double d = df(x);
        if (d == 0.0) break;
        const double step = f(x) / d;
        if (x - step < a || x - step > b) break;
        x -= step;
    }
    return x;
}

} // namespace detail

// Turning points: the two roots of E(0, q) = h bracketing the well. Located
// by scanning for sign changes of E(0, q) - h, then bisection + Newton.
inline TurningPoints find_turning_points(const FrozenFastSystem& sys, double h) {
    const int n_scan = 2000;
    auto resid = [&](double q) { return sys.energy(0.0, q) - h; };
    double q_prev = sys.q_min;
    double r_prev = resid(q_prev);
    double roots[2];
    int found = 0;
    for (int i = 1; i <= n_scan && found < 2; ++i) {
        const double q = sys.q_min + (sys.q_max - sys.q_min) * i / n_scan;
        const double r = resid(q);
        if (r_prev == 0.0 || r_prev * r < 0.0) {
            roots[found++] = detail::bisect_newton(
                resid, [&](double qq) { return sys.dE_dq(0.0, qq); }, q_prev, q);
        }
        q_prev = q;
        r_prev = r;
    }
    if (found != 2)
        throw std::runtime_error(
            "find_turning_points: level set E(0,q) = h does not bound a closed orbit "
            "in the box (found " + std::to_string(found) + " turning points)");
    return {roots[0], roots[1]};
}

namespace detail {

// Momentum branch at fixed q: the root of E(p, q) = h with p in (0, p_max]
// (sign > 0) or [-p_max, 0) (sign < 0).
inline double momentum_branch(const FrozenFastSystem& sys, double h, double q,
                              int sign) {
    auto resid = [&](double p) { return sys.energy(p, q) - h; };
    const double p_far = sign > 0 ? sys.p_max : -sys.p_max;
    if (resid(0.0) * resid(p_far) > 0.0)
        throw std::runtime_error("momentum_branch: no root in the momentum box");
    return bisect_newton(resid, [&](double p) { return sys.dE_dp(p, q); },
                         std::min(0.0, p_far), std::max(0.0, p_far));
}

// Integrates G over [q_left, q_right] with the substitution q = end + s^2 on
// each half, which regularizes inverse-square-root turning-point behavior.
template <class G>
double turning_regularized_integral(G&& g, double q_left, double q_right,
                                    double rel_tol, bool* tol_met) {
    const double q_mid = 0.5 * (q_left + q_right);
    bool ok_l = true, ok_r = true;
    const double s_l = std::sqrt(q_mid - q_left);
    const double left = adaptive_gl(
        [&](double s) { return 2.0 * s * g(q_left + s * s); }, 0.0, s_l, rel_tol, 0.0,
        &ok_l);
    const double s_r = std::sqrt(q_right - q_mid);
    const double right = adaptive_gl(
        [&](double s) { return 2.0 * s * g(q_right - s * s); }, 0.0, s_r, rel_tol, 0.0,
        &ok_r);
    if (tol_met) *tol_met = ok_l && ok_r;
    return left + right;
}

} // namespace detail

// Action I(h) = (area enclosed by the orbit E = h) / 2*pi, via
// I = (1/2pi) * integral of (p_plus(q) - p_minus(q)) dq.
// Sets *tol_met = false if the quadrature tolerance was not reached.
inline double action_of_energy(const FrozenFastSystem& sys, double h,
                               bool* tol_met = nullptr) {
    const TurningPoints tp = find_turning_points(sys, h);
    auto width = [&](double q) {
        return detail::momentum_branch(sys, h, q, +1)
               - detail::momentum_branch(sys, h, q, -1);
    };
    const double area =
        detail::turning_regularized_integral(width, tp.q_left, tp.q_right, 1e-11,
                                             tol_met);
    return area / (2.0 * detail::pi_v<double>);
}

// Period T(h) = closed-orbit integral of dq / |dE/dp|, both momentum
// branches contributing.
inline double period_of_energy(const FrozenFastSystem& sys, double h,
                               bool* tol_met = nullptr) {
    const TurningPoints tp = find_turning_points(sys, h);
    auto g = [&](double q) {
        const double vp = sys.dE_dp(detail::momentum_branch(sys, h, q, +1), q);
        const double vm = sys.dE_dp(detail::momentum_branch(sys, h, q, -1), q);
        if (vp == 0.0 || vm == 0.0)
            throw std::runtime_error("period_of_energy: dE/dp vanished on the orbit "
                                     "interior (turning-point regularization failed)");
        return 1.0 / std::fabs(vp) + 1.0 / std::fabs(vm);
    };
    return detail::turning_regularized_integral(g, tp.q_left, tp.q_right, 1e-11,
                                                tol_met);
}

inline double frequency_of_energy(const FrozenFastSystem& sys, double h) {
    return 2.0 * detail::pi_v<double> / period_of_energy(sys, h);
}

} // namespace adiab

#endif
