#ifndef ADIAB_DETAIL_QUADRATURE_HPP
#define ADIAB_DETAIL_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "adiab/detail/real.hpp"

namespace adiab::detail {

// Gauss-Legendre nodes/weights on [-1, 1], computed once per order by Newton
// iteration on P_n with the Chebyshev-angle starting guess.
template <std::size_t N>
struct GaussLegendre {
    std::array<double, N> node{}, weight{};

    GaussLegendre() {
        for (std::size_t i = 0; i < N; ++i) {
            double x = std::cos(pi_v<double> * (double(i) + 0.75) / (double(N) + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (std::size_t j = 2; j <= N; ++j) {
                    const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                    p0 = p1;
                    p1 = p2;
                }
                pp = N * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / pp;
                x -= dx;
                if (std::fabs(dx) < 1e-16) break;
            }
            node[i] = x;
            weight[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        }
    }

    template <class F>
    double integrate(F&& f, double a, double b) const {
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double sum = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            sum += weight[i] * f(mid + half * node[i]);
        return half * sum;
    }
};

inline const GaussLegendre<32>& gl32() {
    static const GaussLegendre<32> table;
    return table;
}

// Adaptive bisection on top of GL32 panels. Returns the integral; sets
// *tol_met = false instead of throwing when the recursion depth runs out.
template <class F>
double adaptive_gl(F&& f, double a, double b, double rel_tol, double abs_floor,
                   bool* tol_met = nullptr, int depth = 24) {
    const auto& q = gl32();
    struct Rec {
        const GaussLegendre<32>& q;
        double rel_tol, abs_floor;
        bool ok = true;
        double run(F& f, double a, double b, double whole, int depth) {
            const double mid = 0.5 * (a + b);
            const double left = q.integrate(f, a, mid);
            const double right = q.integrate(f, mid, b);
            const double sum = left + right;
            const double err = std::fabs(sum - whole);
            if (err <= rel_tol * std::fabs(sum) + abs_floor) return sum;
            if (depth <= 0) {
                ok = false;
                return sum;
            }
            return run(f, a, mid, left, depth - 1) + run(f, mid, b, right, depth - 1);
        }
    } rec{q, rel_tol, abs_floor};
    const double whole = q.integrate(f, a, b);
    const double result = rec.run(f, a, b, whole, depth);
    if (tol_met) *tol_met = rec.ok;
    return result;
}

} // namespace adiab::detail

#endif
