#ifndef ADIAB_MODEL_HPP
#define ADIAB_MODEL_HPP

// Slow-fast model family: a fast rotator (I, phi) coupled to slow motion in
// an exponential potential. In flow-box coordinates (xi, eta) the coupling
// envelope is f(xi, eta) = eta / cosh^2(sqrt(eta/2) xi), and the Hamiltonian
// is K = omega*I + eta + eps * f(xi, eta) * g(phi).

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "adiab/detail/real.hpp"

namespace adiab {

// 2*pi-periodic coupling g(phi), normalized so that sup |g| <= 1.
class GCoupling {
public:
    enum class Kind { cosine, fourier };

    struct Harmonic {
        int k;           // harmonic index, >= 1
        double cos_amp;
        double sin_amp;
    };

    static GCoupling cosine() {
        GCoupling g;
        g.kind_ = Kind::cosine;
        g.harmonics_ = {{1, 1.0, 0.0}};
        return g;
    }

    static GCoupling fourier(std::vector<Harmonic> terms) {
        if (terms.empty())
            throw std::invalid_argument("GCoupling: empty harmonic list");
        double amp_sum = 0.0;
        for (const auto& h : terms) {
            if (h.k < 1)
                throw std::invalid_argument("GCoupling: harmonic index must be >= 1");
            amp_sum += std::hypot(h.cos_amp, h.sin_amp);
        }
        if (amp_sum <= 0.0)
            throw std::invalid_argument("GCoupling: all amplitudes vanish");
        // sup |sum a_k cos + b_k sin| <= sum hypot(a_k, b_k); scale that to 1.
        if (amp_sum > 1.0) {
            for (auto& h : terms) {
                h.cos_amp /= amp_sum;
                h.sin_amp /= amp_sum;
            }
        }
        GCoupling g;
        g.kind_ = Kind::fourier;
        g.harmonics_ = std::move(terms);
        return g;
    }

    Kind kind() const { return kind_; }
    const std::vector<Harmonic>& harmonics() const { return harmonics_; }

    template <class T>
    T eval(T phi) const {
        const T two_pi = T(2) * detail::pi_v<T>;
        const T r = detail::r_remainder(phi, two_pi);
        T sum = T(0);
        for (const auto& h : harmonics_)
            sum += T(h.cos_amp) * detail::r_cos(T(h.k) * r)
                 + T(h.sin_amp) * detail::r_sin(T(h.k) * r);
        return sum;
    }

    template <class T>
    T eval_derivative(T phi) const {
        const T two_pi = T(2) * detail::pi_v<T>;
        const T r = detail::r_remainder(phi, two_pi);
        T sum = T(0);
        for (const auto& h : harmonics_)
            sum += T(h.k) * (T(h.sin_amp) * detail::r_cos(T(h.k) * r)
                           - T(h.cos_amp) * detail::r_sin(T(h.k) * r));
        return sum;
    }

    double operator()(double phi) const { return eval(phi); }
    double derivative(double phi) const { return eval_derivative(phi); }

private:
    GCoupling() = default;
    Kind kind_ = Kind::cosine;
    std::vector<Harmonic> harmonics_;
};

// Reduced coordinates. phi is stored unwrapped; eta must stay positive for
// the closed-form solution to be real.
struct ReducedState {
    double I = 0.0;    // action
    double phi = 0.0;  // angle, radians, unwrapped
    double xi = 0.0;   // slow flow-box coordinate
    double eta = 0.0;  // slow energy
};

struct CartesianState {
    double x = 0.0;
    double y = 0.0;
    double I = 0.0;
    double phi = 0.0;
};

namespace detail {

inline void require_eta_positive(double eta, const char* who) {
    if (!(eta > 0.0))
        throw std::domain_error(std::string(who) + ": eta must be positive, got "
                                + std::to_string(eta));
}

// sech^2 via the overflow-safe exponential form, valid for all arguments.
inline double sech2_exp_form(double z) {
    const double e = std::exp(-2.0 * std::fabs(z));
    const double d = 1.0 + e;
    return 4.0 * e / (d * d);
}

} // namespace detail

// f(xi, eta) = eta / cosh^2(sqrt(eta/2) xi). Direct cosh form up to
// |sqrt(eta/2) xi| = 20, exponential form beyond (cosh^2 would overflow
// near 710); the two agree to round-off at the switch.
inline double f_envelope(double xi, double eta) {
    detail::require_eta_positive(eta, "f_envelope");
    const double a = std::sqrt(eta / 2.0);
    const double z = a * xi;
    if (std::fabs(z) <= 20.0) {
        const double c = std::cosh(z);
        return eta / (c * c);
    }
    return eta * detail::sech2_exp_form(z);
}

// Closed-form partials (df/dxi, df/deta).
//   df/dxi  = -2 a f tanh(a xi),            a = sqrt(eta/2)
//   df/deta = (f/eta) (1 - a xi tanh(a xi))
inline std::pair<double, double> f_partials(double xi, double eta) {
    detail::require_eta_positive(eta, "f_partials");
    const double a = std::sqrt(eta / 2.0);
    const double t = std::tanh(a * xi);
    const double f = f_envelope(xi, eta);
    const double df_dxi = -2.0 * a * f * t;
    const double df_deta = (f / eta) * (1.0 - a * xi * t);
    return {df_dxi, df_deta};
}

// Closed-form slow solution through the passage:
//   x = log(cosh^2(a xi) / eta),  y = sqrt(2 eta) tanh(a xi).
// Satisfies y^2/2 + e^{-x} = eta identically.
inline std::pair<double, double> xy_from_flowbox(double xi, double eta) {
    detail::require_eta_positive(eta, "xy_from_flowbox");
    const double a = std::sqrt(eta / 2.0);
    const double z = a * xi;
    // log cosh z, safe for large |z|
    const double log_cosh = std::fabs(z) + std::log1p(std::exp(-2.0 * std::fabs(z)))
                            - std::log(2.0);
    const double x = 2.0 * log_cosh - std::log(eta);
    const double y = std::sqrt(2.0 * eta) * std::tanh(z);
    return {x, y};
}

// Inverse of xy_from_flowbox: eta follows from the energy identity, xi from
// the tanh branch. The ratio y/sqrt(2 eta) lies in (-1, 1) for exact inputs;
// clamp guards round-off at the boundary.
inline std::pair<double, double> flowbox_from_xy(double x, double y) {
    const double eta = 0.5 * y * y + std::exp(-x);
    detail::require_eta_positive(eta, "flowbox_from_xy");
    double u = y / std::sqrt(2.0 * eta);
    const double lim = 1.0 - 1e-15;
    if (u > lim) u = lim;
    if (u < -lim) u = -lim;
    const double a = std::sqrt(eta / 2.0);
    const double xi = std::atanh(u) / a;
    return {xi, eta};
}

// The explicit model: fast frequency omega, coupling g, slow potential
// V0 = V1 = e^{-x} fixed.
class ExampleSystem {
public:
    explicit ExampleSystem(double omega, GCoupling g = GCoupling::cosine())
        : omega_(omega), g_(std::move(g)) {
        if (!(omega > 0.0))
            throw std::invalid_argument("ExampleSystem: omega must be positive");
    }

    double omega() const { return omega_; }
    const GCoupling& coupling() const { return g_; }

    // Time derivatives (dI, dphi, dxi, deta):
    //   dxi  = eps + eps^2 df/deta g(phi)
    //   deta = -eps^2 df/dxi g(phi)
    //   dI   = -eps f g'(phi)
    //   dphi = omega
    ReducedState vector_field(const ReducedState& s, double eps) const {
        const auto [df_dxi, df_deta] = f_partials(s.xi, s.eta);
        const double g = g_(s.phi);
        ReducedState d;
        d.xi = eps + eps * eps * df_deta * g;
        d.eta = -eps * eps * df_dxi * g;
        d.I = -eps * f_envelope(s.xi, s.eta) * g_.derivative(s.phi);
        d.phi = omega_;
        return d;
    }

    // K = omega I + eta + eps f(xi, eta) g(phi); exactly conserved.
    double hamiltonian_K(const ReducedState& s, double eps) const {
        return omega_ * s.I + s.eta + eps * f_envelope(s.xi, s.eta) * g_(s.phi);
    }

private:
    double omega_;
    GCoupling g_;
};

// A user-supplied system in standard form H = H0(I,y,x) + eps H1(I,phi,y,x),
// with all first partials and a finite domain box.
struct DomainBox {
    double I_min, I_max;
    double y_min, y_max;
    double x_min, x_max;
};

struct GenericSlowFast {
    std::function<double(double I, double y, double x)> H0, dH0_dI, dH0_dy, dH0_dx;
    std::function<double(double I, double phi, double y, double x)> H1, dH1_dI,
        dH1_dphi, dH1_dy, dH1_dx;
    DomainBox box;

    // dH0/dI must not vanish in the box (checked on a sample grid).
    void validate(int samples_per_axis = 7) const {
        const int n = samples_per_axis;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    const double I = box.I_min + (box.I_max - box.I_min) * i / (n - 1);
                    const double y = box.y_min + (box.y_max - box.y_min) * j / (n - 1);
                    const double x = box.x_min + (box.x_max - box.x_min) * k / (n - 1);
                    if (dH0_dI(I, y, x) == 0.0)
                        throw std::invalid_argument(
                            "GenericSlowFast: dH0/dI vanishes inside the domain box");
                }
    }
};

namespace detail {

inline void check_in_box(double v, double lo, double hi, const char* name) {
    if (v < lo || v > hi)
        throw std::domain_error(std::string("generic_vector_field: coordinate ") + name
                                + " = " + std::to_string(v) + " outside domain box ["
                                + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

} // namespace detail

// Standard-form equations of motion; returns derivatives (dx, dy, dI, dphi).
inline CartesianState generic_vector_field(const GenericSlowFast& sys,
                                           const CartesianState& s, double eps) {
    detail::check_in_box(s.I, sys.box.I_min, sys.box.I_max, "I");
    detail::check_in_box(s.y, sys.box.y_min, sys.box.y_max, "y");
    detail::check_in_box(s.x, sys.box.x_min, sys.box.x_max, "x");
    CartesianState d;
    d.I = -eps * sys.dH1_dphi(s.I, s.phi, s.y, s.x);
    d.phi = sys.dH0_dI(s.I, s.y, s.x) + eps * sys.dH1_dI(s.I, s.phi, s.y, s.x);
    d.y = -eps * (sys.dH0_dx(s.I, s.y, s.x) + eps * sys.dH1_dx(s.I, s.phi, s.y, s.x));
    d.x = eps * (sys.dH0_dy(s.I, s.y, s.x) + eps * sys.dH1_dy(s.I, s.phi, s.y, s.x));
    return d;
}

// The explicit model written in (x, y) coordinates:
//   H0 = omega I + y^2/2 + e^{-x},  H1 = g(phi) e^{-x}.
inline GenericSlowFast make_cartesian_example(const ExampleSystem& sys,
                                              const DomainBox& box) {
    const double omega = sys.omega();
    const GCoupling g = sys.coupling();
    GenericSlowFast out;
    out.H0 = [omega](double I, double y, double x) {
        return omega * I + 0.5 * y * y + std::exp(-x);
    };
    out.dH0_dI = [omega](double, double, double) { return omega; };
    out.dH0_dy = [](double, double y, double) { return y; };
    out.dH0_dx = [](double, double, double x) { return -std::exp(-x); };
    out.H1 = [g](double, double phi, double, double x) { return g(phi) * std::exp(-x); };
    out.dH1_dI = [](double, double, double, double) { return 0.0; };
    out.dH1_dphi = [g](double, double phi, double, double x) {
        return g.derivative(phi) * std::exp(-x);
    };
    out.dH1_dy = [](double, double, double, double) { return 0.0; };
    out.dH1_dx = [g](double, double phi, double, double x) {
        return -g(phi) * std::exp(-x);
    };
    out.box = box;
    return out;
}

} // namespace adiab

#endif
