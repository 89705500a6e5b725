#ifndef ADIAB_DETAIL_REAL_HPP
#define ADIAB_DETAIL_REAL_HPP

// Overload set so that numeric kernels can be instantiated with either
// double or __float128. The quad-precision path is used by the Melnikov
// quadrature, where the result can sit 20+ decades below the integrand
// scale and double-precision cancellation would destroy it.

#include <cmath>
#include <quadmath.h>

namespace adiab::detail {

inline double r_sin(double x) { return std::sin(x); }
inline double r_cos(double x) { return std::cos(x); }
inline double r_exp(double x) { return std::exp(x); }
inline double r_sqrt(double x) { return std::sqrt(x); }
inline double r_abs(double x) { return std::fabs(x); }
inline double r_remainder(double x, double y) { return std::remainder(x, y); }

inline __float128 r_sin(__float128 x) { return sinq(x); }
inline __float128 r_cos(__float128 x) { return cosq(x); }
inline __float128 r_exp(__float128 x) { return expq(x); }
inline __float128 r_sqrt(__float128 x) { return sqrtq(x); }
inline __float128 r_abs(__float128 x) { return fabsq(x); }
inline __float128 r_remainder(__float128 x, __float128 y) { return remainderq(x, y); }

template <class T>
inline const T pi_v = T(0);
template <>
inline const double pi_v<double> = 3.14159265358979323846;
template <>
inline const __float128 pi_v<__float128> = 2 * acosq(0);

} // namespace adiab::detail

#endif
