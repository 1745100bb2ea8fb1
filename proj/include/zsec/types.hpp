#ifndef ZSEC_TYPES_HPP
#define ZSEC_TYPES_HPP

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace zsec {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kE = 2.718281828459045235360287471352662498;
inline constexpr double kLn2 = 0.693147180559945309417232121458176568;
inline constexpr double kLnPi = 1.144729885849400174143427351353058712;
// ln sqrt(2 pi)
inline constexpr double kLnSqrt2Pi = 0.918938533204672741780329736405617639;

// Point s = sigma + i t; sigma is the real part (critical line sigma = 1/2).
struct ComplexPoint {
  double sigma = 0.0;
  double t = 0.0;

  ComplexPoint() = default;
  ComplexPoint(double sigma_, double t_) : sigma(sigma_), t(t_) {}
  explicit ComplexPoint(cplx s) : sigma(s.real()), t(s.imag()) {}

  cplx value() const { return cplx(sigma, t); }
  operator cplx() const { return value(); }
};

// Shared tolerance policy: absolute + relative epsilon and an iteration cap.
struct Tolerance {
  double abs_eps = 1e-12;
  double rel_eps = 0.0;
  int max_iter = 200000;

  bool valid() const {
    return abs_eps >= 0.0 && rel_eps >= 0.0 && abs_eps + rel_eps > 0.0 &&
           max_iter > 0;
  }
};

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Argument outside the range an operation accepts.
struct domain_error : error {
  using error::error;
};

// Evaluation at (or too near) a pole of the function.
struct pole_error : domain_error {
  using domain_error::domain_error;
};

// A result's log-magnitude exceeds the representable double range.
struct overflow_error : error {
  using error::error;
};

// An iteration failed to reach its tolerance within max_iter.
struct convergence_error : error {
  using error::error;
};

// A quantity that must be real (up to tolerance) came back complex.
struct symmetry_error : error {
  using error::error;
};

// A contour for zero counting passed too close to a zero.
struct boundary_zero_error : error {
  using error::error;
};

// Winding-number accumulation could not keep phase steps below pi/2.
struct phase_step_error : error {
  using error::error;
};

inline void require(bool cond, const char* what) {
  if (!cond) throw domain_error(what);
}

}  // namespace zsec

#endif  // ZSEC_TYPES_HPP
