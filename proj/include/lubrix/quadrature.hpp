#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace lubrix {

// Raised when the adaptive rule cannot certify the requested absolute tolerance.
struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Adaptive Gauss-Kronrod integral of f over [a, b] (either orientation) with an
// absolute-error target. The error estimate returned by the rule is checked
// against the target, so a silently unresolved integrand raises instead of
// returning garbage.
template <class F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-10) {
  if (a == b) return 0.0;
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  // Two fixed Gauss rules of different order certify each other; this is both
  // the fast path for narrow intervals (where the adaptive Kronrod estimate is
  // roundoff-bound and subdivision just amplifies noise) and the last resort.
  auto gauss_pair = [&](double& out) {
    const double v15 = boost::math::quadrature::gauss<double, 15>::integrate(f, a, b);
    const double v30 = boost::math::quadrature::gauss<double, 30>::integrate(f, a, b);
    out = v30;
    return std::isfinite(v30) && std::abs(v30 - v15) <= std::max(abs_tol, 1e-14 * std::abs(v30));
  };
  const bool narrow = (b - a) <= 1e-4 * (1.0 + std::abs(a) + std::abs(b));
  double value = 0.0;
  if (narrow && gauss_pair(value)) return sign * value;
  // Escalating ladder of interior tolerances, cheapest first: the returned
  // error estimate is checked against the absolute target at every rung, so a
  // loose rung that already resolves the integrand is accepted immediately.
  // Starting tight instead would force full-depth subdivision on integrands
  // with quadrature jitter (nested inner integrals), where the Kronrod
  // estimate is noise-dominated and only grows with further splitting.
  for (double rel : {1e-8, 1e-10, 1e-12}) {
    double error = 0.0, l1 = 0.0;
    value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, /*max_depth=*/15, rel, &error, &l1);
    if (std::isfinite(value) && error <= abs_tol + l1 * 1e-12) return sign * value;
  }
  if (!narrow && gauss_pair(value)) return sign * value;
  throw QuadratureError("quadrature failure: could not certify absolute tolerance " +
                        std::to_string(abs_tol) + " on [" + std::to_string(a) + ", " +
                        std::to_string(b) + "]");
}

// Same, but splits at interior knots where the integrand has kinks (truncation
// points, clamp corners) so each adaptive call sees a smooth piece.
template <class F>
double integrate_with_knots(const F& f, double a, double b, const std::vector<double>& knots,
                            double abs_tol = 1e-10) {
  if (a == b) return 0.0;
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  std::vector<double> pts{a, b};
  for (double k : knots)
    if (k > a && k < b) pts.push_back(k);
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    total += integrate(f, pts[i], pts[i + 1], abs_tol);
  return sign * total;
}

// Fixed-order Gauss-Legendre rule on [a, b]; used where a spectral-accuracy
// non-adaptive rule is wanted (velocity-flux consistency, norm evaluation).
template <class F>
double gauss64(const F& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 64>::integrate(f, a, b);
}

}  // namespace lubrix
