#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "lubrix/quadrature.hpp"

namespace lubrix {

enum class PressureFamily { rational, log };

inline const char* to_string(PressureFamily f) {
  return f == PressureFamily::rational ? "rational" : "log";
}

// Singular barotropic pressure law on [0, rho_bar): p is strictly increasing
// and blows up at the maximal packing density rho_bar.
//   rational: p(rho) = theta * a * rho / (rho_bar - rho)^gamma,  gamma >= 1
//   log:      p(rho) = theta * a * rho * (-log(1 - rho/rho_bar))
struct PressureLaw {
  PressureFamily family = PressureFamily::rational;
  double rho_bar = 1.0;
  double gamma = 1.0;  // rational family only
  double a = 1.0;
  double theta = 1.0;

  void validate() const {
    if (!(rho_bar > 0)) throw std::invalid_argument("PressureLaw: rho_bar must be > 0");
    if (!(a > 0)) throw std::invalid_argument("PressureLaw: a must be > 0");
    if (!(theta > 0)) throw std::invalid_argument("PressureLaw: theta must be > 0");
    if (family == PressureFamily::rational && !(gamma >= 1.0))
      throw std::invalid_argument("PressureLaw: gamma must be >= 1");
  }

  // p(rho); domain error outside [0, rho_bar).
  double p(double rho) const {
    require_in_domain(rho);
    return p_unchecked(rho);
  }

  // p'(rho) on the same domain.
  double dp(double rho) const {
    require_in_domain(rho);
    return dp_unchecked(rho);
  }

  double p_unchecked(double rho) const {
    if (family == PressureFamily::rational)
      return theta * a * rho / std::pow(rho_bar - rho, gamma);
    const double x = rho / rho_bar;
    return theta * a * rho * (-std::log1p(-x));
  }

  double dp_unchecked(double rho) const {
    if (family == PressureFamily::rational)
      return theta * a * (rho_bar - rho + gamma * rho) / std::pow(rho_bar - rho, gamma + 1.0);
    const double x = rho / rho_bar;
    return theta * a * (-std::log1p(-x) + x / (1.0 - x));
  }

 private:
  void require_in_domain(double rho) const {
    if (!(rho >= 0.0) || !(rho < rho_bar))
      throw std::domain_error("PressureLaw: rho = " + std::to_string(rho) +
                              " outside [0, rho_bar)");
  }
};

// Density clamp used inside transport terms: 0 below 0, identity on [0, rho_bar],
// rho_bar above; 1-Lipschitz by construction.
inline double cutoff_T(double rho, double rho_bar) {
  return std::clamp(rho, 0.0, rho_bar);
}

// a.e. derivative of the clamp: 1 on (0, rho_bar), 0 outside. The tie value at
// the kinks never matters under an integral.
inline double cutoff_T_prime(double rho, double rho_bar) {
  return (rho > 0.0 && rho < rho_bar) ? 1.0 : 0.0;
}

// Antiderivative f(rho) = int_{rho_ref}^{rho} s p'(s) ds, so f' = rho p'(rho).
// Only differences of f enter the solvers, which makes the base point a free
// (configurable) choice.
template <class Law>
double pressure_primitive_f(const Law& law, double rho, double rho_ref, double quad_tol = 1e-11) {
  if (!(rho > 0.0) || !(rho < law.rho_bar))
    throw std::domain_error("pressure_primitive_f: rho outside (0, rho_bar)");
  if (!(rho_ref > 0.0) || !(rho_ref < law.rho_bar))
    throw std::domain_error("pressure_primitive_f: rho_ref outside (0, rho_bar)");
  if (rho == rho_ref) return 0.0;
  return integrate([&](double s) { return s * law.dp_unchecked(s); }, rho_ref, rho, quad_tol);
}

// Regularization package: truncated globally-defined pressure p_R, the clamp T,
// and the auxiliary integrals G' and H whose algebraic identity
//   G'(rho) T(rho) - H(rho) = p_R(rho) + sqrt(delta) rho
// certifies the implementation.
struct RegularizedEOS {
  PressureLaw law;
  double R = 1000.0;    // truncation level; knot at rho_bar - 1/R
  double delta = 1e-3;  // artificial-viscosity parameter
  double rho_M = 0.4;   // reference mean density
  double quad_tol = 1e-10;

  static constexpr double rho_floor = 1e-12;  // lower clip for the 1/T(y) integrand

  void validate() const {
    law.validate();
    if (!(R > 1.0 / law.rho_bar)) throw std::invalid_argument("RegularizedEOS: need R > 1/rho_bar");
    if (!(delta > 0)) throw std::invalid_argument("RegularizedEOS: delta must be > 0");
    if (!(rho_M > 0) || !(rho_M < law.rho_bar))
      throw std::invalid_argument("RegularizedEOS: rho_M must lie in (0, rho_bar)");
    if (!(law.rho_bar - 1.0 / R > rho_M))
      throw std::invalid_argument("RegularizedEOS: need rho_bar - 1/R > rho_M");
  }

  double rho_knot() const { return law.rho_bar - 1.0 / R; }
  double sqrt_delta() const { return std::sqrt(delta); }

  // p extended to [0, inf): equals p below the knot, affine with slope
  // p'(knot) beyond; C^0 and nondecreasing.
  double p_R(double rho) const {
    if (!(rho >= 0.0)) throw std::domain_error("p_R: rho must be >= 0");
    const double rc = rho_knot();
    if (rho <= rc) return law.p_unchecked(rho);
    return law.p_unchecked(rc) + law.dp_unchecked(rc) * (rho - rc);
  }

  double dp_R(double rho) const {
    if (!(rho >= 0.0)) throw std::domain_error("dp_R: rho must be >= 0");
    const double rc = rho_knot();
    return law.dp_unchecked(std::min(rho, rc));
  }

  // G'(rho) = int_{rho_M}^{rho} (p_R'(y) + sqrt(delta)) / T(y) dy, lower end
  // clipped at rho_floor since 1/T is log-divergent at 0. Below rho_M the
  // integral is computed in y = exp(t), which removes the 1/y singularity.
  double g_prime(double rho) const {
    if (!(rho > 0.0)) throw std::domain_error("g_prime: rho must be > 0");
    const double target = std::max(rho, rho_floor);
    if (target == rho_M) return 0.0;
    const double sd = sqrt_delta();
    const double rb = law.rho_bar;
    if (target < rho_M) {
      auto smooth = [&](double t) { return dp_R(std::exp(t)) + sd; };
      return -integrate(smooth, std::log(target), std::log(rho_M), quad_tol);
    }
    auto integrand = [&](double y) { return (dp_R(y) + sd) / cutoff_T(y, rb); };
    return integrate_with_knots(integrand, rho_M, target, {rho_knot(), rb}, quad_tol);
  }

  // H(rho) = -p_R(rho_M) - sqrt(delta) rho_M + int_{rho_M}^{rho} G'(y) T'(y) dy,
  // realized by nested adaptive quadrature (T' = indicator of (0, rho_bar)).
  // Below rho_M the same exp substitution tames the log growth of G'.
  double H(double rho) const {
    if (!(rho > 0.0)) throw std::domain_error("H: rho must be > 0");
    const double sd = sqrt_delta();
    double value = -p_R(rho_M) - sd * rho_M;
    const double target = std::max(rho, rho_floor);
    if (target < rho_M) {
      auto smooth = [&](double t) {
        const double y = std::exp(t);
        return y * g_prime(y);
      };
      value += -integrate(smooth, std::log(target), std::log(rho_M), quad_tol * 10);
    } else if (target > rho_M) {
      auto integrand = [&](double y) {
        return cutoff_T_prime(y, law.rho_bar) == 0.0 ? 0.0 : g_prime(std::max(y, rho_floor));
      };
      value += integrate_with_knots(integrand, rho_M, target, {rho_knot(), law.rho_bar},
                                    quad_tol * 10);
    }
    return value;
  }

  // Residual of the certifying identity; zero up to quadrature error for any rho.
  double identity_residual(double rho) const {
    const double r = std::max(rho, rho_floor);
    return g_prime(r) * cutoff_T(r, law.rho_bar) - H(r) - p_R(r) - sqrt_delta() * r;
  }
};

}  // namespace lubrix
