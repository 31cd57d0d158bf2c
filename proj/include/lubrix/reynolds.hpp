#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "lubrix/eos.hpp"
#include "lubrix/gap.hpp"
#include "lubrix/grid.hpp"

namespace lubrix {

// Stationary lubrication problem on the periodic unit cell: gap profile h(y),
// singular pressure law p(rho), viscosity mu, wall sliding speed s, and target
// film mass M = int_0^1 h(y) rho(y) dy.
struct ReynoldsProblem {
  GapProfile gap;
  PressureLaw law;
  double mu = 1.0;
  double s = 1.0;
  double M = 0.4;

  void validate() const {
    law.validate();
    if (!(mu > 0)) throw std::invalid_argument("ReynoldsProblem: mu must be > 0");
    if (!std::isfinite(s)) throw std::invalid_argument("ReynoldsProblem: s must be finite");
    if (!(M > 0) || !(M < law.rho_bar * gap.integral()))
      throw std::invalid_argument(
          "ReynoldsProblem: M must lie in (0, rho_bar * int h), otherwise no admissible "
          "density exists");
  }
};

// Right-hand side of the first-order density equation obtained by integrating
// the flux balance once:
//   (h^3 / 12 mu) rho p'(rho) rho' = rho h s / 2 + lambda,
// where -lambda is the constant mass flux rho q. Throws outside (0, rho_bar).
inline double ode_rhs(const ReynoldsProblem& prob, double lambda, double y, double rho) {
  if (!(rho > 0.0) || !(rho < prob.law.rho_bar))
    throw std::domain_error("ode_rhs: rho outside (0, rho_bar)");
  const double h = prob.gap.h(y);
  return (0.5 * rho * h * prob.s + lambda) * 12.0 * prob.mu /
         (h * h * h * rho * prob.law.dp_unchecked(rho));
}

// Outcome of integrating the density equation across one period. `completed`
// is false when the trajectory collapsed to the vacuum floor before y = 1
// (finite-distance blow-down; the packing ceiling is never reached because p'
// diverges there). `mass` accumulates int_0^y h rho alongside the solution.
struct PeriodResult {
  bool completed = false;
  double rho_end = 0.0;
  double mass = 0.0;
  double y_stop = 0.0;
  int steps = 0;
};

namespace detail {

inline constexpr double crash_fraction = 1e-8;  // of rho_bar: below this, declare collapse

// Clamped right-hand side for use inside the stepper: trial evaluations during
// step-size control may wander slightly outside (0, rho_bar); accepted steps
// never do because the error control shrinks near the collapse point.
struct ReynoldsRhs {
  const ReynoldsProblem* prob;
  double lambda;

  void operator()(const std::array<double, 2>& x, std::array<double, 2>& dxdt, double y) const {
    const double rb = prob->law.rho_bar;
    const double rho = std::clamp(x[0], rb * 1e-14, rb * (1.0 - 1e-14));
    const double h = prob->gap.h(y);
    dxdt[0] = (0.5 * rho * h * prob->s + lambda) * 12.0 * prob->mu /
              (h * h * h * rho * prob->law.dp_unchecked(rho));
    dxdt[1] = h * rho;
  }
};

}  // namespace detail

// Integrate the density equation from rho(0) = rho0 across [0, 1] with a
// dense-output adaptive Runge-Kutta scheme. If `sample_y` is given (strictly
// increasing, inside (0, 1)), the dense interpolant is evaluated there and the
// densities written to `sample_rho`.
inline PeriodResult integrate_period(const ReynoldsProblem& prob, double lambda, double rho0,
                                     const std::vector<double>* sample_y = nullptr,
                                     std::vector<double>* sample_rho = nullptr,
                                     double abs_tol = 1e-12, double rel_tol = 1e-12) {
  namespace ode = boost::numeric::odeint;
  using state = std::array<double, 2>;

  const double rho_stop = detail::crash_fraction * prob.law.rho_bar;
  PeriodResult out;
  if (!(rho0 > rho_stop) || !(rho0 < prob.law.rho_bar)) return out;  // collapsed at y = 0

  auto stepper = ode::make_dense_output(abs_tol, rel_tol, ode::runge_kutta_dopri5<state>());
  stepper.initialize(state{rho0, 0.0}, 0.0, 1e-3);
  detail::ReynoldsRhs rhs{&prob, lambda};

  std::size_t next_sample = 0;
  if (sample_rho) sample_rho->assign(sample_y ? sample_y->size() : 0, 0.0);

  constexpr int max_steps = 1000000;
  while (stepper.current_time() < 1.0) {
    if (++out.steps > max_steps)
      throw std::runtime_error("integrate_period: step budget exhausted");
    stepper.do_step(rhs);
    if (sample_y) {
      state xs;
      while (next_sample < sample_y->size() &&
             (*sample_y)[next_sample] <= std::min(stepper.current_time(), 1.0)) {
        stepper.calc_state((*sample_y)[next_sample], xs);
        (*sample_rho)[next_sample] = xs[0];
        ++next_sample;
      }
    }
    if (stepper.current_state()[0] <= rho_stop) {
      out.y_stop = std::min(stepper.current_time(), 1.0);
      return out;  // collapse: period not completed
    }
  }
  state xf;
  stepper.calc_state(1.0, xf);
  out.completed = true;
  out.rho_end = xf[0];
  out.mass = xf[1];
  out.y_stop = 1.0;
  return out;
}

// Result of the inner fixed-point search: the periodic starting density for a
// given flux constant, plus the film mass it carries.
struct ShootResult {
  bool found = false;
  double rho0 = 0.0;
  double mass = 0.0;
  int integrations = 0;
  // On failure: +1 when the defect is positive across the whole density range
  // (the fixed point escaped below/above it; which side depends on the sign of
  // s), -1 when negative throughout. 0 on success.
  int end_sign = 0;
  std::string reason;
};

// Find rho0 with rho(1) = rho0 at fixed lambda by bisecting the period-map
// defect rho(1) - rho0. Trajectory ordering makes the period map strictly
// increasing, so the defect changes sign exactly once; a collapse before y = 1
// counts as a negative defect.
inline ShootResult shoot_periodic(const ReynoldsProblem& prob, double lambda,
                                  double abs_tol = 1e-12, double rel_tol = 1e-12) {
  ShootResult out;
  const double rb = prob.law.rho_bar;

  // defect sign: +1, -1, with collapse forced negative
  auto defect = [&](double rho0, bool& completed) {
    PeriodResult r = integrate_period(prob, lambda, rho0, nullptr, nullptr, abs_tol, rel_tol);
    ++out.integrations;
    completed = r.completed;
    return r.completed ? r.rho_end - rho0 : -1.0;
  };

  // The upper probe must stay clear of the packing density: p' blows up there,
  // the dynamics freeze, and the defect would round to zero. At 1e-5 below the
  // ceiling the per-period increment is ~1e-9, well above integration noise.
  double lo = rb * 1e-7, hi = rb * (1.0 - 1e-5);
  bool lo_done = false, hi_done = false;
  const double d_lo = defect(lo, lo_done);
  const double d_hi = defect(hi, hi_done);
  if ((d_lo > 0) == (d_hi > 0)) {
    out.end_sign = (d_lo > 0) ? 1 : -1;
    out.reason = "period-map defect has the same sign at both ends: no periodic solution "
                 "for this flux constant";
    return out;
  }

  double a = lo, b = hi, da = d_lo, db = d_hi;
  for (int it = 0; it < 120; ++it) {
    const double c = 0.5 * (a + b);
    if (c == a || c == b) break;  // bisection exhausted double resolution
    bool done = false;
    const double dc = defect(c, done);
    if ((dc > 0) == (da > 0)) {
      a = c;
      da = dc;
    } else {
      b = c;
      db = dc;
    }
    if (done && std::abs(dc) < 1e-15 * rb) break;
  }

  // The midpoint may still collapse when the fixed point is repelling; the
  // endpoint with positive defect completed its period by construction.
  double rho0 = 0.5 * (a + b);
  PeriodResult fin = integrate_period(prob, lambda, rho0, nullptr, nullptr, abs_tol, rel_tol);
  ++out.integrations;
  if (!fin.completed) {
    rho0 = (da > 0) ? a : b;
    fin = integrate_period(prob, lambda, rho0, nullptr, nullptr, abs_tol, rel_tol);
    ++out.integrations;
  }
  (void)db;
  if (!fin.completed) {
    out.reason = "final trajectory collapsed despite bracketing";
    return out;
  }
  // Guard against pseudo-roots: when no periodic orbit exists, the defect
  // flips sign discontinuously across the collapse/rise separatrix and stays
  // O(1) on the surviving side. A genuine orbit leaves a defect near machine
  // zero after the bisection above.
  if (std::abs(fin.rho_end - rho0) > 1e-6 * rb) {
    out.end_sign = (prob.s > 0) ? 1 : -1;  // reads as the low-mass side outside
    out.reason = "defect sign change is a separatrix, not a periodic orbit";
    return out;
  }
  out.found = true;
  out.rho0 = rho0;
  out.mass = fin.mass;
  return out;
}

struct ReynoldsOptions {
  int n_samples = 1024;       // cell-centered output resolution
  double tol_mass = 1e-10;    // |mass(lambda) - M| target
  double ode_abs_tol = 1e-12;
  double ode_rel_tol = 1e-12;
  double lambda0 = std::numeric_limits<double>::quiet_NaN();  // NaN: use -M s / 2
  int max_expand = 64;
};

struct ReynoldsSolution {
  double lambda = 0.0;
  double rho0 = 0.0;   // density at y = 0 (periodic anchor)
  double mass = 0.0;   // int h rho carried by the returned solution
  std::vector<double> y;    // cell centers (i + 1/2) / n
  std::vector<double> rho;  // densities there
  int outer_iterations = 0;
  int integrations = 0;
  bool scan_fallback = false;
  double wall_time_s = 0.0;
  std::string notes;
};

// Solve the periodic problem: find the flux constant lambda whose periodic
// density carries mass M, then sample that density on n cell centers. The film
// mass is strictly decreasing in lambda, so a sign-bracketing search on
// mass(lambda) - M (Illinois variant once both ends are finite) converges; if
// bracketing by doubling fails, a 64-point scan locates the sign change and
// reports any non-monotonicity observed along the way.
inline ReynoldsSolution solve_reynolds(const ReynoldsProblem& prob,
                                       const ReynoldsOptions& opt = {}) {
  prob.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ReynoldsSolution sol;
  sol.y.resize(opt.n_samples);
  for (int i = 0; i < opt.n_samples; ++i) sol.y[i] = (i + 0.5) / opt.n_samples;

  auto finish = [&](double lambda, double rho0) {
    sol.lambda = lambda;
    sol.rho0 = rho0;
    PeriodResult fin = integrate_period(prob, lambda, rho0, &sol.y, &sol.rho, opt.ode_abs_tol,
                                        opt.ode_rel_tol);
    if (!fin.completed) throw std::runtime_error("solve_reynolds: converged trajectory collapsed");
    sol.mass = fin.mass;
    sol.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return sol;
  };

  // No sliding: the flux balance forces lambda = 0 and a uniform density.
  if (prob.s == 0.0) {
    const double rho_c = prob.M / prob.gap.integral();
    sol.rho.assign(opt.n_samples, rho_c);
    sol.lambda = 0.0;
    sol.rho0 = rho_c;
    sol.mass = prob.M;
    sol.notes = "s = 0: flux constant vanishes, density is uniform";
    sol.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return sol;
  }

  // mass(lambda) - M, with signed infinities when no periodic solution exists
  // in the probed density range: rising trajectories everywhere mean the fixed
  // point escaped below the range for s > 0 (mass ~ 0) but above it for s < 0
  // (mass ~ maximal), and vice versa for falling trajectories.
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto excess = [&](double lambda) {
    ShootResult sr = shoot_periodic(prob, lambda, opt.ode_abs_tol, opt.ode_rel_tol);
    sol.integrations += sr.integrations;
    if (sr.found) return sr.mass - prob.M;
    if (sr.end_sign == 0) throw std::runtime_error("solve_reynolds: " + sr.reason);
    return ((sr.end_sign > 0) == (prob.s > 0)) ? -inf : inf;
  };

  const double mass_tol = opt.tol_mass * std::max(1.0, std::abs(prob.M));
  const double lam_init = std::isnan(opt.lambda0) ? -prob.M * prob.s / 2.0 : opt.lambda0;
  // lambda and s have opposite signs for the physical branch
  const double lam_sign = (prob.s > 0) ? -1.0 : 1.0;
  double la = lam_sign * std::abs(lam_init);
  if (la == 0.0) la = lam_sign * 1e-8;

  double ga = excess(la);
  ++sol.outer_iterations;
  if (std::abs(ga) <= mass_tol) {  // initial guess already carries the mass
    ShootResult sr0 = shoot_periodic(prob, la, opt.ode_abs_tol, opt.ode_rel_tol);
    sol.integrations += sr0.integrations;
    return finish(la, sr0.rho0);
  }
  double lb = la, gb = ga;
  // Expand: |lambda| up when mass deficient, down when excessive, until the
  // excess changes sign. Infinite excess counts as positive.
  for (int k = 0; k < opt.max_expand && (ga > 0) == (gb > 0); ++k) {
    lb = (gb > 0) ? la * 0.5 : la * 2.0;
    gb = excess(lb);
    ++sol.outer_iterations;
    if (std::abs(gb) <= mass_tol) {
      ShootResult sr0 = shoot_periodic(prob, lb, opt.ode_abs_tol, opt.ode_rel_tol);
      sol.integrations += sr0.integrations;
      return finish(lb, sr0.rho0);
    }
    if ((ga > 0) != (gb > 0)) break;
    la = lb;
    ga = gb;
  }

  if ((ga > 0) == (gb > 0)) {
    // Doubling failed; scan a wide log-spaced ladder for a sign change.
    sol.scan_fallback = true;
    std::vector<double> lams(64), vals(64);
    for (int i = 0; i < 64; ++i) {
      lams[i] = lam_sign * std::abs(lam_init) * std::pow(2.0, 16.0 - 32.0 * i / 63.0);
      vals[i] = excess(lams[i]);
      ++sol.outer_iterations;
    }
    bool monotone = true;
    int bracket = -1;
    for (int i = 0; i + 1 < 64; ++i) {
      // |lambda| shrinks along the scan, so the carried mass must shrink too
      if (std::isfinite(vals[i]) && std::isfinite(vals[i + 1]) &&
          vals[i + 1] > vals[i] + 1e-12 * std::max(1.0, prob.M))
        monotone = false;
      if (bracket < 0 && (vals[i] > 0) != (vals[i + 1] > 0)) bracket = i;
    }
    if (!monotone) sol.notes += "mass(lambda) not monotone over fallback scan; ";
    if (bracket < 0)
      throw std::runtime_error(
          "solve_reynolds: no flux constant carries the requested mass (scan found no "
          "sign change)");
    la = lams[bracket];
    ga = vals[bracket];
    lb = lams[bracket + 1];
    gb = vals[bracket + 1];
  }

  // Bracketed root solve; bisection while one side is infinite, Illinois
  // secant steps once both values are finite. Only lambdas whose inner solve
  // produced a finite mass are candidates for the final answer.
  double lam_best = std::numeric_limits<double>::quiet_NaN();
  double g_best = std::numeric_limits<double>::infinity();
  auto consider = [&](double lam, double g) {
    if (std::isfinite(g) && std::abs(g) < g_best) {
      g_best = std::abs(g);
      lam_best = lam;
    }
  };
  consider(la, ga);
  consider(lb, gb);
  for (int it = 0; it < 200; ++it) {
    const bool finite_pair = std::isfinite(ga) && std::isfinite(gb);
    double c;
    if (finite_pair && gb != ga) {
      c = lb - gb * (lb - la) / (gb - ga);
      const double w = std::abs(lb - la);
      if (!(std::min(la, lb) + 1e-3 * w <= c && c <= std::max(la, lb) - 1e-3 * w))
        c = 0.5 * (la + lb);
    } else {
      c = 0.5 * (la + lb);
    }
    const double gc = excess(c);
    ++sol.outer_iterations;
    consider(c, gc);
    if (std::isfinite(gc) && std::abs(gc) <= mass_tol) break;
    if ((gc > 0) == (ga > 0)) {
      la = c;
      ga = gc;
      if (finite_pair) gb *= 0.5;  // Illinois weighting against stagnation
    } else {
      lb = c;
      gb = gc;
      if (finite_pair) ga *= 0.5;
    }
    if (std::abs(lb - la) <= 1e-15 * std::max(1.0, std::abs(la) + std::abs(lb))) break;
  }
  if (std::isnan(lam_best))
    throw std::runtime_error("solve_reynolds: bracket refinement never produced a finite mass");

  ShootResult sr = shoot_periodic(prob, lam_best, opt.ode_abs_tol, opt.ode_rel_tol);
  sol.integrations += sr.integrations;
  if (!sr.found) throw std::runtime_error("solve_reynolds: inner solve failed at accepted lambda");
  return finish(lam_best, sr.rho0);
}

// Densities of the converged solution at arbitrary points in (0, 1), obtained
// from the dense interpolant of a fresh period integration.
inline std::vector<double> reynolds_sample(const ReynoldsProblem& prob, double lambda, double rho0,
                                           const std::vector<double>& points) {
  std::vector<double> pts = points;
  std::vector<std::size_t> order(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pts[a] < pts[b]; });
  std::vector<double> sorted(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = pts[order[i]];
  std::vector<double> rho_sorted;
  PeriodResult r = integrate_period(prob, lambda, rho0, &sorted, &rho_sorted);
  if (!r.completed) throw std::runtime_error("reynolds_sample: trajectory collapsed");
  std::vector<double> rho(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) rho[order[i]] = rho_sorted[i];
  return rho;
}

// Pressure gradient reconstructed from the integrated flux balance (exact for
// the continuous solution): dp/dy = (rho h s / 2 + lambda) 12 mu / (h^3 rho).
inline double reynolds_dpdy(const ReynoldsProblem& prob, double lambda, double y, double rho) {
  const double h = prob.gap.h(y);
  return (0.5 * rho * h * prob.s + lambda) * 12.0 * prob.mu / (h * h * h * rho);
}

// Horizontal velocity across the film: Poiseuille part driven by dp/dy plus
// the Couette part dragged by the sliding wall at Z = 0.
inline double reynolds_velocity(const ReynoldsProblem& prob, double lambda, double y, double rho,
                                double Z) {
  const double h = prob.gap.h(y);
  const double dpdy = reynolds_dpdy(prob, lambda, y, rho);
  return dpdy / (2.0 * prob.mu) * (Z * Z - Z * h) + prob.s * (1.0 - Z / h);
}

// Volume flux q(y) = int_0^h u dZ = -h^3/(12 mu) dp/dy + s h / 2.
inline double reynolds_flux(const ReynoldsProblem& prob, double lambda, double y, double rho) {
  const double h = prob.gap.h(y);
  const double dpdy = reynolds_dpdy(prob, lambda, y, rho);
  return -h * h * h / (12.0 * prob.mu) * dpdy + 0.5 * prob.s * h;
}

struct ReynoldsResiduals {
  double first_integral_rel = 0.0;  // max_i |rho_i q_i + lambda| / |lambda|
  double mass_rel = 0.0;            // |mass - M| / max(1, M)
};

// A posteriori check of the flux balance that does NOT reuse the reconstructed
// gradient: the pressure is differentiated by a periodic fourth-order stencil
// on the sample grid, so the residual measures the solution, not the algebra.
inline ReynoldsResiduals reynolds_residuals(const ReynoldsProblem& prob,
                                            const ReynoldsSolution& sol) {
  const int n = static_cast<int>(sol.rho.size());
  if (n < 5) throw std::invalid_argument("reynolds_residuals: need at least 5 samples");
  const double dy = 1.0 / n;
  std::vector<double> p(n);
  for (int i = 0; i < n; ++i) p[i] = prob.law.p(sol.rho[i]);
  auto wrap = [&](int i) { return (i % n + n) % n; };

  ReynoldsResiduals res;
  for (int i = 0; i < n; ++i) {
    const double dpdy_fd =
        (-p[wrap(i + 2)] + 8.0 * p[wrap(i + 1)] - 8.0 * p[wrap(i - 1)] + p[wrap(i - 2)]) /
        (12.0 * dy);
    const double h = prob.gap.h(sol.y[i]);
    const double q = -h * h * h / (12.0 * prob.mu) * dpdy_fd + 0.5 * prob.s * h;
    res.first_integral_rel = std::max(
        res.first_integral_rel, std::abs(sol.rho[i] * q + sol.lambda) /
                                    std::max(std::abs(sol.lambda), 1e-300));
  }
  res.mass_rel = std::abs(sol.mass - prob.M) / std::max(1.0, prob.M);
  return res;
}

}  // namespace lubrix
