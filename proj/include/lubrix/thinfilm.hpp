#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>

#include <Eigen/QR>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lubrix/continuity.hpp"
#include "lubrix/eos.hpp"
#include "lubrix/extension.hpp"
#include "lubrix/gap.hpp"
#include "lubrix/grid.hpp"
#include "lubrix/momentum.hpp"
#include "lubrix/reynolds.hpp"

namespace lubrix {

// Stationary compressible flow in the thin periodic film {0 < Z < h(y)} at
// film parameter eps, driven by the sliding bottom wall. The vertical velocity
// V is stored in its O(1) rescaled form (physical vertical velocity = eps V),
// so continuity reads d_y(rho uh) + d_Z(rho V) = 0 and all operators stay
// uniformly scaled as eps -> 0. M normalizes the total mass: int_Q rho = M.
struct ThinFilmProblem {
  GapProfile gap;
  PressureLaw law;
  double mu = 1.0;
  double lambda_visc = 1.0;
  double s = 1.0;
  double M = 0.4;
  double eps = 0.1;
};

struct ThinFilmOptions {
  int nx = 64, nz = 32;
  double delta_min = 1e-3;   // end of the artificial-viscosity continuation
  double tol_outer = 1e-10;  // sup-norm of the joint update between sweeps
  int max_outer = 2000;      // per continuation stage
  double omega = 0.7;        // under-relaxation, halved adaptively on growth
  int max_pattern_iters = 40;
  double R = 0.0;            // truncation level of the regularized law; <= 0 picks 1000 / rho_bar
};

struct ThinFilmStageRecord {
  double delta = 0.0;
  int iterations = 0;
  double final_update = 0.0;
  bool converged = false;
};

struct ThinFilmState {
  GridQ grid;
  std::vector<double> rho, uh, V;
  std::vector<double> p;  // nodal pressure p_R(rho) of the converged state
  double delta = 1.0;     // regularization level this state solves
  double rho_M = 0.0;     // discrete mean density M / |Q|
  double mass = 0.0;
  double max_mass_drift = 0.0;  // worst |mass - M| seen across outer iterations
  int outer_iterations = 0;     // total across the continuation
  bool converged = false;
  std::vector<ThinFilmStageRecord> stages;
  std::vector<double> update_history;
};

// Diagnostic functionals of a stored state: the boundary-layer energy
// comparison (distance to the divergence-free wall extension, against the
// extension's own gradient energy), pressure moments, the vertical pressure
// variation that must vanish in the thin-film limit, and the mass-weighted
// compressibility residual int rho div u.
struct EstimateReport {
  double energy_lhs = 0.0;  // ||u - ubar||^2 + eps^2 ||grad(u - ubar)||^2 on the physical film
  double energy_rhs = 0.0;  // eps^2 ||grad ubar||^2 on the physical film
  double energy_constant = 0.0;  // lhs / rhs
  double pressure_mean = 0.0;    // mean of p(rho) rho over the physical film
  double pressure_l2 = 0.0;      // ||p(rho)||_{L2} on the physical film
  double vertical_pressure_variation = 0.0;  // ||p - mean_Z p||_2 / ||p||_2
  double renormalized_residual = 0.0;        // int_Q rho (d_y uh + d_Z V)
  double extension_eta = 0.0;                // layer width in Z units (physical width eps * eta)
  bool layer_resolved = false;               // at least two vertical cells inside the layer
};

class ContinuationStallError : public std::runtime_error {
 public:
  ContinuationStallError(const std::string& msg, double last_delta, std::optional<ThinFilmState> st)
      : std::runtime_error(msg), last_converged_delta(last_delta), last_state(std::move(st)) {}
  double last_converged_delta;                // NaN if no stage ever converged
  std::optional<ThinFilmState> last_state;    // deepest converged state, if any
};

namespace detail {

inline double thinfilm_mass(const GridQ& grid, const std::vector<double>& rho) {
  double m = 0.0;
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j <= grid.nz; ++j) m += rho[grid.node(i, j)] * grid.node_volume(i, j);
  return m;
}

inline void impose_wall_traces(const GridQ& grid, double s, std::vector<double>& uh,
                               std::vector<double>& V) {
  for (int i = 0; i < grid.nx; ++i) {
    uh[grid.node(i, 0)] = s;
    V[grid.node(i, 0)] = 0.0;
    uh[grid.node(i, grid.nz)] = 0.0;
    V[grid.node(i, grid.nz)] = 0.0;
  }
}

}  // namespace detail

inline EstimateReport make_estimate_report(const ThinFilmProblem& prob, const ThinFilmState& st) {
  const GridQ& grid = st.grid;
  const int nx = grid.nx, nz = grid.nz;
  const double eps = prob.eps, e2 = eps * eps, e4 = e2 * e2;
  const double eta = grid.gap.h_min() / 2.0;
  const SimpleExtension ext = simple_extension(prob.s, eta, grid.gap);

  // 2x2 Gauss on the bilinear elements of the (y, Z) geometry, matching the
  // momentum discretization.
  const double gp = 1.0 / std::sqrt(3.0);
  const std::array<double, 2> pts{-gp, gp};
  double lhs_l2 = 0.0, lhs_grad = 0.0, rhs_grad = 0.0;
  double p_rho_int = 0.0, p_sq_int = 0.0, div_rho_int = 0.0;

  for (int ei = 0; ei < nx; ++ei)
    for (int ej = 0; ej < nz; ++ej) {
      const std::array<std::size_t, 4> nodes{grid.node(ei, ej), grid.node(ei + 1, ej),
                                             grid.node(ei + 1, ej + 1), grid.node(ei, ej + 1)};
      const double y0 = grid.y(ei), y1 = (ei + 1) * grid.dy();
      const std::array<double, 4> xs{y0, y1, y1, y0};
      const std::array<double, 4> zs{grid.zeta(ej) * grid.gap.h(y0), grid.zeta(ej) * grid.gap.h(y1),
                                     grid.zeta(ej + 1) * grid.gap.h(y1),
                                     grid.zeta(ej + 1) * grid.gap.h(y0)};
      for (double xi : pts)
        for (double eta_q : pts) {
          const std::array<double, 4> Nq{0.25 * (1 - xi) * (1 - eta_q), 0.25 * (1 + xi) * (1 - eta_q),
                                         0.25 * (1 + xi) * (1 + eta_q), 0.25 * (1 - xi) * (1 + eta_q)};
          const std::array<double, 4> dNxi{-0.25 * (1 - eta_q), 0.25 * (1 - eta_q),
                                           0.25 * (1 + eta_q), -0.25 * (1 + eta_q)};
          const std::array<double, 4> dNeta{-0.25 * (1 - xi), -0.25 * (1 + xi), 0.25 * (1 + xi),
                                            0.25 * (1 - xi)};
          double Jyx = 0, Jye = 0, Jzx = 0, Jze = 0;
          for (int a = 0; a < 4; ++a) {
            Jyx += xs[a] * dNxi[a];
            Jye += xs[a] * dNeta[a];
            Jzx += zs[a] * dNxi[a];
            Jze += zs[a] * dNeta[a];
          }
          const double det = Jyx * Jze - Jye * Jzx;
          const double w = det;
          std::array<double, 4> dNy, dNz;
          for (int a = 0; a < 4; ++a) {
            dNy[a] = (Jze * dNxi[a] - Jzx * dNeta[a]) / det;
            dNz[a] = (-Jye * dNxi[a] + Jyx * dNeta[a]) / det;
          }
          double Zq = 0, uq = 0, vq = 0, rq = 0, pq = 0;
          double duy = 0, duz = 0, dvy = 0, dvz = 0;
          for (int a = 0; a < 4; ++a) {
            Zq += zs[a] * Nq[a];
            uq += st.uh[nodes[a]] * Nq[a];
            vq += st.V[nodes[a]] * Nq[a];
            rq += st.rho[nodes[a]] * Nq[a];
            pq += st.p[nodes[a]] * Nq[a];
            duy += st.uh[nodes[a]] * dNy[a];
            duz += st.uh[nodes[a]] * dNz[a];
            dvy += st.V[nodes[a]] * dNy[a];
            dvz += st.V[nodes[a]] * dNz[a];
          }
          const double ub = ext.uh(Zq), dub = ext.duh_dZ(Zq);
          lhs_l2 += w * ((uq - ub) * (uq - ub) + e2 * vq * vq);
          lhs_grad += w * (e2 * duy * duy + (duz - dub) * (duz - dub) + e4 * dvy * dvy +
                           e2 * dvz * dvz);
          rhs_grad += w * dub * dub;
          p_rho_int += w * pq * rq;
          p_sq_int += w * pq * pq;
          div_rho_int += w * rq * (duy + dvz);
        }
    }

  EstimateReport rep;
  rep.energy_lhs = eps * (lhs_l2 + lhs_grad);
  rep.energy_rhs = eps * rhs_grad;  // eps^2 ||grad ubar||^2: only the 1/eps^2 dZ part survives
  rep.energy_constant = rep.energy_rhs > 0 ? rep.energy_lhs / rep.energy_rhs : 0.0;
  rep.pressure_mean = p_rho_int / grid.volume();
  rep.pressure_l2 = std::sqrt(eps * p_sq_int);
  rep.renormalized_residual = div_rho_int;
  rep.extension_eta = eta;
  rep.layer_resolved = eta / grid.gap.h(0.0) >= 2.0 * grid.dzeta();

  // Vertical pressure variation from the nodal values: per column the
  // Z-average is the trapezoid rule in zeta, then an L2 ratio over Q.
  double var = 0.0, nrm = 0.0;
  for (int i = 0; i < nx; ++i) {
    double pbar = 0.0;
    for (int j = 0; j <= nz; ++j) {
      const double tw = (j == 0 || j == nz) ? 0.5 : 1.0;
      pbar += tw * st.p[grid.node(i, j)] * grid.dzeta();
    }
    for (int j = 0; j <= nz; ++j) {
      const double vol = grid.node_volume(i, j);
      const double d = st.p[grid.node(i, j)] - pbar;
      var += vol * d * d;
      nrm += vol * st.p[grid.node(i, j)] * st.p[grid.node(i, j)];
    }
  }
  rep.vertical_pressure_variation = nrm > 0 ? std::sqrt(var / nrm) : 0.0;
  return rep;
}

struct ThinFilmSolution {
  ThinFilmState state;
  EstimateReport report;
};

// Solve the delta-regularized system by alternating the linearized momentum
// solve (frozen density, lagged convection) with the clamped transport solve
// for the density, under-relaxed, inside a continuation that halves delta from
// 1 down to delta_min with warm starts. The transport solve conserves the
// discrete mass identically, so every iterate carries total mass M.
inline ThinFilmSolution solve_thinfilm(const ThinFilmProblem& prob, const ThinFilmOptions& opt = {}) {
  if (!(prob.mu > 0) || !(prob.lambda_visc > 0))
    throw std::invalid_argument("solve_thinfilm: viscosities must be positive");
  GridQ grid(prob.gap, opt.nx, opt.nz, prob.eps);
  const double rho_bar = prob.law.rho_bar;
  const double rho_M = prob.M / grid.volume();
  if (!(rho_M > 0) || !(rho_M < rho_bar))
    throw std::invalid_argument("solve_thinfilm: mean density M/|Q| must lie in (0, rho_bar)");
  RegularizedEOS reg{prob.law, opt.R > 0 ? opt.R : 1000.0 / rho_bar,
                     std::max(opt.delta_min, 1e-12), rho_M};
  reg.validate();

  std::vector<double> deltas;
  for (double d = 1.0; d > opt.delta_min; d *= 0.5) deltas.push_back(d);
  deltas.push_back(opt.delta_min);

  const std::size_t N = grid.n_nodes();
  ThinFilmState st{grid, {}, {}, {}, {}, 1.0, rho_M, 0.0, 0.0, 0, false, {}, {}};
  st.rho.assign(N, rho_M);
  st.uh.assign(N, 0.0);
  st.V.assign(N, 0.0);
  detail::impose_wall_traces(grid, prob.s, st.uh, st.V);
  st.mass = detail::thinfilm_mass(grid, st.rho);

  std::optional<ThinFilmState> last_good;
  double last_good_delta = std::numeric_limits<double>::quiet_NaN();
  std::optional<ThinFilmState> prev_good;
  double prev_good_delta = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> p_hat(N);
  std::vector<double> Gu(N), Gv(N), Gr(N);

  MomentumSolver momentum(grid);
  ContinuitySolver continuity(grid);

  // Anderson mixing of the outer map x = (uh, V, rho) -> G(x), where G is one
  // relaxed alternation sweep. The accelerated candidate is an affine
  // combination of previous iterates and sweep images whose correction columns
  // are differences of them, so every exact affine invariant of the sweep
  // (total mass, wall traces) is inherited by the mixed iterate.
  const std::size_t n3 = 3 * N;
  constexpr int anderson_depth = 5;
  std::vector<Eigen::VectorXd> dx_hist, df_hist;
  Eigen::VectorXd xk(n3), gk(n3), fk(n3), x_prev(n3), f_prev(n3);
  std::string fail_msg;

  double omega_carry = opt.omega;

  auto attempt_stage = [&](double delta) -> bool {
    fail_msg.clear();
    const double sq_delta = std::sqrt(delta);
    const std::vector<double> g(N, delta * rho_M);
    // stage-entry fields: every relaxation level restarts from the same state
    const std::vector<double> x0u = st.uh, x0v = st.V, x0r = st.rho;
    const double mass0 = st.mass;
    bool stage_ok = false;
    int iters_used = 0;
    double update = std::numeric_limits<double>::infinity();
    enum class Fail { none, diverged, pattern } last_fail = Fail::none;
    double fail_omega = omega_carry;

    // Relaxation levels. The alternation map loses contractivity at the
    // nominal omega once delta is small, and it does so slowly (growth close
    // to 1 per sweep), so a level watches for updates climbing far above
    // their running minimum and restarts the whole stage at half the
    // relaxation. The starting level carries over from the previous stage:
    // the stiffness only grows as delta shrinks, so damping that the last
    // stage needed is a strong prior for this one. All levels share one
    // iteration budget.
    for (double base_omega = omega_carry; base_omega > 5e-4; base_omega *= 0.5) {
      st.uh = x0u;
      st.V = x0v;
      st.rho = x0r;
      st.mass = mass0;
      double omega = base_omega;
      double prev_update = std::numeric_limits<double>::infinity();
      double level_min = prev_update;
      bool level_failed = false;
      bool have_prev = false;
      int steady = 0;
      dx_hist.clear();
      df_hist.clear();
      while (iters_used < opt.max_outer && !stage_ok && !level_failed) {
        ++iters_used;
        // one relaxed alternation sweep evaluated at the current state
        for (std::size_t a = 0; a < N; ++a)
          p_hat[a] = reg.p_R(std::max(st.rho[a], 0.0)) + sq_delta * st.rho[a];
        const MomentumResult mom = momentum.solve(prob.mu, prob.lambda_visc, delta, prob.s,
                                                  st.rho, p_hat, st.uh, st.V);
        double du = 0.0;
        auto blend_velocity = [&](double om) {
          du = 0.0;
          for (std::size_t a = 0; a < N; ++a) {
            Gu[a] = om * mom.uh[a] + (1.0 - om) * st.uh[a];
            Gv[a] = om * mom.V[a] + (1.0 - om) * st.V[a];
            du = std::max({du, std::abs(Gu[a] - st.uh[a]), std::abs(Gv[a] - st.V[a])});
          }
          detail::impose_wall_traces(grid, prob.s, Gu, Gv);
        };
        blend_velocity(omega);
        ContinuityResult cont = continuity.solve(rho_bar, delta, Gu, Gv, g, opt.max_pattern_iters);
        while (!cont.pattern_converged && omega > 1e-3) {
          // a cycling clamp pattern means the velocity moved too fast for the
          // transport solve; replay the same sweep closer to the current state
          omega *= 0.5;
          dx_hist.clear();
          df_hist.clear();
          have_prev = false;
          steady = 0;
          blend_velocity(omega);
          cont = continuity.solve(rho_bar, delta, Gu, Gv, g, opt.max_pattern_iters);
        }
        if (!cont.pattern_converged) {
          last_fail = Fail::pattern;
          fail_omega = base_omega;
          level_failed = true;
          break;
        }
        double dr = 0.0;
        for (std::size_t a = 0; a < N; ++a) {
          Gr[a] = omega * cont.rho[a] + (1.0 - omega) * st.rho[a];
          dr = std::max(dr, std::abs(Gr[a] - st.rho[a]));
        }
        update = std::max(du, dr);
        st.update_history.push_back(update);
        ++st.outer_iterations;
        level_min = std::min(level_min, update);
        if (!std::isfinite(update) || update > 1e4 ||
            (update > 1.0 && update > 1e3 * level_min)) {
          // far above the level's own minimum with O(1) fields: divergence,
          // not a transient -- retry the stage with stronger damping
          last_fail = Fail::diverged;
          fail_omega = base_omega;
          level_failed = true;
          break;
        }

        if (update <= opt.tol_outer) {
          // adopt the plain sweep image: it is a fixed point to tolerance
          st.uh = Gu;
          st.V = Gv;
          st.rho = Gr;
          st.mass = detail::thinfilm_mass(grid, st.rho);
          st.max_mass_drift = std::max(st.max_mass_drift, std::abs(st.mass - prob.M));
          stage_ok = true;
          break;
        }

        // next iterate: Anderson extrapolation over the recent residuals, with
        // a plain relaxed step as the fallback
        for (std::size_t a = 0; a < N; ++a) {
          xk[a] = st.uh[a];
          xk[N + a] = st.V[a];
          xk[2 * N + a] = st.rho[a];
          gk[a] = Gu[a];
          gk[N + a] = Gv[a];
          gk[2 * N + a] = Gr[a];
        }
        fk = gk - xk;
        if (have_prev) {
          dx_hist.push_back(xk - x_prev);
          df_hist.push_back(fk - f_prev);
          if (static_cast<int>(dx_hist.size()) > anderson_depth) {
            dx_hist.erase(dx_hist.begin());
            df_hist.erase(df_hist.begin());
          }
        }
        x_prev = xk;
        f_prev = fk;
        have_prev = true;

        bool took_plain = true;
        if (!df_hist.empty()) {
          const int m = static_cast<int>(df_hist.size());
          Eigen::MatrixXd DF(n3, m), DX(n3, m);
          for (int c = 0; c < m; ++c) {
            DF.col(c) = df_hist[std::size_t(c)];
            DX.col(c) = dx_hist[std::size_t(c)];
          }
          const Eigen::VectorXd gamma = DF.colPivHouseholderQr().solve(fk);
          if (gamma.allFinite()) {
            const Eigen::VectorXd cand = gk - (DX + DF) * gamma;
            // reject wild extrapolations; they can overshoot the clamp region
            if ((cand - xk).lpNorm<Eigen::Infinity>() <= 50.0 * update) {
              for (std::size_t a = 0; a < N; ++a) {
                st.uh[a] = cand[a];
                st.V[a] = cand[N + a];
                st.rho[a] = cand[2 * N + a];
              }
              took_plain = false;
            }
          }
        }
        if (took_plain) {
          st.uh = Gu;
          st.V = Gv;
          st.rho = Gr;
        }
        detail::impose_wall_traces(grid, prob.s, st.uh, st.V);
        st.mass = detail::thinfilm_mass(grid, st.rho);
        st.max_mass_drift = std::max(st.max_mass_drift, std::abs(st.mass - prob.M));

        if (update > 1.5 * prev_update) {
          // growth: forget the now-misleading history; damp harder on big jumps
          if (update > 5.0 * prev_update && omega > 0.02) omega *= 0.5;
          dx_hist.clear();
          df_hist.clear();
          have_prev = false;
          steady = 0;
        } else if (update < prev_update && ++steady >= 8 && omega < base_omega) {
          // sustained decrease: relax the damping back toward the level's base
          // (the history was built at the old omega, so it has to go)
          omega = std::min(base_omega, 1.5 * omega);
          dx_hist.clear();
          df_hist.clear();
          have_prev = false;
          steady = 0;
        }
        prev_update = update;
      }
      if (stage_ok) {
        // remember the level that worked, with a little room to recover; the
        // in-level omega is not carried -- its halvings are transient
        // micro-adaptations, and compounding them across stages would drive
        // the relaxation to zero
        omega_carry = std::min(opt.omega, 1.25 * base_omega);
        break;
      }
      if (iters_used >= opt.max_outer) break;
    }

    st.delta = delta;
    st.stages.push_back({delta, iters_used, update, stage_ok});
    if (!stage_ok) {
      char msg[192];
      if (last_fail == Fail::pattern)
        std::snprintf(msg, sizeof msg,
                      "solve_thinfilm: transport clamp pattern did not settle at delta=%g "
                      "(base omega %.3g, %d iterations)",
                      delta, fail_omega, iters_used);
      else if (last_fail == Fail::diverged)
        std::snprintf(msg, sizeof msg,
                      "solve_thinfilm: outer iteration diverged at delta=%g "
                      "(base omega %.3g, %d iterations)",
                      delta, fail_omega, iters_used);
      else
        std::snprintf(msg, sizeof msg,
                      "solve_thinfilm: outer iteration stalled at delta=%g (last update %.3e "
                      "after %d iterations)",
                      delta, update, iters_used);
      fail_msg = msg;
    }
    return stage_ok;
  };

  // Continuation: walk the delta schedule with warm starts. After two
  // converged stages the next one starts from a log-delta extrapolation of
  // their solutions -- again an affine combination, so mass and traces stay
  // exact. A failed stage rolls the fields back and retries at the geometric
  // midpoint between the failed delta and the last converged one.
  std::vector<double> stack(deltas.rbegin(), deltas.rend());
  int insert_depth = 0;
  int total_attempts = 0;
  while (!stack.empty()) {
    const double delta = stack.back();
    const double drift_before = st.max_mass_drift;
    if (last_good && prev_good && prev_good_delta > last_good_delta) {
      const double lam = std::min(
          2.0, std::log(last_good_delta / delta) / std::log(prev_good_delta / last_good_delta));
      if (lam > 0.0) {
        for (std::size_t a = 0; a < N; ++a) {
          st.uh[a] = last_good->uh[a] + lam * (last_good->uh[a] - prev_good->uh[a]);
          st.V[a] = last_good->V[a] + lam * (last_good->V[a] - prev_good->V[a]);
          st.rho[a] = last_good->rho[a] + lam * (last_good->rho[a] - prev_good->rho[a]);
        }
        detail::impose_wall_traces(grid, prob.s, st.uh, st.V);
        st.mass = detail::thinfilm_mass(grid, st.rho);
      }
    }
    ++total_attempts;
    if (attempt_stage(delta)) {
      stack.pop_back();
      insert_depth = 0;
      prev_good = last_good;
      prev_good_delta = last_good_delta;
      last_good = st;
      last_good_delta = delta;
    } else {
      if (!last_good || insert_depth >= 8 || total_attempts > 100)
        throw ContinuationStallError(fail_msg, last_good_delta, last_good);
      // roll the fields back to the last converged stage; the cumulative
      // diagnostics (stage records, iteration counts) keep the failed attempt
      st.uh = last_good->uh;
      st.V = last_good->V;
      st.rho = last_good->rho;
      st.mass = last_good->mass;
      st.delta = last_good->delta;
      st.max_mass_drift = drift_before;
      stack.push_back(std::sqrt(delta * last_good_delta));
      ++insert_depth;
    }
  }

  st.converged = true;
  st.p.resize(N);
  for (std::size_t a = 0; a < N; ++a) st.p[a] = reg.p_R(std::max(st.rho[a], 0.0));
  ThinFilmSolution sol{std::move(st), {}};
  sol.report = make_estimate_report(prob, sol.state);
  return sol;
}

struct SweepRow {
  double eps = 0.0;
  bool solved = false;
  std::string error;
  double vertical_pressure_variation = 0.0;  // ||p - mean_Z p||_2 / ||p||_2
  double pressure_distance = 0.0;            // L2(y) distance of mean_Z p to the Reynolds pressure
  double shear_distance = 0.0;               // L2(Q) distance of d_Z uh to the Reynolds shear
  double delta_final = 0.0;
  int outer_iterations = 0;
  double max_mass_drift = 0.0;
  double wall_time_s = 0.0;
  EstimateReport report;
  std::shared_ptr<const ThinFilmState> state;  // set when solved
};

struct SweepTable {
  std::vector<SweepRow> rows;
  double reynolds_lambda = 0.0;
  double reynolds_wall_time_s = 0.0;
};

// Run the thin-film solver for each eps against one matched Reynolds solution
// (same gap, viscosity, sliding speed, and mass; the limit problem does not
// see eps). Rows keep going when a single eps fails; the error string records
// why.
inline SweepTable epsilon_sweep(const ThinFilmProblem& tmpl, const std::vector<double>& eps_list,
                                const ThinFilmOptions& opt = {}, const ReynoldsOptions& ropt = {}) {
  SweepTable table;
  const ReynoldsProblem rp{tmpl.gap, tmpl.law, tmpl.mu, tmpl.s, tmpl.M};
  const auto t0 = std::chrono::steady_clock::now();
  const ReynoldsSolution rs = solve_reynolds(rp, ropt);
  table.reynolds_lambda = rs.lambda;
  table.reynolds_wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::vector<double> ys(std::size_t(opt.nx));
  for (int i = 0; i < opt.nx; ++i) ys[std::size_t(i)] = double(i) / double(opt.nx);
  const std::vector<double> rho_rey = reynolds_sample(rp, rs.lambda, rs.rho0, ys);
  std::vector<double> p_rey(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) p_rey[i] = tmpl.law.p(rho_rey[i]);

  for (double eps : eps_list) {
    SweepRow row;
    row.eps = eps;
    const auto te = std::chrono::steady_clock::now();
    try {
      ThinFilmProblem prob = tmpl;
      prob.eps = eps;
      const ThinFilmSolution sol = solve_thinfilm(prob, opt);
      row.state = std::make_shared<ThinFilmState>(sol.state);
      const ThinFilmState& st = *row.state;
      const GridQ& grid = st.grid;
      row.solved = true;
      row.report = sol.report;
      row.vertical_pressure_variation = sol.report.vertical_pressure_variation;
      row.delta_final = st.delta;
      row.outer_iterations = st.outer_iterations;
      row.max_mass_drift = st.max_mass_drift;

      double acc_p = 0.0;
      for (int i = 0; i < grid.nx; ++i) {
        double pbar = 0.0;
        for (int j = 0; j <= grid.nz; ++j) {
          const double tw = (j == 0 || j == grid.nz) ? 0.5 : 1.0;
          pbar += tw * st.p[grid.node(i, j)] * grid.dzeta();
        }
        const double d = pbar - p_rey[std::size_t(i)];
        acc_p += d * d * grid.dy();
      }
      row.pressure_distance = std::sqrt(acc_p);

      double acc_s = 0.0;
      for (int i = 0; i < grid.nx; ++i) {
        const double h = grid.gap.h(grid.y(i));
        const double dpdy = reynolds_dpdy(rp, rs.lambda, ys[std::size_t(i)], rho_rey[std::size_t(i)]);
        for (int j = 0; j < grid.nz; ++j) {
          const double duh = (st.uh[grid.node(i, j + 1)] - st.uh[grid.node(i, j)]) / (grid.dzeta() * h);
          const double Zmid = (grid.zeta(j) + 0.5 * grid.dzeta()) * h;
          const double dv = dpdy / (2.0 * tmpl.mu) * (2.0 * Zmid - h) - tmpl.s / h;
          acc_s += (duh - dv) * (duh - dv) * h * grid.dzeta() * grid.dy();
        }
      }
      row.shear_distance = std::sqrt(acc_s);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - te).count();
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace lubrix
