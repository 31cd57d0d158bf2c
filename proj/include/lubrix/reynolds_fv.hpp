#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "lubrix/reynolds.hpp"

namespace lubrix {

struct FvOptions {
  double tol = 1e-12;       // max-norm residual target
  int max_iter = 60;
  double quad_tol = 1e-12;  // for the pressure primitive f
};

struct FvResult {
  std::vector<double> y;    // cell centers
  std::vector<double> rho;  // cell densities
  double lambda = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Finite-volume discretization of the same flux balance the shooting solver
// integrates, written per face in terms of the primitive f (f' = rho p'):
//   (h_f^3 / 12 mu) (f(rho_{i+1}) - f(rho_i)) / dy - s h_f rho_f / 2 - lambda = 0
// for every periodic face, closed by the mass condition dy sum h_i rho_i = M.
// The face density is the central average unless the face Peclet number
// exceeds 2, in which case it upwinds against the sliding direction. Solved by
// damped Newton (Armijo backtracking, iterates kept inside (0, rho_bar)).
inline FvResult fv_solve(const ReynoldsProblem& prob, int n, const FvOptions& opt = {}) {
  prob.validate();
  if (n < 4) throw std::invalid_argument("fv_solve: need n >= 4");
  const double dy = 1.0 / n;
  const double rb = prob.law.rho_bar;
  const double rho_ref = 0.5 * rb;

  FvResult out;
  out.y.resize(n);
  for (int i = 0; i < n; ++i) out.y[i] = (i + 0.5) / n;
  std::vector<double> hc(n), hf(n);  // cell-center and face gap values
  for (int i = 0; i < n; ++i) {
    hc[i] = prob.gap.h(out.y[i]);
    hf[i] = prob.gap.h((i + 1.0) / n);  // face i sits between cells i and i+1
  }

  // unknowns x = (rho_0 .. rho_{n-1}, lambda)
  Eigen::VectorXd x(n + 1);
  const double rho_init = prob.M / prob.gap.integral();
  for (int i = 0; i < n; ++i) x[i] = rho_init;
  x[n] = -prob.M * prob.s / 2.0;

  auto wrap = [&](int i) { return (i % n + n) % n; };

  // face weights for rho_f: (w_i, w_{i+1}); Peclet switch per evaluation
  auto face_weights = [&](int i, const Eigen::VectorXd& v, double& wi, double& wj) {
    const double rc = 0.5 * (v[i] + v[wrap(i + 1)]);
    const double diff = hf[i] * hf[i] * hf[i] / (12.0 * prob.mu) * rc *
                        prob.law.dp_unchecked(std::clamp(rc, 1e-12, rb * (1.0 - 1e-12)));
    const double pe = std::abs(0.5 * prob.s * hf[i]) * dy / std::max(diff, 1e-300);
    if (pe <= 2.0) {
      wi = wj = 0.5;
    } else if (prob.s > 0) {
      wi = 1.0;
      wj = 0.0;
    } else {
      wi = 0.0;
      wj = 1.0;
    }
  };

  auto f_of = [&](double rho) {
    return pressure_primitive_f(prob.law, rho, rho_ref, opt.quad_tol);
  };

  auto residual = [&](const Eigen::VectorXd& v, Eigen::VectorXd& F) {
    F.resize(n + 1);
    std::vector<double> fv(n);
    for (int i = 0; i < n; ++i) fv[i] = f_of(v[i]);
    for (int i = 0; i < n; ++i) {
      double wi, wj;
      face_weights(i, v, wi, wj);
      const double rho_f = wi * v[i] + wj * v[wrap(i + 1)];
      F[i] = hf[i] * hf[i] * hf[i] / (12.0 * prob.mu) * (fv[wrap(i + 1)] - fv[i]) / dy -
             0.5 * prob.s * hf[i] * rho_f - v[n];
    }
    double m = 0.0;
    for (int i = 0; i < n; ++i) m += hc[i] * v[i];
    F[n] = dy * m - prob.M;
  };

  Eigen::VectorXd F;
  residual(x, F);
  out.residual = F.lpNorm<Eigen::Infinity>();

  Eigen::SparseMatrix<double> J(n + 1, n + 1);
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;

  for (out.iterations = 0; out.iterations < opt.max_iter; ++out.iterations) {
    if (out.residual <= opt.tol) {
      out.converged = true;
      break;
    }
    trip.clear();
    for (int i = 0; i < n; ++i) {
      const int j = wrap(i + 1);
      double wi, wj;
      face_weights(i, x, wi, wj);
      const double k = hf[i] * hf[i] * hf[i] / (12.0 * prob.mu * dy);
      trip.emplace_back(i, i, -k * x[i] * prob.law.dp_unchecked(x[i]) - 0.5 * prob.s * hf[i] * wi);
      trip.emplace_back(i, j, k * x[j] * prob.law.dp_unchecked(x[j]) - 0.5 * prob.s * hf[i] * wj);
      trip.emplace_back(i, n, -1.0);
      trip.emplace_back(n, i, dy * hc[i]);
    }
    J.setFromTriplets(trip.begin(), trip.end());
    lu.compute(J);
    if (lu.info() != Eigen::Success) throw std::runtime_error("fv_solve: singular Jacobian");
    Eigen::VectorXd d = lu.solve(-F);

    // keep the density iterate strictly inside (0, rho_bar)
    double alpha = 1.0;
    for (int i = 0; i < n; ++i) {
      if (d[i] > 0) alpha = std::min(alpha, (rb * (1.0 - 1e-9) - x[i]) / d[i]);
      if (d[i] < 0) alpha = std::min(alpha, (1e-9 * rb - x[i]) / d[i]);
    }
    alpha = std::max(alpha, 0.0);

    const double f0 = F.norm();
    Eigen::VectorXd xt, Ft;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      xt = x + alpha * d;
      residual(xt, Ft);
      if (Ft.norm() <= (1.0 - 1e-4 * alpha) * f0) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // stagnated; report the residual we reached
    x = xt;
    F = Ft;
    out.residual = F.lpNorm<Eigen::Infinity>();
  }
  if (out.residual <= opt.tol) out.converged = true;

  out.rho.assign(n, 0.0);
  for (int i = 0; i < n; ++i) out.rho[i] = x[i];
  out.lambda = x[n];
  return out;
}

// Restrict a fine cell-centered field to the next coarser grid: averaging
// adjacent pairs of centers at resolution 2n lands exactly on the centers at
// resolution n.
inline std::vector<double> fv_restrict(const std::vector<double>& fine) {
  if (fine.size() % 2 != 0) throw std::invalid_argument("fv_restrict: need even size");
  std::vector<double> coarse(fine.size() / 2);
  for (std::size_t i = 0; i < coarse.size(); ++i)
    coarse[i] = 0.5 * (fine[2 * i] + fine[2 * i + 1]);
  return coarse;
}

}  // namespace lubrix
