#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "lubrix/grid.hpp"

namespace lubrix {

struct MomentumResult {
  std::vector<double> uh, V;
};

// One linearized momentum solve on the film domain: bilinear elements on the
// boundary-fitted quadrilaterals (y_i, zeta_j h(y_i)), periodic in y, with the
// sliding wall uh = s, V = 0 at the bottom and uh = V = 0 at the top. All
// terms carry their thin-film scaling (horizontal balance times eps^2,
// vertical times eps^3, pressure rescaled accordingly), so the system stays
// O(1) as eps shrinks:
//   mu (eps^2 dy uh dy ph + dZ uh dZ ph) + eps^2 mu (eps^2 dy V dy pv + dZ V dZ pv)
//   + eps^2 (lambda_v + mu) (div u)(div psi)
//   + delta [eps^2 dy(rho uh) dy ph + dZ(rho uh) dZ ph]
//   + delta eps^2 [eps^2 dy(rho V) dy pv + dZ(rho V) dZ pv]
//   + delta (eps^2 rho uh ph + eps^4 rho V pv)
//   - eps^2 uh (rho u_prev . grad ph) - eps^4 V (rho u_prev . grad pv)
//   = - dy(p_hat) ph - dZ(p_hat) pv,
// with div u = dy uh + dZ V. The pressure enters through its interpolated
// gradient, so a constant nodal p_hat produces an exactly zero load and the
// rest state is reproduced to machine precision. The convection is lagged at
// u_prev (fixed-point outer iteration).
//
// The solver object keeps the sparse structure and the symbolic factorization
// between calls: the stencil never changes for a fixed grid, so repeated
// solves (the outer thin-film iteration) only pay for a numeric refactor.
class MomentumSolver {
 public:
  explicit MomentumSolver(GridQ grid) : grid_(std::move(grid)) {}

  const GridQ& grid() const { return grid_; }

  MomentumResult solve(double mu, double lambda_visc, double delta, double s,
                       const std::vector<double>& rho, const std::vector<double>& p_hat,
                       const std::vector<double>& uh_prev, const std::vector<double>& V_prev) {
    const GridQ& grid = grid_;
    const int nx = grid.nx, nz = grid.nz;
    const std::size_t N = grid.n_nodes();
    if (rho.size() != N || p_hat.size() != N || uh_prev.size() != N || V_prev.size() != N)
      throw std::invalid_argument("solve_momentum: field size mismatch");
    const double eps = grid.eps;
    const double e2 = eps * eps, e4 = e2 * e2;

    // dof layout: [uh_0 .. uh_{N-1}, V_0 .. V_{N-1}]
    auto constrained = [&](std::size_t node) {
      const int j = static_cast<int>(node / nx);
      return j == 0 || j == nz;
    };

    trip_.clear();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * N);
    // entries are emitted for every stencil slot, zero or not, so the
    // assembled pattern is identical on every call
    auto add = [&](std::size_t row, std::size_t col, double v) {
      if (!constrained(row % N)) trip_.emplace_back(row, col, v);
    };

    // 2x2 Gauss on the reference square
    const double gp = 1.0 / std::sqrt(3.0);
    const std::array<double, 2> pts{-gp, gp};

    for (int ei = 0; ei < nx; ++ei)
      for (int ej = 0; ej < nz; ++ej) {
        const std::array<std::size_t, 4> nodes{grid.node(ei, ej), grid.node(ei + 1, ej),
                                               grid.node(ei + 1, ej + 1), grid.node(ei, ej + 1)};
        // physical corner coordinates; the right edge of the last column lives
        // at y = 1, not at the wrapped 0
        const double y0 = grid.y(ei), y1 = (ei + 1) * grid.dy();
        const std::array<double, 4> xs{y0, y1, y1, y0};
        const std::array<double, 4> zs{grid.zeta(ej) * grid.gap.h(y0),
                                       grid.zeta(ej) * grid.gap.h(y1),
                                       grid.zeta(ej + 1) * grid.gap.h(y1),
                                       grid.zeta(ej + 1) * grid.gap.h(y0)};

        for (double xi : pts)
          for (double eta : pts) {
            const std::array<double, 4> Nq{0.25 * (1 - xi) * (1 - eta),
                                           0.25 * (1 + xi) * (1 - eta),
                                           0.25 * (1 + xi) * (1 + eta),
                                           0.25 * (1 - xi) * (1 + eta)};
            const std::array<double, 4> dNxi{-0.25 * (1 - eta), 0.25 * (1 - eta),
                                             0.25 * (1 + eta), -0.25 * (1 + eta)};
            const std::array<double, 4> dNeta{-0.25 * (1 - xi), -0.25 * (1 + xi),
                                              0.25 * (1 + xi), 0.25 * (1 - xi)};
            double Jyx = 0, Jye = 0, Jzx = 0, Jze = 0;
            for (int a = 0; a < 4; ++a) {
              Jyx += xs[a] * dNxi[a];
              Jye += xs[a] * dNeta[a];
              Jzx += zs[a] * dNxi[a];
              Jze += zs[a] * dNeta[a];
            }
            const double det = Jyx * Jze - Jye * Jzx;
            const double w = det;  // Gauss weights are 1 for the 2x2 rule
            std::array<double, 4> dNy, dNz;
            for (int a = 0; a < 4; ++a) {
              dNy[a] = (Jze * dNxi[a] - Jzx * dNeta[a]) / det;
              dNz[a] = (-Jye * dNxi[a] + Jyx * dNeta[a]) / det;
            }

            // Interpolated pressure gradient, with the first corner value
            // subtracted so a constant field yields an exactly zero load in
            // floating point (the shape-function derivatives sum to zero).
            const double p_ref = p_hat[nodes[0]];
            double rho_q = 0, dpy = 0, dpz = 0, upy = 0, upz = 0;
            for (int a = 0; a < 4; ++a) {
              rho_q += rho[nodes[a]] * Nq[a];
              dpy += (p_hat[nodes[a]] - p_ref) * dNy[a];
              dpz += (p_hat[nodes[a]] - p_ref) * dNz[a];
              upy += uh_prev[nodes[a]] * Nq[a];
              upz += V_prev[nodes[a]] * Nq[a];
            }

            for (int a = 0; a < 4; ++a) {
              const std::size_t ra = nodes[a], rv = N + nodes[a];
              // pressure load in gradient form
              rhs[ra] += constrained(nodes[a]) ? 0.0 : -w * dpy * Nq[a];
              rhs[rv] += constrained(nodes[a]) ? 0.0 : -w * dpz * Nq[a];
              // lagged convection: rho u_prev . grad of the test function
              const double conv_a = rho_q * (upy * dNy[a] + upz * dNz[a]);
              for (int b = 0; b < 4; ++b) {
                const std::size_t ch = nodes[b], cv = N + nodes[b];
                const double rb = rho[nodes[b]];
                // horizontal row, horizontal column
                double hh = mu * (e2 * dNy[a] * dNy[b] + dNz[a] * dNz[b]);
                hh += (lambda_visc + mu) * e2 * dNy[a] * dNy[b];
                hh += delta * rb * (e2 * dNy[a] * dNy[b] + dNz[a] * dNz[b]);
                hh += delta * e2 * rho_q * Nq[a] * Nq[b];
                hh -= e2 * conv_a * Nq[b];
                add(ra, ch, w * hh);
                // horizontal row, vertical column (elongational coupling)
                add(ra, cv, w * (lambda_visc + mu) * e2 * dNy[a] * dNz[b]);
                // vertical row, horizontal column
                add(rv, ch, w * (lambda_visc + mu) * e2 * dNz[a] * dNy[b]);
                // vertical row, vertical column
                double vv = e2 * mu * (e2 * dNy[a] * dNy[b] + dNz[a] * dNz[b]);
                vv += (lambda_visc + mu) * e2 * dNz[a] * dNz[b];
                vv += delta * e2 * rb * (e2 * dNy[a] * dNy[b] + dNz[a] * dNz[b]);
                vv += delta * e4 * rho_q * Nq[a] * Nq[b];
                vv -= e4 * conv_a * Nq[b];
                add(rv, cv, w * vv);
              }
            }
          }
      }

    // Dirichlet rows: identity with the prescribed wall values
    for (std::size_t a = 0; a < N; ++a) {
      if (!constrained(a)) continue;
      const int j = static_cast<int>(a / nx);
      trip_.emplace_back(a, a, 1.0);
      trip_.emplace_back(N + a, N + a, 1.0);
      rhs[a] = (j == 0) ? s : 0.0;
      rhs[N + a] = 0.0;
    }

    A_.resize(2 * N, 2 * N);
    A_.setFromTriplets(trip_.begin(), trip_.end());
    if (!analyzed_) {
      lu_.analyzePattern(A_);
      analyzed_ = true;
    }
    lu_.factorize(A_);
    if (lu_.info() != Eigen::Success)
      throw std::runtime_error("solve_momentum: factorization failed");
    Eigen::VectorXd x = lu_.solve(rhs);
    // one refinement step; the vertical block is stiff at small aspect ratio
    x += lu_.solve(rhs - A_ * x);

    MomentumResult out;
    out.uh.assign(N, 0.0);
    out.V.assign(N, 0.0);
    for (std::size_t a = 0; a < N; ++a) {
      out.uh[a] = x[a];
      out.V[a] = x[N + a];
    }
    return out;
  }

 private:
  GridQ grid_;
  Eigen::SparseMatrix<double> A_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  bool analyzed_ = false;
  std::vector<Eigen::Triplet<double>> trip_;
};

inline MomentumResult solve_momentum(const GridQ& grid, double mu, double lambda_visc,
                                     double delta, double s, const std::vector<double>& rho,
                                     const std::vector<double>& p_hat,
                                     const std::vector<double>& uh_prev,
                                     const std::vector<double>& V_prev) {
  MomentumSolver solver(grid);
  return solver.solve(mu, lambda_visc, delta, s, rho, p_hat, uh_prev, V_prev);
}

}  // namespace lubrix
