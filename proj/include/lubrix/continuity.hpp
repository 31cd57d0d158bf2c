#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "lubrix/eos.hpp"
#include "lubrix/grid.hpp"

namespace lubrix {

struct ContinuityResult {
  std::vector<double> rho;
  int pattern_iterations = 0;
  bool pattern_converged = false;
  double mass = 0.0;  // sum of rho times the dual-cell volumes
  double rho_min = 0.0, rho_max = 0.0;
};

// Solve the regularized transport balance
//   delta rho - delta div(A grad rho) + div(T(rho) u) = g
// on the film domain in sigma coordinates, periodic in y, with no flux through
// top and bottom. A is the anisotropic diffusion tensor of the sigma mapping,
//   A_yy = h,  A_ysigma = -sigma h',  A_ss = ((sigma h')^2 + eps^-2) / h,
// and convection crosses faces with the contravariant speeds U = h uh
// (y-faces) and W = V - sigma h' uh (sigma-faces). Fluxes are conservative
// (every interior face appears in exactly two balance rows with opposite
// sign), so summing all rows yields the exact discrete identity
//   delta sum rho vol = sum g vol.
// The clamp T makes the system piecewise linear; each pass freezes the
// saturation pattern of the previous iterate, solves the resulting linear
// system, and repeats until the pattern reproduces itself. Upwinding the face
// density makes the frozen system's convection matrix have zero column sums,
// which on flat gaps (no cross terms) yields an M-matrix and therefore an
// exact discrete comparison principle.
//
// The solver object reuses the symbolic factorization across calls: the
// upwind and clamp contributions always land inside the face blocks the
// diffusion stencil already occupies, so the assembled pattern depends only
// on the grid and the gap geometry.
class ContinuitySolver {
 public:
  explicit ContinuitySolver(GridQ grid) : grid_(std::move(grid)) {}

  const GridQ& grid() const { return grid_; }

  ContinuityResult solve(double rho_bar, double delta, const std::vector<double>& uh,
                         const std::vector<double>& V, const std::vector<double>& g,
                         int max_pattern_iters = 30) {
    const GridQ& grid = grid_;
    const int nx = grid.nx, nz = grid.nz;
    const std::size_t n = grid.n_nodes();
    if (uh.size() != n || V.size() != n || g.size() != n)
      throw std::invalid_argument("solve_continuity: field size mismatch");
    if (!(delta > 0) || !(rho_bar > 0))
      throw std::invalid_argument("solve_continuity: need delta > 0 and rho_bar > 0");

    const double dy = grid.dy(), ds = grid.dzeta();
    const double inv_eps2 = 1.0 / (grid.eps * grid.eps);

    // saturation pattern: 0 = below zero, 1 = interior, 2 = at the ceiling
    std::vector<int> pat(n, 1), pat_new(n, 1);
    ContinuityResult out;
    out.rho.assign(n, 0.0);

    Eigen::VectorXd rhs(n);

    for (out.pattern_iterations = 1; out.pattern_iterations <= max_pattern_iters;
         ++out.pattern_iterations) {
      trip_.clear();
      rhs.setZero();

      // reaction and source
      for (int j = 0; j <= nz; ++j)
        for (int i = 0; i < nx; ++i) {
          const auto a = grid.node(i, j);
          const double vol = grid.node_volume(i, j);
          trip_.emplace_back(a, a, delta * vol);
          rhs[a] += g[a] * vol;
        }

      // convective transfer of the clamped density across a face with
      // contravariant normal speed q and area w, upwinded
      auto convect = [&](std::size_t a, std::size_t b, double q, double w) {
        const std::size_t up = (q >= 0) ? a : b;
        const double c = q * w;
        if (pat[up] == 1) {
          trip_.emplace_back(a, up, c);
          trip_.emplace_back(b, up, -c);
        } else if (pat[up] == 2) {
          rhs[a] -= c * rho_bar;
          rhs[b] += c * rho_bar;
        }  // below zero: clamp transports nothing
      };

      // vertical faces between (i, j) and (i+1, j)
      for (int j = 0; j <= nz; ++j) {
        const double w = (j == 0 || j == nz) ? 0.5 * ds : ds;
        const double sig = grid.zeta(j);
        for (int i = 0; i < nx; ++i) {
          const std::size_t a = grid.node(i, j), b = grid.node(i + 1, j);
          const double yf = (i + 0.5) * dy;  // face midway between nodes i and i+1
          const double hf = grid.gap.h(yf), dhf = grid.gap.dh(yf);

          // diffusion: A_yy (rho_b - rho_a)/dy plus the cross term
          const double kyy = delta * w * hf / dy;
          trip_.emplace_back(a, a, kyy);
          trip_.emplace_back(a, b, -kyy);
          trip_.emplace_back(b, b, kyy);
          trip_.emplace_back(b, a, -kyy);

          const double kcross = delta * w * sig * dhf;  // times d rho / d sigma at the face
          if (sig * dhf != 0.0) {
            // average the one-sided sigma differences of both columns
            struct Term {
              std::size_t node;
              double coeff;
            };
            Term terms[4];
            int nterms = 0;
            for (int col : {i, i + 1}) {
              if (j == 0) {
                terms[nterms++] = {grid.node(col, 1), 0.5 / ds};
                terms[nterms++] = {grid.node(col, 0), -0.5 / ds};
              } else if (j == nz) {
                terms[nterms++] = {grid.node(col, nz), 0.5 / ds};
                terms[nterms++] = {grid.node(col, nz - 1), -0.5 / ds};
              } else {
                terms[nterms++] = {grid.node(col, j + 1), 0.25 / ds};
                terms[nterms++] = {grid.node(col, j - 1), -0.25 / ds};
              }
            }
            for (int t = 0; t < nterms; ++t) {
              trip_.emplace_back(a, terms[t].node, kcross * terms[t].coeff);
              trip_.emplace_back(b, terms[t].node, -kcross * terms[t].coeff);
            }
          }

          const double uf = 0.5 * (uh[a] + uh[b]);
          convect(a, b, hf * uf, w);
        }
      }

      // horizontal faces between (i, j) and (i, j+1); none through sigma = 0, 1
      for (int j = 0; j < nz; ++j) {
        const double sf = (j + 0.5) * ds;
        for (int i = 0; i < nx; ++i) {
          const std::size_t a = grid.node(i, j), b = grid.node(i, j + 1);
          const double hy = grid.gap.h(grid.y(i)), dhy = grid.gap.dh(grid.y(i));
          const double ass = ((sf * dhy) * (sf * dhy) + inv_eps2) / hy;

          const double kss = delta * dy * ass / ds;
          trip_.emplace_back(a, a, kss);
          trip_.emplace_back(a, b, -kss);
          trip_.emplace_back(b, b, kss);
          trip_.emplace_back(b, a, -kss);

          const double kcross = delta * dy * sf * dhy;  // times d rho / d y at the face
          if (dhy != 0.0) {
            for (int row : {j, j + 1}) {
              trip_.emplace_back(a, grid.node(i + 1, row), kcross * 0.25 / dy);
              trip_.emplace_back(a, grid.node(i - 1, row), -kcross * 0.25 / dy);
              trip_.emplace_back(b, grid.node(i + 1, row), -kcross * 0.25 / dy);
              trip_.emplace_back(b, grid.node(i - 1, row), kcross * 0.25 / dy);
            }
          }

          const double uf = 0.5 * (uh[a] + uh[b]);
          const double wf = 0.5 * (V[a] + V[b]) - sf * dhy * uf;
          convect(a, b, wf, dy);
        }
      }

      M_.resize(n, n);
      M_.setFromTriplets(trip_.begin(), trip_.end());
      if (!analyzed_) {
        lu_.analyzePattern(M_);
        analyzed_ = true;
      }
      lu_.factorize(M_);
      if (lu_.info() != Eigen::Success)
        throw std::runtime_error("solve_continuity: factorization failed");
      Eigen::VectorXd x = lu_.solve(rhs);
      // One step of iterative refinement: the reaction term shrinks with the
      // regularization parameter, and the bare LU error would otherwise feed
      // back through the outer coupling.
      x += lu_.solve(rhs - M_ * x);

      bool changed = false;
      for (std::size_t a = 0; a < n; ++a) {
        out.rho[a] = x[a];
        pat_new[a] = (x[a] <= 0.0) ? 0 : (x[a] >= rho_bar ? 2 : 1);
        if (pat_new[a] != pat[a]) changed = true;
      }
      if (!changed) {
        out.pattern_converged = true;
        break;
      }
      pat.swap(pat_new);
    }

    out.mass = 0.0;
    out.rho_min = out.rho[0];
    out.rho_max = out.rho[0];
    for (int j = 0; j <= nz; ++j)
      for (int i = 0; i < nx; ++i) {
        const auto a = grid.node(i, j);
        out.mass += out.rho[a] * grid.node_volume(i, j);
        out.rho_min = std::min(out.rho_min, out.rho[a]);
        out.rho_max = std::max(out.rho_max, out.rho[a]);
      }
    return out;
  }

 private:
  GridQ grid_;
  Eigen::SparseMatrix<double> M_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  bool analyzed_ = false;
  std::vector<Eigen::Triplet<double>> trip_;
};

inline ContinuityResult solve_continuity(const GridQ& grid, double rho_bar, double delta,
                                         const std::vector<double>& uh,
                                         const std::vector<double>& V,
                                         const std::vector<double>& g,
                                         int max_pattern_iters = 30) {
  ContinuitySolver solver(grid);
  return solver.solve(rho_bar, delta, uh, V, g, max_pattern_iters);
}

}  // namespace lubrix
