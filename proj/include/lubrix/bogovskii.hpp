#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace lubrix {

// Staggered rectangle grid: scalar data at cell centers, the x-component of a
// vector field on vertical faces and the y-component on horizontal faces, so
// the discrete cell divergence is exact face-difference bookkeeping. With
// periodic_x the left and right edges are identified (strip geometry).
struct MacGrid {
  int nx = 0, ny = 0;
  double Lx = 1.0, Ly = 1.0;
  bool periodic_x = false;

  MacGrid(int nx_, int ny_, double Lx_, double Ly_, bool periodic_x_ = false)
      : nx(nx_), ny(ny_), Lx(Lx_), Ly(Ly_), periodic_x(periodic_x_) {
    if (nx < 2 || ny < 2) throw std::invalid_argument("MacGrid: need nx, ny >= 2");
    if (!(Lx > 0) || !(Ly > 0)) throw std::invalid_argument("MacGrid: side lengths must be > 0");
  }

  double hx() const { return Lx / double(nx); }
  double hy() const { return Ly / double(ny); }
  int n_xfaces_per_row() const { return periodic_x ? nx : nx + 1; }
  int wrap_x(int i) const {
    int r = i % nx;
    return r < 0 ? r + nx : r;
  }
  std::size_t cell(int i, int j) const { return std::size_t(j) * nx + std::size_t(periodic_x ? wrap_x(i) : i); }
};

// Face-based vector field on a MacGrid. bx(i, j) sits at (i hx, (j+1/2) hy)
// (i wrapped when periodic), by(i, j) at ((i+1/2) hx, j hy).
struct MacField {
  MacGrid grid;
  std::vector<double> bx, by;

  explicit MacField(const MacGrid& g)
      : grid(g),
        bx(std::size_t(g.n_xfaces_per_row()) * std::size_t(g.ny), 0.0),
        by(std::size_t(g.nx) * std::size_t(g.ny + 1), 0.0) {}

  std::size_t bx_idx(int i, int j) const {
    if (grid.periodic_x) i = grid.wrap_x(i);
    return std::size_t(j) * std::size_t(grid.n_xfaces_per_row()) + std::size_t(i);
  }
  std::size_t by_idx(int i, int j) const {
    if (grid.periodic_x) i = grid.wrap_x(i);
    return std::size_t(j) * std::size_t(grid.nx) + std::size_t(i);
  }

  double divergence(int i, int j) const {
    return (bx[bx_idx(i + 1, j)] - bx[bx_idx(i, j)]) / grid.hx() +
           (by[by_idx(i, j + 1)] - by[by_idx(i, j)]) / grid.hy();
  }
};

struct BogovskiiResult {
  MacField B;
  double div_residual_max = 0.0;  // max_c |div B - (f - mean f)| including the dropped cell
  double boundary_max = 0.0;      // max |B| over boundary faces (zero by construction)
  double grad_seminorm = 0.0;     // sqrt of the minimized quadratic (discrete |B|_{H^1_0})
  double l2_norm = 0.0;           // cell-averaged L2 norm of B
  double f_l2 = 0.0;              // L2 norm of f - mean f
  double stability_constant = 0.0;  // W^{1,2} norm of B over f_l2 (empirical operator bound)
};

// Right inverse of the divergence with zero boundary values: among all face
// fields with div B = f - mean(f) cell-wise, return the one minimizing the
// discrete gradient energy. Boundary faces are not unknowns (they stay exactly
// zero), tangential walls enter the energy through mirror ghosts, and the one
// redundant cell constraint (the rows sum to zero) is dropped before the
// saddle-point solve.
inline BogovskiiResult bogovskii_solve(const MacGrid& grid, const std::vector<double>& f) {
  const int nx = grid.nx, ny = grid.ny;
  const std::size_t ncells = std::size_t(nx) * std::size_t(ny);
  if (f.size() != ncells) throw std::invalid_argument("bogovskii_solve: f must have one value per cell");
  const double hx = grid.hx(), hy = grid.hy();
  const double vol = hx * hy;

  double mean = 0.0;
  for (double v : f) mean += v;
  mean /= double(ncells);

  // Unknowns: interior x-faces then interior y-faces. On a box the x-faces at
  // i = 0 and i = nx are boundary; on a periodic strip every x-face is free.
  MacField B(grid);
  std::vector<long> dof_x(B.bx.size(), -1), dof_y(B.by.size(), -1);
  long ndof = 0;
  const int i_lo = grid.periodic_x ? 0 : 1;
  const int i_hi = grid.periodic_x ? nx - 1 : nx - 1;
  for (int j = 0; j < ny; ++j)
    for (int i = i_lo; i <= i_hi; ++i) dof_x[B.bx_idx(i, j)] = ndof++;
  for (int j = 1; j <= ny - 1; ++j)
    for (int i = 0; i < nx; ++i) dof_y[B.by_idx(i, j)] = ndof++;

  const long ncon = long(ncells) - 1;  // drop the last cell's row
  const long nsys = ndof + ncon;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nsys);

  // Gradient energy: for each pair of same-component neighboring faces a
  // difference quotient, with fixed (zero) neighbors contributing diagonal
  // terms and tangential walls closed by the mirror ghost value -B.
  auto add_pair = [&](long da, long db, double w) {
    // energy w (B_a - B_b)^2 contributes [w, -w; -w, w]; db < 0 means B_b = 0
    if (da >= 0) trip.emplace_back(da, da, 2.0 * w);
    if (db >= 0) trip.emplace_back(db, db, 2.0 * w);
    if (da >= 0 && db >= 0) {
      trip.emplace_back(da, db, -2.0 * w);
      trip.emplace_back(db, da, -2.0 * w);
    }
  };
  const double wx = vol / (hx * hx), wy = vol / (hy * hy);

  // x-component: x-neighbors along each row (bx_idx wraps on the strip, and on
  // the box the i = 0 / nx faces show up as fixed-zero partners).
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) add_pair(dof_x[B.bx_idx(i, j)], dof_x[B.bx_idx(i + 1, j)], wx);
  for (int i = i_lo; i <= i_hi; ++i) {
    for (int j = 0; j + 1 < ny; ++j) add_pair(dof_x[B.bx_idx(i, j)], dof_x[B.bx_idx(i, j + 1)], wy);
    // mirror ghosts across the bottom and top walls: B_ghost = -B
    const long d0 = dof_x[B.bx_idx(i, 0)], d1 = dof_x[B.bx_idx(i, ny - 1)];
    if (d0 >= 0) trip.emplace_back(d0, d0, 4.0 * wy);
    if (d1 >= 0) trip.emplace_back(d1, d1, 4.0 * wy);
  }
  // y-component: y-neighbors along each column (ends fixed at the walls),
  // x-neighbors along each row (box: mirror ghosts at the side walls).
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) add_pair(dof_y[B.by_idx(i, j)], dof_y[B.by_idx(i, j + 1)], wy);
  for (int j = 1; j <= ny - 1; ++j) {
    if (grid.periodic_x) {
      for (int i = 0; i < nx; ++i) add_pair(dof_y[B.by_idx(i, j)], dof_y[B.by_idx(i + 1, j)], wx);
    } else {
      for (int i = 0; i + 1 < nx; ++i) add_pair(dof_y[B.by_idx(i, j)], dof_y[B.by_idx(i + 1, j)], wx);
      const long d0 = dof_y[B.by_idx(0, j)], d1 = dof_y[B.by_idx(nx - 1, j)];
      trip.emplace_back(d0, d0, 4.0 * wx);
      trip.emplace_back(d1, d1, 4.0 * wx);
    }
  }

  // Constraint rows: cell divergence equals f - mean(f).
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const long row = long(grid.cell(i, j));
      if (row >= ncon) continue;  // dropped cell
      auto put = [&](long d, double coeff) {
        if (d < 0) return;
        trip.emplace_back(ndof + row, d, coeff);
        trip.emplace_back(d, ndof + row, coeff);
      };
      put(dof_x[B.bx_idx(i + 1, j)], 1.0 / hx);
      put(dof_x[B.bx_idx(i, j)], -1.0 / hx);
      put(dof_y[B.by_idx(i, j + 1)], 1.0 / hy);
      put(dof_y[B.by_idx(i, j)], -1.0 / hy);
      rhs[ndof + row] = f[grid.cell(i, j)] - mean;
    }

  Eigen::SparseMatrix<double> K(nsys, nsys);
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("bogovskii_solve: saddle-point factorization failed (degenerate grid?)");
  const Eigen::VectorXd x = lu.solve(rhs);

  for (std::size_t k = 0; k < B.bx.size(); ++k)
    if (dof_x[k] >= 0) B.bx[k] = x[dof_x[k]];
  for (std::size_t k = 0; k < B.by.size(); ++k)
    if (dof_y[k] >= 0) B.by[k] = x[dof_y[k]];

  BogovskiiResult out{B};
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double r = B.divergence(i, j) - (f[grid.cell(i, j)] - mean);
      out.div_residual_max = std::max(out.div_residual_max, std::abs(r));
    }
  if (!grid.periodic_x)
    for (int j = 0; j < ny; ++j) {
      out.boundary_max = std::max(out.boundary_max, std::abs(B.bx[B.bx_idx(0, j)]));
      out.boundary_max = std::max(out.boundary_max, std::abs(B.bx[B.bx_idx(nx, j)]));
    }
  for (int i = 0; i < nx; ++i) {
    out.boundary_max = std::max(out.boundary_max, std::abs(B.by[B.by_idx(i, 0)]));
    out.boundary_max = std::max(out.boundary_max, std::abs(B.by[B.by_idx(i, ny)]));
  }

  // Energy actually minimized (for the reported seminorm) and simple norms.
  double energy = 0.0;
  {
    const Eigen::VectorXd u = x.head(ndof);
    const Eigen::SparseMatrix<double> A = K.topLeftCorner(ndof, ndof);
    energy = 0.5 * u.dot(A * u);
  }
  out.grad_seminorm = std::sqrt(std::max(0.0, energy));
  double l2 = 0.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double cx = 0.5 * (B.bx[B.bx_idx(i, j)] + B.bx[B.bx_idx(i + 1, j)]);
      const double cy = 0.5 * (B.by[B.by_idx(i, j)] + B.by[B.by_idx(i, j + 1)]);
      l2 += vol * (cx * cx + cy * cy);
    }
  out.l2_norm = std::sqrt(l2);
  double fl2 = 0.0;
  for (double v : f) fl2 += vol * (v - mean) * (v - mean);
  out.f_l2 = std::sqrt(fl2);
  out.stability_constant =
      out.f_l2 > 0 ? std::sqrt(l2 + out.grad_seminorm * out.grad_seminorm) / out.f_l2 : 0.0;
  return out;
}

}  // namespace lubrix
