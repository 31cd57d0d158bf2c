#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "lubrix/bogovskii.hpp"
#include "lubrix/gap.hpp"

namespace lubrix {

// C^2 bump used for all boundary-layer extensions: psi(0) = 1, psi'(0) = 0,
// and psi vanishes to second order at t = 1 (identically zero beyond).
inline double bump_psi(double t) {
  if (t >= 1.0) return 0.0;
  if (t <= 0.0) return 1.0;
  const double u = 1.0 - t;
  return u * u * u * (1.0 + 3.0 * t);
}

inline double bump_dpsi(double t) {
  if (t >= 1.0 || t <= 0.0) return 0.0;
  const double u = 1.0 - t;
  return -12.0 * t * u * u;
}

// Closed-form profile integrals over [0, 1] (Beta-function values):
//   int psi^2 = 2/7, int psi^4 = 1546/7735, int (psi')^2 = 48/35.
inline constexpr double bump_psi_sq_integral() { return 2.0 / 7.0; }
inline constexpr double bump_psi_pow4_integral() { return 1546.0 / 7735.0; }
inline constexpr double bump_dpsi_sq_integral() { return 48.0 / 35.0; }

// Divergence-free extension of the constant sliding velocity s at the bottom
// wall into the film domain {0 < Z < h(y)}: u = (s psi(Z/eta), 0). It matches
// the wall data exactly, vanishes for Z >= eta, and is divergence-free because
// the horizontal component does not depend on y at fixed Z. Its L^q norms are
// closed-form: |s| (eta int psi^q)^{1/q}, independent of the gap since the
// layer fits under h everywhere.
struct SimpleExtension {
  double s = 0.0;
  double eta = 0.0;

  double uh(double Z) const { return s * bump_psi(Z / eta); }
  double duh_dZ(double Z) const { return s / eta * bump_dpsi(Z / eta); }

  double lq_norm(int q) const {
    switch (q) {
      case 2:
        return std::abs(s) * std::sqrt(eta * bump_psi_sq_integral());
      case 4:
        return std::abs(s) * std::pow(eta * bump_psi_pow4_integral(), 0.25);
      default:
        throw std::invalid_argument("SimpleExtension::lq_norm: closed form available for q in {2, 4}");
    }
  }
  double sup_norm() const { return std::abs(s); }
  // max |psi'| = 16/9 at t = 1/3, so the derivative bound constant is 16/9.
  double dZ_sup_norm() const { return std::abs(s) / eta * (16.0 / 9.0); }
};

inline SimpleExtension simple_extension(double s, double eta, const GapProfile& gap) {
  if (!(eta > 0.0)) throw std::invalid_argument("simple_extension: eta must be > 0");
  if (!(eta < gap.h_min()))
    throw std::invalid_argument("simple_extension: layer width eta must be smaller than min h");
  return SimpleExtension{s, eta};
}

// Divergence-free extension of variable periodic wall data g(y): start from
// the sheared layer (g(y) psi(z/eta), 0), which is supported in the flat strip
// {0 < z < eta} below the gap, and subtract the Bogovskii field of its
// discrete divergence on that strip. The correction vanishes on the strip
// boundary, so the wall trace g survives exactly and the whole field extends
// by zero to the rest of the film domain. Using the staggered divergence of
// the sampled layer as the Bogovskii right side makes div(u) vanish to solver
// precision cell by cell.
struct CorrectedExtension {
  MacGrid grid;               // periodic strip [0,1) x [0, eta]
  MacField u;                 // corrected field on the strip; zero above
  std::vector<double> trace;  // bottom-wall horizontal values g(y_i) (exact)
  double eta = 0.0;
  double div_residual_max = 0.0;
  double correction_l2 = 0.0;  // size of the Bogovskii correction

  double lq_norm(int q) const {
    double acc = 0.0;
    const double vol = grid.hx() * grid.hy();
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) {
        const double cx = 0.5 * (u.bx[u.bx_idx(i, j)] + u.bx[u.bx_idx(i + 1, j)]);
        const double cy = 0.5 * (u.by[u.by_idx(i, j)] + u.by[u.by_idx(i, j + 1)]);
        acc += vol * std::pow(cx * cx + cy * cy, 0.5 * double(q));
      }
    return std::pow(acc, 1.0 / double(q));
  }
};

inline CorrectedExtension corrected_extension(const std::function<double(double)>& g, double eta,
                                              const GapProfile& gap, int nx = 64, int nz = 16) {
  if (!(eta > 0.0)) throw std::invalid_argument("corrected_extension: eta must be > 0");
  if (!(eta < gap.h_min()))
    throw std::invalid_argument("corrected_extension: layer width eta must be smaller than min h");

  const MacGrid grid(nx, nz, 1.0, eta, /*periodic_x=*/true);
  MacField layer(grid);
  for (int j = 0; j < nz; ++j)
    for (int i = 0; i < nx; ++i) {
      const double x = double(i) * grid.hx();
      const double z = (double(j) + 0.5) * grid.hy();
      layer.bx[layer.bx_idx(i, j)] = g(x) * bump_psi(z / eta);
    }
  // by stays zero: the layer has no vertical component.

  std::vector<double> f(std::size_t(nx) * std::size_t(nz));
  for (int j = 0; j < nz; ++j)
    for (int i = 0; i < nx; ++i) f[grid.cell(i, j)] = layer.divergence(i, j);

  const BogovskiiResult bog = bogovskii_solve(grid, f);

  CorrectedExtension out{grid, MacField(grid), {}, eta, 0.0, 0.0};
  for (std::size_t k = 0; k < layer.bx.size(); ++k) out.u.bx[k] = layer.bx[k] - bog.B.bx[k];
  for (std::size_t k = 0; k < layer.by.size(); ++k) out.u.by[k] = layer.by[k] - bog.B.by[k];
  out.trace.resize(std::size_t(nx));
  for (int i = 0; i < nx; ++i) out.trace[std::size_t(i)] = g(double(i) * grid.hx()) * bump_psi(0.0);
  for (int j = 0; j < nz; ++j)
    for (int i = 0; i < nx; ++i)
      out.div_residual_max = std::max(out.div_residual_max, std::abs(out.u.divergence(i, j)));
  out.correction_l2 = bog.l2_norm;
  return out;
}

}  // namespace lubrix
