#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "lubrix/gap.hpp"

namespace lubrix {

// Uniform periodic grid of n cells on [0, 1); data lives at cell centers.
struct Grid1D {
  int n = 0;

  explicit Grid1D(int n_) : n(n_) {
    if (n < 1) throw std::invalid_argument("Grid1D: n must be >= 1");
  }

  double dy() const { return 1.0 / double(n); }
  double y(int i) const { return (double(wrap(i)) + 0.5) * dy(); }
  // Face i+1/2 sits between cells i and i+1.
  double y_face(int i) const { return double(wrap(i) + 1) * dy(); }
  int wrap(int i) const {
    int r = i % n;
    return r < 0 ? r + n : r;
  }
};

// Boundary-fitted sigma grid for the film domain Q = {0 < Z < h(y)}: nodes at
// (y_i, zeta_j) with y_i = i/nx (periodic) and zeta_j = j/nz, zeta = Z/h(y).
// Chain rule on the mapping (y, zeta) -> (y, Z = zeta h(y)):
//   d/dy|_Z = d/dy|_zeta - (zeta h'/h) d/dzeta,   d/dZ = (1/h) d/dzeta,
// and the volume element is h dy dzeta.
struct GridQ {
  GapProfile gap;
  int nx = 0, nz = 0;
  double eps = 1.0;

  GridQ(GapProfile g, int nx_, int nz_, double eps_) : gap(std::move(g)), nx(nx_), nz(nz_), eps(eps_) {
    if (nx < 4 || nz < 4) throw std::invalid_argument("GridQ: need nx, nz >= 4");
    if (!(eps > 0)) throw std::invalid_argument("GridQ: eps must be > 0");
  }

  double dy() const { return 1.0 / double(nx); }
  double dzeta() const { return 1.0 / double(nz); }
  double y(int i) const { return double(wrap_x(i)) * dy(); }
  double zeta(int j) const { return double(j) * dzeta(); }
  double z(int i, int j) const { return zeta(j) * gap.h(y(i)); }

  // dzeta/dy at fixed Z (metric term of the sigma mapping).
  double dzeta_dy(double y_, double zeta_) const { return -zeta_ * gap.dh(y_) / gap.h(y_); }

  int wrap_x(int i) const {
    int r = i % nx;
    return r < 0 ? r + nx : r;
  }

  std::size_t n_nodes() const { return std::size_t(nx) * std::size_t(nz + 1); }
  std::size_t node(int i, int j) const { return std::size_t(j) * std::size_t(nx) + std::size_t(wrap_x(i)); }

  // Discrete |Q| consistent with the nodal dual-cell volumes (trapezoid in
  // zeta, midpoint in y): sum_i h(y_i) dy * 1.
  double volume() const {
    double v = 0.0;
    for (int i = 0; i < nx; ++i) v += gap.h(y(i));
    return v * dy();
  }

  // Dual-cell volume of node (i, j): half cells on the bottom/top rows.
  double node_volume(int i, int j) const {
    const double w = (j == 0 || j == nz) ? 0.5 * dzeta() : dzeta();
    return gap.h(y(i)) * dy() * w;
  }
};

}  // namespace lubrix
