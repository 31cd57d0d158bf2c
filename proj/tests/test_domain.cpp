#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "lubrix/grid.hpp"

using namespace lubrix;

TEST_CASE("gap construction: constant, cosine, and degenerate profiles") {
  auto flat = make_gap(1.0);
  CHECK(flat.h(0.3) == 1.0);
  CHECK(flat.dh(0.3) == 0.0);

  auto cosg = make_gap(1.0, {0.5});
  CHECK(cosg.h(0.0) == Catch::Approx(1.5).epsilon(1e-15));
  CHECK(cosg.h(0.5) == Catch::Approx(0.5).epsilon(1e-12));

  // amplitude equal to the mean touches zero: rejected
  CHECK_THROWS_AS(make_gap(1.0, {1.0}), std::invalid_argument);
}

TEST_CASE("gap derivatives agree with finite differences; periodicity is exact") {
  auto g = make_gap(1.0, {0.5, -0.2});
  for (double y : {0.13, 0.4, 0.77}) {
    const double e = 1e-6;
    CHECK(g.dh(y) == Catch::Approx((g.h(y + e) - g.h(y - e)) / (2 * e)).margin(1e-7));
    CHECK(g.d2h(y) == Catch::Approx((g.h(y + e) - 2 * g.h(y) + g.h(y - e)) / (e * e)).margin(1e-3));
  }
  CHECK(g.h(0.0) == Catch::Approx(g.h(1.0)).margin(1e-14));
  CHECK(g.h_min() > 0.0);
  CHECK(g.h_min() <= g.h_max());
}

TEST_CASE("periodic index wrap is an involution under shifts") {
  Grid1D grid(16);
  std::vector<int> data(16);
  std::iota(data.begin(), data.end(), 0);
  const int k = 5;
  std::vector<int> shifted(16), back(16);
  for (int i = 0; i < 16; ++i) shifted[grid.wrap(i + k)] = data[i];
  for (int i = 0; i < 16; ++i) back[grid.wrap(i - k)] = shifted[i];
  CHECK(back == data);
}

TEST_CASE("midpoint quadrature on the periodic grid converges at order >= 2") {
  // Use a profile plus a non-harmonic smooth perturbation so the midpoint rule
  // is not spectrally exact, then Richardson the error.
  auto f = [](double y) { return 1.0 + 0.5 * std::cos(2 * std::numbers::pi * y) + 0.3 * std::exp(std::sin(2 * std::numbers::pi * y)); };
  auto quad = [&](int n) {
    Grid1D g(n);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += f(g.y(i));
    return s * g.dy();
  };
  // periodic midpoint converges faster than any fixed order on analytic
  // integrands; check it is at least second order on coarse grids
  const double ref = quad(4096);
  const double e1 = std::abs(quad(8) - ref);
  const double e2 = std::abs(quad(16) - ref);
  CHECK(e1 / e2 > std::pow(2.0, 2.0));
}

TEST_CASE("sigma grid: boundary fit, metric consistency, node bookkeeping") {
  auto g = make_gap(1.0, {0.5});
  GridQ grid(g, 16, 64, 0.1);

  // top row sits exactly on Z = h(y)
  for (int i = 0; i < grid.nx; ++i)
    CHECK(grid.z(i, grid.nz) == Catch::Approx(g.h(grid.y(i))).epsilon(1e-15));
  // bottom row at Z = 0
  for (int i = 0; i < grid.nx; ++i) CHECK(grid.z(i, 0) == 0.0);

  // metric term dzeta/dy against a finite-difference oracle at fixed Z
  double worst = 0.0;
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 1; j < grid.nz; ++j) {
      const double y = grid.y(i), zeta = grid.zeta(j);
      const double Z = zeta * g.h(y);
      const double e = 1e-6;
      const double fd = (Z / g.h(y + e) - Z / g.h(y - e)) / (2 * e);
      worst = std::max(worst, std::abs(grid.dzeta_dy(y, zeta) - fd));
    }
  }
  CHECK(worst < 1e-8);

  // x-index wrap and node addressing stay within bounds
  CHECK(grid.node(grid.nx, 0) == grid.node(0, 0));
  CHECK(grid.node(-1, 0) == grid.node(grid.nx - 1, 0));
  CHECK(grid.n_nodes() == std::size_t(16) * 65);

  // dual-cell volumes tile the discrete volume
  double v = 0.0;
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j <= grid.nz; ++j) v += grid.node_volume(i, j);
  CHECK(v == Catch::Approx(grid.volume()).epsilon(1e-13));
}
