#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "lubrix/bogovskii.hpp"
#include "lubrix/extension.hpp"
#include "lubrix/gap.hpp"
#include "lubrix/inequalities.hpp"
#include "lubrix/quadrature.hpp"

namespace {

double boundary_face_max(const lubrix::BogovskiiResult& res) {
  // recompute the boundary normal faces from scratch rather than trusting the
  // solver's own diagnostic
  const lubrix::MacGrid& g = res.B.grid;
  double worst = 0.0;
  if (!g.periodic_x)
    for (int j = 0; j < g.ny; ++j)
      worst = std::max({worst, std::abs(res.B.bx[res.B.bx_idx(0, j)]),
                        std::abs(res.B.bx[res.B.bx_idx(g.nx, j)])});
  for (int i = 0; i < g.nx; ++i)
    worst = std::max({worst, std::abs(res.B.by[res.B.by_idx(i, 0)]),
                      std::abs(res.B.by[res.B.by_idx(i, g.ny)])});
  return worst;
}

double divergence_defect(const lubrix::BogovskiiResult& res, const std::vector<double>& f) {
  const lubrix::MacGrid& g = res.B.grid;
  double mean = 0.0;
  for (double v : f) mean += v;
  mean /= double(f.size());
  double worst = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      worst = std::max(worst, std::abs(res.B.divergence(i, j) - (f[g.cell(i, j)] - mean)));
  return worst;
}

}  // namespace

TEST_CASE("bogovskii returns the zero field for constant right sides") {
  const lubrix::MacGrid grid(12, 10, 1.0, 0.8);
  const std::vector<double> f(std::size_t(grid.nx) * grid.ny, 3.7);

  const auto res = lubrix::bogovskii_solve(grid, f);

  // the discrete mean of a constant only cancels to roundoff
  CHECK(res.f_l2 < 1e-13);
  CHECK(res.l2_norm < 1e-12);
  CHECK(res.grad_seminorm < 1e-12);
  CHECK(res.div_residual_max < 1e-12);
  CHECK(boundary_face_max(res) == 0.0);
}

TEST_CASE("bogovskii inverts the divergence of a sine load with zero boundary") {
  const lubrix::MacGrid grid(24, 16, 1.0, 1.0);
  std::vector<double> f(std::size_t(grid.nx) * grid.ny);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      f[grid.cell(i, j)] = std::sin(2.0 * M_PI * (i + 0.5) * grid.hx());

  const auto res = lubrix::bogovskii_solve(grid, f);

  CHECK(divergence_defect(res, f) < 1e-8);
  CHECK(boundary_face_max(res) == 0.0);
  CHECK(res.boundary_max == 0.0);
  CHECK(res.grad_seminorm > 0.0);
  CHECK(res.stability_constant > 0.0);
}

TEST_CASE("bogovskii solves twenty random loads with bounded stability") {
  const lubrix::MacGrid grid(16, 12, 1.0, 1.0);
  std::mt19937_64 rng(20240817);
  std::uniform_real_distribution<double> amp(-2.0, 2.0);
  double worst_constant = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> f(std::size_t(grid.nx) * grid.ny);
    for (double& v : f) v = amp(rng);
    const auto res = lubrix::bogovskii_solve(grid, f);
    CHECK(divergence_defect(res, f) < 1e-8);
    CHECK(boundary_face_max(res) == 0.0);
    worst_constant = std::max(worst_constant, res.stability_constant);
  }
  // empirical operator bound: finite and tame on this family
  CHECK(worst_constant > 0.0);
  CHECK(worst_constant < 10.0);
}

TEST_CASE("bogovskii is linear in the right side") {
  const lubrix::MacGrid grid(14, 10, 1.0, 1.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::vector<double> f(std::size_t(grid.nx) * grid.ny), g(f.size()), combo(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    f[k] = amp(rng);
    g[k] = amp(rng);
    combo[k] = 1.75 * f[k] - 0.6 * g[k];
  }

  const auto rf = lubrix::bogovskii_solve(grid, f);
  const auto rg = lubrix::bogovskii_solve(grid, g);
  const auto rc = lubrix::bogovskii_solve(grid, combo);

  for (std::size_t k = 0; k < rc.B.bx.size(); ++k)
    CHECK(rc.B.bx[k] == Catch::Approx(1.75 * rf.B.bx[k] - 0.6 * rg.B.bx[k]).margin(1e-10));
  for (std::size_t k = 0; k < rc.B.by.size(); ++k)
    CHECK(rc.B.by[k] == Catch::Approx(1.75 * rf.B.by[k] - 0.6 * rg.B.by[k]).margin(1e-10));
}

TEST_CASE("bump profile integrals match their closed forms") {
  using lubrix::bump_psi;
  const double i2 = lubrix::integrate([](double t) { return std::pow(bump_psi(t), 2); }, 0, 1, 1e-14);
  const double i4 = lubrix::integrate([](double t) { return std::pow(bump_psi(t), 4); }, 0, 1, 1e-14);
  const double id2 =
      lubrix::integrate([](double t) { return std::pow(lubrix::bump_dpsi(t), 2); }, 0, 1, 1e-14);

  CHECK(i2 == Catch::Approx(lubrix::bump_psi_sq_integral()).epsilon(1e-13));
  CHECK(i4 == Catch::Approx(lubrix::bump_psi_pow4_integral()).epsilon(1e-13));
  CHECK(id2 == Catch::Approx(lubrix::bump_dpsi_sq_integral()).epsilon(1e-13));
  CHECK(bump_psi(0.0) == 1.0);
  CHECK(bump_psi(1.0) == 0.0);
  CHECK(bump_psi(1.5) == 0.0);
  CHECK(lubrix::bump_dpsi(0.0) == 0.0);
  // steepest descent of the bump sits at t = 1/3 with slope -16/9
  CHECK(lubrix::bump_dpsi(1.0 / 3.0) == Catch::Approx(-16.0 / 9.0));
}

TEST_CASE("simple extension matches the wall, vanishes above the layer, and scales") {
  const auto gap = lubrix::make_gap(1.0, {0.3});
  const auto ext = lubrix::simple_extension(2.0, 0.25, gap);

  CHECK(ext.uh(0.0) == 2.0);
  CHECK(ext.uh(0.25) == 0.0);
  CHECK(ext.uh(0.6) == 0.0);
  CHECK(ext.sup_norm() == 2.0);
  CHECK(ext.dZ_sup_norm() == Catch::Approx(2.0 / 0.25 * 16.0 / 9.0));

  // closed-form L^q norms against direct quadrature of the profile
  const double num2 = std::sqrt(
      lubrix::integrate([&](double Z) { return ext.uh(Z) * ext.uh(Z); }, 0.0, 0.25, 1e-14));
  const double num4 = std::pow(
      lubrix::integrate([&](double Z) { return std::pow(ext.uh(Z), 4); }, 0.0, 0.25, 1e-14),
      0.25);
  CHECK(ext.lq_norm(2) == Catch::Approx(num2).epsilon(1e-12));
  CHECK(ext.lq_norm(4) == Catch::Approx(num4).epsilon(1e-12));
  CHECK_THROWS_AS(ext.lq_norm(3), std::invalid_argument);

  // halving eta shrinks the L^q norm by exactly 2^{-1/q}
  const auto half = lubrix::simple_extension(2.0, 0.125, gap);
  CHECK(half.lq_norm(2) / ext.lq_norm(2) == Catch::Approx(std::pow(2.0, -0.5)).epsilon(1e-13));
  CHECK(half.lq_norm(4) / ext.lq_norm(4) == Catch::Approx(std::pow(2.0, -0.25)).epsilon(1e-13));

  // the layer must fit under the gap
  CHECK_THROWS_AS(lubrix::simple_extension(1.0, 0.7, gap), std::invalid_argument);
  CHECK_THROWS_AS(lubrix::simple_extension(1.0, -0.1, gap), std::invalid_argument);
}

TEST_CASE("corrected extension of constant data needs no correction") {
  const auto gap = lubrix::make_gap(1.0, {0.4});
  const auto ext = lubrix::corrected_extension([](double) { return 1.5; }, 0.2, gap, 32, 12);

  CHECK(ext.correction_l2 < 1e-12);
  CHECK(ext.div_residual_max < 1e-12);
  for (int j = 0; j < ext.grid.ny; ++j) {
    const double z = (j + 0.5) * ext.grid.hy();
    for (int i = 0; i < ext.grid.nx; ++i)
      CHECK(ext.u.bx[ext.u.bx_idx(i, j)] ==
            Catch::Approx(1.5 * lubrix::bump_psi(z / 0.2)).margin(1e-12));
  }
}

TEST_CASE("corrected extension of variable data is divergence free with the exact trace") {
  const auto gap = lubrix::make_gap(1.0, {0.4});
  auto g = [](double y) { return 1.0 + 0.3 * std::sin(2.0 * M_PI * y); };
  const auto ext = lubrix::corrected_extension(g, 0.1, gap);

  CHECK(ext.div_residual_max < 1e-8);
  CHECK(ext.correction_l2 > 0.0);
  for (int i = 0; i < ext.grid.nx; ++i)
    CHECK(ext.trace[std::size_t(i)] == Catch::Approx(g(i * ext.grid.hx())).margin(1e-10));
  // no flow through either wall of the strip
  for (int i = 0; i < ext.grid.nx; ++i) {
    CHECK(ext.u.by[ext.u.by_idx(i, 0)] == 0.0);
    CHECK(ext.u.by[ext.u.by_idx(i, ext.grid.ny)] == 0.0);
  }
}

TEST_CASE("corrected extension norms shrink with the layer width") {
  const auto gap = lubrix::make_gap(1.0, {0.4});
  auto g = [](double y) { return 1.0 + 0.3 * std::sin(2.0 * M_PI * y); };
  double prev = std::numeric_limits<double>::infinity();
  for (double eta : {0.2, 0.1, 0.05}) {
    const auto ext = lubrix::corrected_extension(g, eta, gap);
    const double l4 = ext.lq_norm(4);
    CHECK(l4 < prev);
    CHECK(ext.div_residual_max < 1e-8);
    prev = l4;
  }
}

TEST_CASE("inequality reports are zero for the zero field") {
  const auto gap = lubrix::make_gap(1.0, {});
  const lubrix::SeparableField zero;
  CHECK(lubrix::check_poincare(zero, gap, 0.2).ratio == 0.0);
  CHECK(lubrix::check_anisotropic(zero, gap).ratio == 0.0);
  CHECK(lubrix::check_korn(zero, zero, gap, 0.2, 1.0, 1.0).ratio == 0.0);
}

TEST_CASE("poincare check reproduces a hand-computed separable field") {
  // v = cos(2 pi y)(1 - t) on the flat film of height eps:
  //   ||v||_2^2 = eps/6,  ||grad v||_2^2 = eps (2 pi^2 / 3) + 1/(2 eps).
  const auto gap = lubrix::make_gap(1.0, {});
  const double eps = 0.2;
  const lubrix::SeparableField v({{1.0, 1, false, 0, 1}});

  const auto rep = lubrix::check_poincare(v, gap, eps);

  const double lhs = std::sqrt(eps / 6.0);
  const double rhs = eps * std::sqrt(eps * 2.0 * M_PI * M_PI / 3.0 + 0.5 / eps);
  CHECK(rep.lhs == Catch::Approx(lhs).epsilon(1e-12));
  CHECK(rep.rhs == Catch::Approx(rhs).epsilon(1e-12));
  CHECK(rep.ratio == Catch::Approx(lhs / rhs).epsilon(1e-12));
  CHECK(rep.constant == eps);
  CHECK(rep.trace_violation == 0.0);
}

TEST_CASE("poincare holds with margin on random fields when the gap stays below one") {
  // sharp constant is 2 h_max / pi, so ratios stay clear of 1 for h_max <= 1
  for (const auto& gap : {lubrix::make_gap(1.0, {}), lubrix::make_gap(0.8, {0.2})}) {
    const auto stats =
        lubrix::sample_inequality(lubrix::InequalityKind::poincare, gap, 0.15, 50, 424243);
    CHECK(stats.exceedance_seeds.empty());
    CHECK(stats.worst_ratio <= 2.0 / M_PI + 1e-6);
    CHECK(stats.worst_ratio > 0.0);
    CHECK(stats.mean_ratio > 0.0);
  }
}

TEST_CASE("korn coercivity of the viscous stress holds on random zero-trace fields") {
  const auto gap = lubrix::make_gap(1.0, {0.3});
  const auto stats = lubrix::sample_inequality(lubrix::InequalityKind::korn, gap, 0.3, 50,
                                               987654321, 1.3, 0.7);
  CHECK(stats.exceedance_seeds.empty());
  CHECK(stats.worst_ratio <= 1.0 + 1e-8);
  CHECK(stats.worst_ratio > 0.5);  // the bound is attainable up to the div term
}

TEST_CASE("anisotropic interpolation holds on random fields vanishing at the top") {
  for (const auto& gap : {lubrix::make_gap(1.0, {}), lubrix::make_gap(1.2, {0.3})}) {
    const auto stats =
        lubrix::sample_inequality(lubrix::InequalityKind::anisotropic, gap, 1.0, 50, 13371337);
    CHECK(stats.exceedance_seeds.empty());
    CHECK(stats.worst_ratio <= 1.0 + 1e-8);
    CHECK(stats.worst_ratio > 0.0);
  }
}

TEST_CASE("inequality checkers reject fields that break the trace hypotheses") {
  const auto gap = lubrix::make_gap(1.0, {});
  // nonzero at the top wall (q = 0)
  const lubrix::SeparableField bad_top({{1.0, 1, false, 1, 0}});
  CHECK_THROWS_AS(lubrix::check_poincare(bad_top, gap, 0.2), lubrix::HypothesisViolation);
  CHECK_THROWS_AS(lubrix::check_anisotropic(bad_top, gap), lubrix::HypothesisViolation);
  // vanishes at the top but not at the bottom: fine for poincare, not for korn
  const lubrix::SeparableField bad_bottom({{1.0, 2, true, 0, 2}});
  CHECK_NOTHROW(lubrix::check_poincare(bad_bottom, gap, 0.2));
  CHECK_THROWS_AS(lubrix::check_korn(bad_bottom, bad_bottom, gap, 0.2, 1.0, 1.0),
                  lubrix::HypothesisViolation);
}
