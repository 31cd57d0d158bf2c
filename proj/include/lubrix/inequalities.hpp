#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "lubrix/gap.hpp"

namespace lubrix {

// Numerical checkers for the functional inequalities behind the film
// estimates: the Poincare bound with the film thickness as the constant, the
// Korn-type coercivity of the viscous stress, and the anisotropic
// interpolation bound for the fourth power. Fields are smooth trigonometric
// polynomials in y times wall-adapted polynomials in the scaled vertical
// coordinate, so every norm is evaluated with tensor Gauss quadrature and
// analytic derivatives; nothing is differenced.

struct HypothesisViolation : std::runtime_error {
  explicit HypothesisViolation(const std::string& what, double worst_trace)
      : std::runtime_error(what), worst(worst_trace) {}
  double worst;
};

// v(y, t) = sum_k amp_k * trig(2 pi freq_k y) * t^p_k (1 - t)^q_k on the
// reference square [0,1)^2; t is the wall coordinate mapped onto the film
// height by the checkers. q >= 1 makes the mode vanish at the top wall,
// p >= 1 at the bottom wall.
class SeparableField {
 public:
  struct Mode {
    double amp = 0.0;
    int freq = 0;
    bool use_sin = false;
    int p = 0, q = 0;
  };

  SeparableField() = default;
  explicit SeparableField(std::vector<Mode> modes) : modes_(std::move(modes)) {
    for (const auto& m : modes_)
      if (m.p < 0 || m.q < 0 || m.freq < 0)
        throw std::invalid_argument("SeparableField: negative exponent or frequency");
  }

  const std::vector<Mode>& modes() const { return modes_; }

  bool vanishes_at_top() const {
    for (const auto& m : modes_)
      if (m.q < 1) return false;
    return true;
  }
  bool vanishes_at_bottom() const {
    for (const auto& m : modes_)
      if (m.p < 1) return false;
    return true;
  }

  double value(double y, double t) const {
    double v = 0.0;
    for (const auto& m : modes_) v += m.amp * trig(m, y) * poly(m, t);
    return v;
  }
  // partial in y at fixed reference t
  double dy(double y, double t) const {
    double v = 0.0;
    for (const auto& m : modes_) v += m.amp * dtrig(m, y) * poly(m, t);
    return v;
  }
  // partial in the reference wall coordinate
  double dt(double y, double t) const {
    double v = 0.0;
    for (const auto& m : modes_) v += m.amp * trig(m, y) * dpoly(m, t);
    return v;
  }

  // a handful of random modes, every one vanishing at the top wall
  static SeparableField random_top_vanishing(std::uint64_t seed, int n_modes = 4) {
    return random_impl(seed, n_modes, /*force_bottom=*/false);
  }
  // both traces zero: admissible for the zero-boundary Korn bound
  static SeparableField random_wall_vanishing(std::uint64_t seed, int n_modes = 4) {
    return random_impl(seed, n_modes, /*force_bottom=*/true);
  }

 private:
  static double trig(const Mode& m, double y) {
    const double a = 2.0 * M_PI * m.freq * y;
    return m.use_sin ? std::sin(a) : std::cos(a);
  }
  static double dtrig(const Mode& m, double y) {
    const double c = 2.0 * M_PI * m.freq;
    const double a = c * y;
    return m.use_sin ? c * std::cos(a) : -c * std::sin(a);
  }
  static double poly(const Mode& m, double t) {
    return std::pow(t, m.p) * std::pow(1.0 - t, m.q);
  }
  static double dpoly(const Mode& m, double t) {
    double v = 0.0;
    if (m.p > 0) v += m.p * std::pow(t, m.p - 1) * std::pow(1.0 - t, m.q);
    if (m.q > 0) v -= m.q * std::pow(t, m.p) * std::pow(1.0 - t, m.q - 1);
    return v;
  }

  static SeparableField random_impl(std::uint64_t seed, int n_modes, bool force_bottom) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    std::uniform_int_distribution<int> freq(0, 4), pexp(force_bottom ? 1 : 0, 3), qexp(1, 3),
        coin(0, 1);
    std::vector<Mode> modes;
    modes.reserve(std::size_t(n_modes));
    for (int k = 0; k < n_modes; ++k) {
      Mode m;
      m.amp = amp(rng);
      m.freq = freq(rng);
      m.use_sin = m.freq > 0 && coin(rng) == 1;  // sin(0) would zero the mode
      m.p = pexp(rng);
      m.q = qexp(rng);
      modes.push_back(m);
    }
    return SeparableField(std::move(modes));
  }

  std::vector<Mode> modes_;
};

enum class InequalityKind { poincare, korn, anisotropic };

inline const char* to_string(InequalityKind k) {
  switch (k) {
    case InequalityKind::poincare: return "poincare";
    case InequalityKind::korn: return "korn";
    case InequalityKind::anisotropic: return "anisotropic";
  }
  return "?";
}

struct InequalityReport {
  InequalityKind kind = InequalityKind::poincare;
  double lhs = 0.0;
  double rhs = 0.0;    // already includes the constant below
  double ratio = 0.0;  // lhs / rhs, 0 when the field vanishes
  double constant = 0.0;
  double trace_violation = 0.0;  // worst boundary value seen by the hypothesis scan
};

namespace detail {

// tensor Gauss-Legendre rule mapped to [0, 1]
inline const std::vector<std::pair<double, double>>& gauss64_unit() {
  static const std::vector<std::pair<double, double>> rule = [] {
    using G = boost::math::quadrature::gauss<double, 64>;
    std::vector<std::pair<double, double>> r;
    for (std::size_t i = 0; i < G::abscissa().size(); ++i) {
      const double x = G::abscissa()[i], w = G::weights()[i];
      r.emplace_back(0.5 * (1.0 + x), 0.5 * w);
      if (x != 0.0) r.emplace_back(0.5 * (1.0 - x), 0.5 * w);
    }
    return r;
  }();
  return rule;
}

inline double scan_trace(const SeparableField& v, double t_wall) {
  double worst = 0.0;
  for (int i = 0; i <= 97; ++i)
    worst = std::max(worst, std::abs(v.value(double(i) / 97.0, t_wall)));
  return worst;
}

inline void require_trace(const SeparableField& v, double t_wall, const char* kind,
                          const char* wall) {
  const double worst = scan_trace(v, t_wall);
  if (worst > 1e-10)
    throw HypothesisViolation(std::string("inequality_check(") + kind + "): field trace at the " +
                                  wall + " wall is " + std::to_string(worst) +
                                  ", hypotheses need zero",
                              worst);
}

}  // namespace detail

// Film-thickness Poincare bound on the film domain {0 < z < eps h(y)} for
// fields vanishing at the top wall: compares ||v||_2 against eps ||grad v||_2.
// The sharp constant is 2 eps h_max / pi, so the ratio stays below 1 whenever
// h_max <= 1; for taller gaps the report is informational.
inline InequalityReport check_poincare(const SeparableField& v, const GapProfile& gap,
                                       double eps) {
  if (!(eps > 0)) throw std::invalid_argument("check_poincare: eps must be > 0");
  if (!v.vanishes_at_top()) detail::require_trace(v, 1.0, "poincare", "top");

  const auto& rule = detail::gauss64_unit();
  double l2 = 0.0, grad2 = 0.0;
  for (const auto& [y, wy] : rule) {
    const double h = gap.h(y), dh = gap.dh(y);
    for (const auto& [t, wt] : rule) {
      const double w = wy * wt * eps * h;  // dz dy = eps h dt dy
      const double val = v.value(y, t);
      const double vy = v.dy(y, t) - t * (dh / h) * v.dt(y, t);  // d/dy at fixed z
      const double vz = v.dt(y, t) / (eps * h);
      l2 += w * val * val;
      grad2 += w * (vy * vy + vz * vz);
    }
  }
  InequalityReport rep;
  rep.kind = InequalityKind::poincare;
  rep.constant = eps;
  rep.lhs = std::sqrt(l2);
  rep.rhs = eps * std::sqrt(grad2);
  rep.ratio = rep.rhs > 0 ? rep.lhs / rep.rhs : 0.0;
  rep.trace_violation = detail::scan_trace(v, 1.0);
  return rep;
}

// Coercivity of the viscous stress S(grad u) = 2 mu e(u) + lambda div u I over
// zero-trace fields on the film domain: ||grad u||_2^2 <= (1/mu) int S : grad u.
// Both components must vanish on both walls.
inline InequalityReport check_korn(const SeparableField& v1, const SeparableField& v2,
                                   const GapProfile& gap, double eps, double mu,
                                   double lambda_visc) {
  if (!(eps > 0) || !(mu > 0)) throw std::invalid_argument("check_korn: need eps > 0, mu > 0");
  for (const SeparableField* v : {&v1, &v2}) {
    if (!v->vanishes_at_top()) detail::require_trace(*v, 1.0, "korn", "top");
    if (!v->vanishes_at_bottom()) detail::require_trace(*v, 0.0, "korn", "bottom");
  }

  const auto& rule = detail::gauss64_unit();
  double grad2 = 0.0, stress = 0.0;
  for (const auto& [y, wy] : rule) {
    const double h = gap.h(y), dh = gap.dh(y);
    for (const auto& [t, wt] : rule) {
      const double w = wy * wt * eps * h;
      const double u1y = v1.dy(y, t) - t * (dh / h) * v1.dt(y, t);
      const double u1z = v1.dt(y, t) / (eps * h);
      const double u2y = v2.dy(y, t) - t * (dh / h) * v2.dt(y, t);
      const double u2z = v2.dt(y, t) / (eps * h);
      const double div = u1y + u2z;
      const double e12 = 0.5 * (u1z + u2y);
      grad2 += w * (u1y * u1y + u1z * u1z + u2y * u2y + u2z * u2z);
      stress += w * (2.0 * mu * (u1y * u1y + 2.0 * e12 * e12 + u2z * u2z) +
                     lambda_visc * div * div);
    }
  }
  InequalityReport rep;
  rep.kind = InequalityKind::korn;
  rep.constant = 1.0 / mu;
  rep.lhs = grad2;
  rep.rhs = stress / mu;
  rep.ratio = rep.rhs > 0 ? rep.lhs / rep.rhs : 0.0;
  rep.trace_violation = std::max(
      std::max(detail::scan_trace(v1, 0.0), detail::scan_trace(v1, 1.0)),
      std::max(detail::scan_trace(v2, 0.0), detail::scan_trace(v2, 1.0)));
  return rep;
}

// Anisotropic interpolation on the unit-aspect domain {0 < Z < h(y)} for
// fields vanishing at the top wall:
//   ||v||_4 <= (||d_y v||_2 + ||v||_2)^(1/2) (||d_Z v||_2 + ||v||_2)^(1/2).
inline InequalityReport check_anisotropic(const SeparableField& v, const GapProfile& gap) {
  if (!v.vanishes_at_top()) detail::require_trace(v, 1.0, "anisotropic", "top");

  const auto& rule = detail::gauss64_unit();
  double l2 = 0.0, l4 = 0.0, dy2 = 0.0, dz2 = 0.0;
  for (const auto& [y, wy] : rule) {
    const double h = gap.h(y), dh = gap.dh(y);
    for (const auto& [t, wt] : rule) {
      const double w = wy * wt * h;  // dZ dy = h dt dy
      const double val = v.value(y, t);
      const double vy = v.dy(y, t) - t * (dh / h) * v.dt(y, t);
      const double vz = v.dt(y, t) / h;
      l2 += w * val * val;
      l4 += w * val * val * val * val;
      dy2 += w * vy * vy;
      dz2 += w * vz * vz;
    }
  }
  const double n2 = std::sqrt(l2);
  InequalityReport rep;
  rep.kind = InequalityKind::anisotropic;
  rep.constant = 1.0;
  rep.lhs = std::pow(l4, 0.25);
  rep.rhs = std::sqrt((std::sqrt(dy2) + n2)) * std::sqrt((std::sqrt(dz2) + n2));
  rep.ratio = rep.rhs > 0 ? rep.lhs / rep.rhs : 0.0;
  rep.trace_violation = detail::scan_trace(v, 1.0);
  return rep;
}

// One entry point keyed by kind, matching the sampling driver and the CLI.
// korn draws its second component from seed + a fixed offset.
inline InequalityReport inequality_check(InequalityKind kind, std::uint64_t seed,
                                         const GapProfile& gap, double eps, double mu = 1.0,
                                         double lambda_visc = 1.0) {
  switch (kind) {
    case InequalityKind::poincare:
      return check_poincare(SeparableField::random_top_vanishing(seed), gap, eps);
    case InequalityKind::korn:
      return check_korn(SeparableField::random_wall_vanishing(seed),
                        SeparableField::random_wall_vanishing(seed ^ 0x9e3779b97f4a7c15ull), gap,
                        eps, mu, lambda_visc);
    case InequalityKind::anisotropic:
      return check_anisotropic(SeparableField::random_top_vanishing(seed), gap);
  }
  throw std::invalid_argument("inequality_check: unknown kind");
}

struct InequalitySampleStats {
  InequalityKind kind = InequalityKind::poincare;
  int samples = 0;
  double bound = 0.0;  // the ratio bound this kind is held against
  double worst_ratio = 0.0;
  double mean_ratio = 0.0;
  std::uint64_t worst_seed = 0;
  std::vector<std::uint64_t> exceedance_seeds;
};

// Draw n random admissible fields (seeds seed, seed+1, ...) and collect the
// ratio statistics; any ratio beyond the bound lands in exceedance_seeds so a
// failure can be replayed.
inline InequalitySampleStats sample_inequality(InequalityKind kind, const GapProfile& gap,
                                               double eps, int n_samples, std::uint64_t seed,
                                               double mu = 1.0, double lambda_visc = 1.0) {
  if (n_samples < 1) throw std::invalid_argument("sample_inequality: need n_samples >= 1");
  InequalitySampleStats stats;
  stats.kind = kind;
  stats.samples = n_samples;
  stats.bound = (kind == InequalityKind::poincare) ? 1.0 : 1.0 + 1e-8;
  double sum = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    const std::uint64_t s = seed + std::uint64_t(k);
    const InequalityReport rep = inequality_check(kind, s, gap, eps, mu, lambda_visc);
    sum += rep.ratio;
    if (rep.ratio > stats.worst_ratio) {
      stats.worst_ratio = rep.ratio;
      stats.worst_seed = s;
    }
    if (rep.ratio > stats.bound) stats.exceedance_seeds.push_back(s);
  }
  stats.mean_ratio = sum / n_samples;
  return stats;
}

}  // namespace lubrix
