#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace lubrix {

// Smooth positive 1-periodic gap profile
//   h(y) = mean + sum_k amps[k-1] * cos(2 pi k y)
// with analytic first and second derivatives. The constant profile is the
// empty-amplitude case. Positivity is certified on a dense sample grid.
struct GapProfile {
  double mean = 1.0;
  std::vector<double> cos_amps;  // amplitude of cos(2 pi k y), k = 1, 2, ...

  double h(double y) const {
    double v = mean;
    for (std::size_t k = 0; k < cos_amps.size(); ++k)
      v += cos_amps[k] * std::cos(2.0 * std::numbers::pi * double(k + 1) * y);
    return v;
  }

  double dh(double y) const {
    double v = 0.0;
    for (std::size_t k = 0; k < cos_amps.size(); ++k) {
      const double w = 2.0 * std::numbers::pi * double(k + 1);
      v -= cos_amps[k] * w * std::sin(w * y);
    }
    return v;
  }

  double d2h(double y) const {
    double v = 0.0;
    for (std::size_t k = 0; k < cos_amps.size(); ++k) {
      const double w = 2.0 * std::numbers::pi * double(k + 1);
      v -= cos_amps[k] * w * w * std::cos(w * y);
    }
    return v;
  }

  // Minimum over a 10^4-point sample of one period.
  double h_min() const {
    double m = h(0.0);
    for (int i = 1; i < 10000; ++i) m = std::min(m, h(double(i) / 10000.0));
    return m;
  }

  double h_max() const {
    double m = h(0.0);
    for (int i = 1; i < 10000; ++i) m = std::max(m, h(double(i) / 10000.0));
    return m;
  }

  // Exact mean over the period: all cosine modes integrate to zero.
  double integral() const { return mean; }

  bool is_constant() const {
    for (double a : cos_amps)
      if (a != 0.0) return false;
    return true;
  }
};

inline GapProfile make_gap(double mean, std::vector<double> cos_amps = {}) {
  GapProfile g{mean, std::move(cos_amps)};
  if (!(g.h_min() > 0.0))
    throw std::invalid_argument("make_gap: profile is not strictly positive (h_min <= 0)");
  return g;
}

}  // namespace lubrix
