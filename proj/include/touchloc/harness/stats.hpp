#pragma once

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <numeric>
#include <span>

namespace touchloc::harness {

struct Interval {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double half_width = 0.0;
};

/// Sample mean with a two-sided 95% Student-t interval. A single sample gives
/// a zero-width interval.
inline Interval mean_ci95(std::span<const double> x) {
  Interval r;
  if (x.empty()) {
    r.mean = r.lo = r.hi = r.half_width = std::nan("");
    return r;
  }
  const double n = static_cast<double>(x.size());
  r.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - r.mean) * (v - r.mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    const boost::math::students_t t(n - 1.0);
    r.half_width = boost::math::quantile(boost::math::complement(t, 0.025)) * sd / std::sqrt(n);
  }
  r.lo = r.mean - r.half_width;
  r.hi = r.mean + r.half_width;
  return r;
}

}  // namespace touchloc::harness
