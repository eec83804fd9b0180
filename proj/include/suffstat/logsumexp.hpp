#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace suffstat {

// log(sum_i exp(args[i])) with max-subtraction.
inline double log_sum_exp(std::span<const double> args) {
  if (args.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(args.begin(), args.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double a : args) s += std::exp(a - m);
  return m + std::log(s);
}

}  // namespace suffstat
