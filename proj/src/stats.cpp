#include "uss/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uss {

double Estimate::sigma() const {
  if (trials == 0) return 0.0;
  return std::sqrt(rate * (1.0 - rate) / static_cast<double>(trials));
}

Estimate make_estimate(std::uint64_t successes, std::uint64_t trials, double z) {
  if (successes > trials) throw std::invalid_argument("more successes than trials");
  Estimate e;
  e.trials = trials;
  e.successes = successes;
  if (trials == 0) {
    e.upper = 1.0;
    return e;
  }
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  e.rate = p;
  e.lower = std::max(0.0, center - half);
  e.upper = std::min(1.0, center + half);
  return e;
}

}  // namespace uss
