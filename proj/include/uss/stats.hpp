#pragma once

#include <cstdint>

namespace uss {

/// A Monte Carlo proportion with its Wilson 95% score interval.
struct Estimate {
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double rate = 0.0;
  double lower = 0.0;
  double upper = 0.0;

  /// Binomial standard error sqrt(p(1-p)/n) at the observed rate.
  double sigma() const;
};

Estimate make_estimate(std::uint64_t successes, std::uint64_t trials, double z = 1.959964);

}  // namespace uss
