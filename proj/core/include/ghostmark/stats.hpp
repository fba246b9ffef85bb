#pragma once

#include <cstddef>
#include <span>

namespace ghostmark::stats {

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
};

// Exact binomial interval; `confidence` is two-sided (0.95 -> 2.5% per tail).
Interval clopper_pearson(std::size_t successes, std::size_t trials, double confidence = 0.95);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
};

MeanStd mean_std(std::span<const double> values);

// Upper-tail probability of a chi-square statistic.
double chi_square_sf(double statistic, double degrees_of_freedom);

// P(X >= k) for X ~ Binomial(n, p).
double binomial_sf(std::size_t k, std::size_t n, double p);

}  // namespace ghostmark::stats
