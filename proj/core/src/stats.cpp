#include "ghostmark/stats.hpp"

#include <cmath>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "ghostmark/error.hpp"

namespace ghostmark::stats {

Interval clopper_pearson(std::size_t successes, std::size_t trials, double confidence) {
  if (trials == 0) throw ValidationError("binomial interval needs at least one trial");
  if (successes > trials) throw ValidationError("more successes than trials");
  if (!(confidence > 0.0 && confidence < 1.0)) throw ValidationError("confidence must be in (0, 1)");
  const double alpha = 1.0 - confidence;
  const auto x = static_cast<double>(successes);
  const auto n = static_cast<double>(trials);
  Interval ci;
  ci.lower = successes == 0 ? 0.0 : boost::math::ibeta_inv(x, n - x + 1.0, alpha / 2.0);
  ci.upper = successes == trials ? 1.0 : boost::math::ibeta_inv(x + 1.0, n - x, 1.0 - alpha / 2.0);
  return ci;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

double chi_square_sf(double statistic, double degrees_of_freedom) {
  const boost::math::chi_squared dist(degrees_of_freedom);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

double binomial_sf(std::size_t k, std::size_t n, double p) {
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  const boost::math::binomial dist(static_cast<double>(n), p);
  return boost::math::cdf(boost::math::complement(dist, static_cast<double>(k - 1)));
}

}  // namespace ghostmark::stats
