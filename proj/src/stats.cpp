#include "fatiguescope/stats.hpp"

#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "fatiguescope/error.hpp"

namespace fatiguescope::stats {

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

ComparisonResult welch_ttest(std::span<const double> a, std::span<const double> b, double alpha) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCategory::degenerate, "t-test needs at least two values per sample");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCategory::invalid_config, "alpha must lie in (0,1)");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = std::pow(sample_sd(a), 2) / na;  // squared standard errors
  const double vb = std::pow(sample_sd(b), 2) / nb;
  const double se2 = va + vb;
  if (!(se2 > 0.0)) {
    throw Error(ErrorCategory::degenerate, "t-test with zero variance in both samples");
  }

  ComparisonResult r;
  r.n_a = a.size();
  r.n_b = b.size();
  r.mean_a = mean(a);
  r.mean_b = mean(b);
  r.difference = r.mean_a - r.mean_b;
  r.confidence = 1.0 - alpha;
  const double se = std::sqrt(se2);
  r.t = r.difference / se;
  r.df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));

  const boost::math::students_t dist(r.df);
  r.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t))));
  const double q = boost::math::quantile(boost::math::complement(dist, alpha / 2.0));
  r.ci_low = r.difference - q * se;
  r.ci_high = r.difference + q * se;
  return r;
}

}  // namespace fatiguescope::stats
