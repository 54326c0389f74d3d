#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace fatiguescope::stats {

double mean(std::span<const double> values);
// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_sd(std::span<const double> values);

struct ComparisonResult {
  std::string label_a;
  std::string label_b;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double difference = 0.0;  // mean_a - mean_b
  double ci_low = 0.0;
  double ci_high = 0.0;
  double confidence = 0.95;
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  std::string test_kind = "welch";
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

// Welch unequal-variance two-sample t-test with Welch-Satterthwaite degrees of
// freedom, a two-sided p-value and a (1 - alpha) confidence interval for
// mean(a) - mean(b). Throws Error(degenerate) when either sample has fewer
// than two values or both have zero variance.
ComparisonResult welch_ttest(std::span<const double> a, std::span<const double> b,
                             double alpha = 0.05);

}  // namespace fatiguescope::stats
