#include "fatiguescope/metrics.hpp"

#include <cmath>
#include <string>

#include "fatiguescope/error.hpp"

namespace fatiguescope::model {

namespace {

void check(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCategory::input_mismatch, "metric inputs differ in length (" +
                                                   std::to_string(a.size()) + " vs " +
                                                   std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw Error(ErrorCategory::input_mismatch, "metric of empty vectors");
}

}  // namespace

double rmse(std::span<const double> predicted, std::span<const double> actual) {
  check(predicted, actual);
  double ss = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double r = predicted[i] - actual[i];
    ss += r * r;
  }
  return std::sqrt(ss / static_cast<double>(predicted.size()));
}

double smape(std::span<const double> forecast, std::span<const double> actual) {
  check(forecast, actual);
  double sum = 0.0;
  for (std::size_t i = 0; i < forecast.size(); ++i) {
    const double denom = std::fabs(forecast[i]) + std::fabs(actual[i]);
    if (denom > 0.0) sum += std::fabs(forecast[i] - actual[i]) / denom;
  }
  return 100.0 * sum / static_cast<double>(forecast.size());
}

}  // namespace fatiguescope::model
