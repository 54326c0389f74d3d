#pragma once

#include <span>

namespace fatiguescope::model {

// Both throw Error(input_mismatch) on length mismatch or empty input.
double rmse(std::span<const double> predicted, std::span<const double> actual);

// Symmetric MAPE in percent: (100/n) * sum |F-A| / (|F|+|A|). A term with
// F = A = 0 contributes 0.
double smape(std::span<const double> forecast, std::span<const double> actual);

}  // namespace fatiguescope::model
