#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fatiguescope/matrix.hpp"

namespace fatiguescope::model {

// Trains on (x_train, y_train) and returns predictions for x_valid.
using FitPredict = std::function<std::vector<double>(
    const FeatureMatrix& x_train, std::span<const double> y_train, const FeatureMatrix& x_valid)>;
using Metric = std::function<double(std::span<const double> predicted, std::span<const double> actual)>;

struct CvResult {
  double mean = 0.0;
  std::vector<double> per_fold;
  std::vector<std::size_t> fold_of;       // fold index per sample
  std::vector<double> out_of_fold;        // validation prediction per sample
};

// Seeded shuffle, then fold j takes the next ceil or floor(n/k) samples with
// the larger folds first. Throws Error(invalid_config) for k < 2 or k > n.
std::vector<std::size_t> assign_folds(std::size_t n, std::size_t k, std::uint64_t seed);

CvResult kfold_cv(const FeatureMatrix& x, std::span<const double> y, std::size_t k,
                  const FitPredict& fit, const Metric& metric, std::uint64_t seed);

}  // namespace fatiguescope::model
