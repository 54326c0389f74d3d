#include "fatiguescope/cross_validation.hpp"

#include <numeric>
#include <string>

#include "fatiguescope/error.hpp"
#include "fatiguescope/rng.hpp"

namespace fatiguescope::model {

std::vector<std::size_t> assign_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCategory::invalid_config, "k-fold needs k >= 2");
  if (k > n) {
    throw Error(ErrorCategory::invalid_config,
                "k = " + std::to_string(k) + " exceeds sample count " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  fisher_yates_shuffle(std::span<std::size_t>(order), rng);

  std::vector<std::size_t> fold_of(n);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    for (std::size_t s = 0; s < size; ++s) fold_of[order[pos++]] = f;
  }
  return fold_of;
}

CvResult kfold_cv(const FeatureMatrix& x, std::span<const double> y, std::size_t k,
                  const FitPredict& fit, const Metric& metric, std::uint64_t seed) {
  if (x.rows() != y.size()) {
    throw Error(ErrorCategory::input_mismatch, "cross-validation: feature rows and targets differ");
  }
  CvResult out;
  out.fold_of = assign_folds(y.size(), k, seed);
  out.out_of_fold.assign(y.size(), 0.0);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train;
    std::vector<std::size_t> valid;
    for (std::size_t i = 0; i < y.size(); ++i) (out.fold_of[i] == f ? valid : train).push_back(i);
    std::vector<double> y_train;
    std::vector<double> y_valid;
    for (auto i : train) y_train.push_back(y[i]);
    for (auto i : valid) y_valid.push_back(y[i]);

    const auto pred = fit(x.select_rows(train), y_train, x.select_rows(valid));
    if (pred.size() != valid.size()) {
      throw Error(ErrorCategory::internal, "fit procedure returned the wrong number of predictions");
    }
    for (std::size_t v = 0; v < valid.size(); ++v) out.out_of_fold[valid[v]] = pred[v];
    out.per_fold.push_back(metric(pred, y_valid));
  }
  double sum = 0.0;
  for (double m : out.per_fold) sum += m;
  out.mean = sum / static_cast<double>(k);
  return out;
}

}  // namespace fatiguescope::model
