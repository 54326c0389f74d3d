#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fatiguescope/core.hpp"
#include "fatiguescope/matrix.hpp"
#include "fatiguescope/tree.hpp"

namespace fatiguescope::model {

enum class EnsembleMethod { lsboost, bag };
std::string_view to_string(EnsembleMethod m);
EnsembleMethod parse_method(std::string_view text);

struct BoostConfig {
  EnsembleMethod method = EnsembleMethod::lsboost;
  int cycles = 496;
  double learn_rate = 0.03;
  int min_leaf_size = 7;
  int max_depth = 5;  // 0 = unlimited
  std::uint64_t seed = 0;

  // Throws Error(invalid_config) when a field is out of range.
  void validate() const;
  bool operator==(const BoostConfig&) const = default;
};

void to_json(nlohmann::json& j, const BoostConfig& c);
void from_json(const nlohmann::json& j, BoostConfig& c);

// prediction = baseline + learn_rate * sum of tree outputs. Bagged models
// store trees fit to (y - baseline) with learn_rate = 1 / |trees|.
class EnsembleModel {
 public:
  EnsembleModel() = default;
  EnsembleModel(BoostConfig config, double baseline, double learn_rate, std::size_t feature_dimension,
                std::vector<RegressionTree> trees);

  double predict_raw(std::span<const double> x) const;
  FatigueRate predict(std::span<const double> x) const;  // clamped to [0,100]
  std::vector<double> predict_raw(const FeatureMatrix& x) const;

  const BoostConfig& config() const { return config_; }
  double baseline() const { return baseline_; }
  double learn_rate() const { return learn_rate_; }
  std::size_t feature_dimension() const { return feature_dimension_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }

  nlohmann::json to_json() const;
  static EnsembleModel from_json(const nlohmann::json& j);

 private:
  void check_dimension(std::size_t got) const;

  BoostConfig config_;
  double baseline_ = 0.0;
  double learn_rate_ = 1.0;
  std::size_t feature_dimension_ = 0;
  std::vector<RegressionTree> trees_;
};

inline constexpr std::string_view kModelSchema = "fatiguescope.ensemble/1";

// Least-squares boosting. When `training_rmse` is given it receives the
// training RMSE after the baseline and after every tree (cycles + 1 values).
EnsembleModel fit_lsboost(const FeatureMatrix& x, std::span<const double> y, const BoostConfig& config,
                          std::vector<double>* training_rmse = nullptr);

// Bootstrap aggregation of unlimited-depth trees, one seeded bootstrap
// sample per cycle.
EnsembleModel fit_bag(const FeatureMatrix& x, std::span<const double> y, const BoostConfig& config);

EnsembleModel fit_ensemble(const FeatureMatrix& x, std::span<const double> y, const BoostConfig& config);

}  // namespace fatiguescope::model
