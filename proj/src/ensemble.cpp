#include "fatiguescope/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fatiguescope/error.hpp"
#include "fatiguescope/metrics.hpp"
#include "fatiguescope/rng.hpp"

namespace fatiguescope::model {

using nlohmann::json;

std::string_view to_string(EnsembleMethod m) { return m == EnsembleMethod::lsboost ? "lsboost" : "bag"; }

EnsembleMethod parse_method(std::string_view text) {
  if (text == "lsboost" || text == "LSBoost") return EnsembleMethod::lsboost;
  if (text == "bag" || text == "Bag") return EnsembleMethod::bag;
  throw Error(ErrorCategory::invalid_config, "unknown ensemble method '" + std::string(text) + "'");
}

void BoostConfig::validate() const {
  if (cycles < 1) throw Error(ErrorCategory::invalid_config, "cycles must be >= 1");
  if (!(learn_rate > 0.0 && learn_rate <= 1.0)) {
    throw Error(ErrorCategory::invalid_config, "learn_rate must lie in (0,1]");
  }
  if (min_leaf_size < 1) throw Error(ErrorCategory::invalid_config, "min_leaf_size must be >= 1");
  if (max_depth < 0) throw Error(ErrorCategory::invalid_config, "max_depth must be >= 0");
}

void to_json(json& j, const BoostConfig& c) {
  j = json{{"method", to_string(c.method)}, {"cycles", c.cycles},       {"learn_rate", c.learn_rate},
           {"min_leaf_size", c.min_leaf_size}, {"max_depth", c.max_depth}, {"seed", c.seed}};
}

void from_json(const json& j, BoostConfig& c) {
  try {
    if (j.contains("method")) c.method = parse_method(j.at("method").get<std::string>());
    if (j.contains("cycles")) c.cycles = j.at("cycles").get<int>();
    if (j.contains("learn_rate")) c.learn_rate = j.at("learn_rate").get<double>();
    if (j.contains("min_leaf_size")) c.min_leaf_size = j.at("min_leaf_size").get<int>();
    if (j.contains("max_depth")) c.max_depth = j.at("max_depth").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCategory::invalid_config, std::string("boost config: ") + e.what());
  }
}

EnsembleModel::EnsembleModel(BoostConfig config, double baseline, double learn_rate,
                             std::size_t feature_dimension, std::vector<RegressionTree> trees)
    : config_(config),
      baseline_(baseline),
      learn_rate_(learn_rate),
      feature_dimension_(feature_dimension),
      trees_(std::move(trees)) {
  if (trees_.size() > static_cast<std::size_t>(std::max(0, config_.cycles))) {
    throw Error(ErrorCategory::validation, "ensemble holds more trees than cycles");
  }
  for (const auto& t : trees_) {
    if (t.feature_dimension() != feature_dimension_) {
      throw Error(ErrorCategory::validation, "tree feature dimension differs from the ensemble");
    }
  }
}

void EnsembleModel::check_dimension(std::size_t got) const {
  if (got != feature_dimension_) {
    throw Error(ErrorCategory::input_mismatch, "feature dimension " + std::to_string(got) +
                                                   " but model expects " +
                                                   std::to_string(feature_dimension_));
  }
}

double EnsembleModel::predict_raw(std::span<const double> x) const {
  check_dimension(x.size());
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(x);
  return baseline_ + learn_rate_ * sum;
}

FatigueRate EnsembleModel::predict(std::span<const double> x) const {
  return FatigueRate::clamped(predict_raw(x));
}

std::vector<double> EnsembleModel::predict_raw(const FeatureMatrix& x) const {
  check_dimension(x.cols());
  std::vector<double> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict_raw(x.row(r));
  return out;
}

namespace {

json node_to_json(const RegressionTree& t, int i) {
  const auto& n = t.nodes()[static_cast<std::size_t>(i)];
  if (n.is_leaf()) return json{{"value", n.value}, {"samples", n.samples}};
  return json{{"feature", n.feature},
              {"threshold", n.threshold},
              {"value", n.value},
              {"samples", n.samples},
              {"left", node_to_json(t, n.left)},
              {"right", node_to_json(t, n.right)}};
}

int node_from_json(const json& j, std::vector<TreeNode>& nodes) {
  const int self = static_cast<int>(nodes.size());
  nodes.emplace_back();
  TreeNode n;
  n.value = j.at("value").get<double>();
  n.samples = j.at("samples").get<std::size_t>();
  if (j.contains("feature")) {
    n.feature = j.at("feature").get<int>();
    if (n.feature < 0) throw Error(ErrorCategory::parse, "negative split feature");
    n.threshold = j.at("threshold").get<double>();
    n.left = node_from_json(j.at("left"), nodes);
    n.right = node_from_json(j.at("right"), nodes);
  }
  nodes[static_cast<std::size_t>(self)] = n;
  return self;
}

// Sum in ascending order so the value does not depend on row order.
double canonical_mean(std::span<const double> y) {
  std::vector<double> s(y.begin(), y.end());
  std::sort(s.begin(), s.end());
  double sum = 0.0;
  for (double v : s) sum += v;
  return sum / static_cast<double>(s.size());
}

void check_training_input(const FeatureMatrix& x, std::span<const double> y) {
  if (y.empty() || x.rows() == 0) throw Error(ErrorCategory::input_mismatch, "no training samples");
  if (x.rows() != y.size()) {
    throw Error(ErrorCategory::input_mismatch, std::to_string(x.rows()) + " feature rows but " +
                                                   std::to_string(y.size()) + " targets");
  }
}

}  // namespace

json EnsembleModel::to_json() const {
  json trees = json::array();
  for (const auto& t : trees_) trees.push_back(node_to_json(t, 0));
  return json{{"schema", kModelSchema},
              {"config", config_},
              {"baseline", baseline_},
              {"learn_rate", learn_rate_},
              {"feature_dimension", feature_dimension_},
              {"trees", trees}};
}

EnsembleModel EnsembleModel::from_json(const json& j) {
  try {
    if (j.at("schema").get<std::string>() != kModelSchema) {
      throw Error(ErrorCategory::parse, "unsupported model schema " + j.at("schema").dump());
    }
    const auto dim = j.at("feature_dimension").get<std::size_t>();
    std::vector<RegressionTree> trees;
    for (const auto& tj : j.at("trees")) {
      std::vector<TreeNode> nodes;
      node_from_json(tj, nodes);
      trees.emplace_back(std::move(nodes), dim);
    }
    return EnsembleModel(j.at("config").get<BoostConfig>(), j.at("baseline").get<double>(),
                         j.at("learn_rate").get<double>(), dim, std::move(trees));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCategory::parse, std::string("model file: ") + e.what());
  }
}

EnsembleModel fit_lsboost(const FeatureMatrix& x, std::span<const double> y, const BoostConfig& config,
                          std::vector<double>* training_rmse) {
  config.validate();
  check_training_input(x, y);
  const std::size_t n = y.size();
  const double baseline = canonical_mean(y);
  const TreeParams params{static_cast<std::size_t>(config.min_leaf_size), config.max_depth};

  std::vector<double> fitted(n, baseline);
  std::vector<double> residual(n);
  for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - fitted[i];
  if (training_rmse) {
    training_rmse->clear();
    training_rmse->push_back(rmse(fitted, y));
  }

  std::vector<RegressionTree> trees;
  trees.reserve(static_cast<std::size_t>(config.cycles));
  for (int m = 0; m < config.cycles; ++m) {
    auto tree = fit_tree(x, residual, params);
    for (std::size_t i = 0; i < n; ++i) {
      fitted[i] += config.learn_rate * tree.predict(x.row(i));
      residual[i] = y[i] - fitted[i];
    }
    trees.push_back(std::move(tree));
    if (training_rmse) training_rmse->push_back(rmse(fitted, y));
  }
  return EnsembleModel(config, baseline, config.learn_rate, x.cols(), std::move(trees));
}

EnsembleModel fit_bag(const FeatureMatrix& x, std::span<const double> y, const BoostConfig& config) {
  config.validate();
  check_training_input(x, y);
  const std::size_t n = y.size();
  const double baseline = canonical_mean(y);
  const TreeParams params{static_cast<std::size_t>(config.min_leaf_size), 0};

  Rng rng(config.seed);
  std::vector<std::size_t> sample(n);
  std::vector<double> target(n);
  std::vector<RegressionTree> trees;
  trees.reserve(static_cast<std::size_t>(config.cycles));
  for (int m = 0; m < config.cycles; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      sample[i] = static_cast<std::size_t>(rng.below(n));
      target[i] = y[sample[i]] - baseline;
    }
    trees.push_back(fit_tree(x.select_rows(sample), target, params));
  }
  return EnsembleModel(config, baseline, 1.0 / static_cast<double>(config.cycles), x.cols(),
                       std::move(trees));
}

EnsembleModel fit_ensemble(const FeatureMatrix& x, std::span<const double> y, const BoostConfig& config) {
  return config.method == EnsembleMethod::lsboost ? fit_lsboost(x, y, config) : fit_bag(x, y, config);
}

}  // namespace fatiguescope::model
