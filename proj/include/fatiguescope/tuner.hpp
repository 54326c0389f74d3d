#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fatiguescope/ensemble.hpp"
#include "fatiguescope/matrix.hpp"

namespace fatiguescope::tuner {

struct IntRange {
  int lo = 0;
  int hi = 0;
};

struct RealRange {
  double lo = 0.0;
  double hi = 0.0;
  bool log_scale = false;
};

struct SearchSpace {
  std::vector<model::EnsembleMethod> methods = {model::EnsembleMethod::lsboost,
                                                model::EnsembleMethod::bag};
  IntRange cycles{10, 600};
  RealRange learn_rate{1e-3, 0.3, true};
  IntRange min_leaf_size{1, 50};

  // Throws Error(invalid_config) for empty ranges or non-positive log bounds.
  void validate() const;
  bool contains(const model::BoostConfig& c) const;

  // Unit-cube coordinates (method, cycles, learn_rate, min_leaf_size) to a
  // config: integers rounded half-up, log dimensions exponentiated. Fields
  // outside the space (max_depth, seed) come from `base`.
  model::BoostConfig decode(std::span<const double> unit, const model::BoostConfig& base) const;
  // Surrogate inputs: one-hot method followed by the three numeric
  // dimensions normalized to [0,1].
  std::vector<double> embed(const model::BoostConfig& c) const;
};

void to_json(nlohmann::json& j, const SearchSpace& s);
void from_json(const nlohmann::json& j, SearchSpace& s);

struct Trial {
  model::BoostConfig config;
  double objective = 0.0;  // +inf for a failed trial
  bool failed = false;
  std::string failure;
  double wall_seconds = 0.0;
  std::int64_t timestamp = 0;  // unix seconds at completion
};

struct TrialLog {
  std::vector<Trial> trials;
  std::size_t incumbent = 0;

  void append(Trial t);
  const Trial& best() const { return trials.at(incumbent); }
  std::vector<double> incumbent_curve() const;
  std::string to_csv() const;
};

using Objective = std::function<double(const model::BoostConfig&)>;

struct OptimizerOptions {
  model::BoostConfig base;    // max_depth and seed for proposed configs
  std::size_t n_init = 0;     // 0 = max(5, budget / 10)
  std::size_t pool_size = 1024;
  double noise_variance = 1e-8;
};

std::size_t default_initial_design(std::size_t budget);

// Bayesian optimization: a seeded scrambled-Halton initial design, then one
// GP-EI proposal per trial drawn from a fresh seeded candidate pool. Objective
// exceptions are logged as failed trials with +inf objective.
TrialLog optimize(const Objective& objective, const SearchSpace& space, std::size_t budget,
                  std::uint64_t seed, const OptimizerOptions& options = {});

// Uniform random configs from the space; the comparison baseline.
TrialLog random_search(const Objective& objective, const SearchSpace& space, std::size_t budget,
                       std::uint64_t seed, const OptimizerOptions& options = {});

struct TuneResult {
  model::BoostConfig best;
  TrialLog log;
};

// Minimizes k-fold cross-validated RMSE of the ensemble over the space.
TuneResult tune_ensemble(const FeatureMatrix& x, std::span<const double> y, const SearchSpace& space,
                         std::size_t budget, std::size_t k, std::uint64_t seed,
                         const OptimizerOptions& options = {});

}  // namespace fatiguescope::tuner
