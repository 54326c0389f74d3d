#include "fatiguescope/tuner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "fatiguescope/cross_validation.hpp"
#include "fatiguescope/error.hpp"
#include "fatiguescope/gp.hpp"
#include "fatiguescope/metrics.hpp"
#include "fatiguescope/rng.hpp"

namespace fatiguescope::tuner {

using model::BoostConfig;
using nlohmann::json;

namespace {

constexpr std::size_t kUnitDims = 4;
constexpr std::array<int, kUnitDims> kHaltonBases = {2, 3, 5, 7};

double radical_inverse(std::uint64_t index, int base) {
  double inv = 1.0 / base;
  double f = inv;
  double out = 0.0;
  while (index > 0) {
    out += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
    index /= static_cast<std::uint64_t>(base);
    f *= inv;
  }
  return out;
}

// Halton point `index` under a Cranley-Patterson rotation by `shift`.
std::array<double, kUnitDims> halton(std::uint64_t index, const std::array<double, kUnitDims>& shift) {
  std::array<double, kUnitDims> u{};
  for (std::size_t d = 0; d < kUnitDims; ++d) {
    const double v = radical_inverse(index, kHaltonBases[d]) + shift[d];
    u[d] = v - std::floor(v);
  }
  return u;
}

std::array<double, kUnitDims> draw_shift(Rng& rng) {
  std::array<double, kUnitDims> s{};
  for (auto& v : s) v = rng.uniform();
  return s;
}

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

int decode_int(const IntRange& r, double u) {
  return std::clamp(round_half_up(r.lo + u * (r.hi - r.lo)), r.lo, r.hi);
}

double normalize(double v, double lo, double hi) { return hi > lo ? (v - lo) / (hi - lo) : 0.0; }

std::int64_t unix_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

Trial run_trial(const Objective& objective, const BoostConfig& config) {
  Trial t;
  t.config = config;
  const auto start = std::chrono::steady_clock::now();
  try {
    t.objective = objective(config);
    if (std::isnan(t.objective)) throw Error(ErrorCategory::internal, "objective returned NaN");
  } catch (const std::exception& e) {
    t.failed = true;
    t.failure = e.what();
    t.objective = std::numeric_limits<double>::infinity();
  }
  t.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  t.timestamp = unix_now();
  return t;
}

void check_budget(const SearchSpace& space, std::size_t budget) {
  space.validate();
  if (budget == 0) throw Error(ErrorCategory::invalid_config, "tuning budget must be >= 1");
}

}  // namespace

void SearchSpace::validate() const {
  if (methods.empty()) throw Error(ErrorCategory::invalid_config, "search space has no methods");
  if (cycles.lo > cycles.hi || cycles.lo < 1) {
    throw Error(ErrorCategory::invalid_config, "cycles range must be non-empty and >= 1");
  }
  if (min_leaf_size.lo > min_leaf_size.hi || min_leaf_size.lo < 1) {
    throw Error(ErrorCategory::invalid_config, "min_leaf_size range must be non-empty and >= 1");
  }
  if (!(learn_rate.lo <= learn_rate.hi) || !(learn_rate.lo > 0.0) || learn_rate.hi > 1.0) {
    throw Error(ErrorCategory::invalid_config, "learn_rate range must be non-empty within (0,1]");
  }
}

bool SearchSpace::contains(const BoostConfig& c) const {
  return std::find(methods.begin(), methods.end(), c.method) != methods.end() &&
         c.cycles >= cycles.lo && c.cycles <= cycles.hi && c.learn_rate >= learn_rate.lo &&
         c.learn_rate <= learn_rate.hi && c.min_leaf_size >= min_leaf_size.lo &&
         c.min_leaf_size <= min_leaf_size.hi;
}

BoostConfig SearchSpace::decode(std::span<const double> unit, const BoostConfig& base) const {
  if (unit.size() != kUnitDims) throw Error(ErrorCategory::internal, "decode expects 4 coordinates");
  BoostConfig c = base;
  const auto m = methods.size();
  c.method = methods[std::min(m - 1, static_cast<std::size_t>(unit[0] * static_cast<double>(m)))];
  c.cycles = decode_int(cycles, unit[1]);
  if (learn_rate.log_scale) {
    const double lo = std::log(learn_rate.lo);
    const double hi = std::log(learn_rate.hi);
    c.learn_rate = std::exp(lo + unit[2] * (hi - lo));
  } else {
    c.learn_rate = learn_rate.lo + unit[2] * (learn_rate.hi - learn_rate.lo);
  }
  c.learn_rate = std::clamp(c.learn_rate, learn_rate.lo, learn_rate.hi);
  c.min_leaf_size = decode_int(min_leaf_size, unit[3]);
  return c;
}

std::vector<double> SearchSpace::embed(const BoostConfig& c) const {
  std::vector<double> e(methods.size(), 0.0);
  for (std::size_t i = 0; i < methods.size(); ++i) e[i] = methods[i] == c.method ? 1.0 : 0.0;
  e.push_back(normalize(c.cycles, cycles.lo, cycles.hi));
  if (learn_rate.log_scale) {
    e.push_back(normalize(std::log(c.learn_rate), std::log(learn_rate.lo), std::log(learn_rate.hi)));
  } else {
    e.push_back(normalize(c.learn_rate, learn_rate.lo, learn_rate.hi));
  }
  e.push_back(normalize(c.min_leaf_size, min_leaf_size.lo, min_leaf_size.hi));
  return e;
}

void to_json(json& j, const SearchSpace& s) {
  json methods = json::array();
  for (auto m : s.methods) methods.push_back(model::to_string(m));
  j = json{{"methods", methods},
           {"cycles", {s.cycles.lo, s.cycles.hi}},
           {"learn_rate", {{"lo", s.learn_rate.lo}, {"hi", s.learn_rate.hi}, {"log", s.learn_rate.log_scale}}},
           {"min_leaf_size", {s.min_leaf_size.lo, s.min_leaf_size.hi}}};
}

void from_json(const json& j, SearchSpace& s) {
  try {
    if (j.contains("methods")) {
      s.methods.clear();
      for (const auto& m : j.at("methods")) s.methods.push_back(model::parse_method(m.get<std::string>()));
    }
    if (j.contains("cycles")) s.cycles = {j["cycles"].at(0).get<int>(), j["cycles"].at(1).get<int>()};
    if (j.contains("learn_rate")) {
      const auto& lr = j.at("learn_rate");
      s.learn_rate = {lr.at("lo").get<double>(), lr.at("hi").get<double>(), lr.value("log", true)};
    }
    if (j.contains("min_leaf_size")) {
      s.min_leaf_size = {j["min_leaf_size"].at(0).get<int>(), j["min_leaf_size"].at(1).get<int>()};
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCategory::invalid_config, std::string("search space: ") + e.what());
  }
}

void TrialLog::append(Trial t) {
  trials.push_back(std::move(t));
  if (trials.size() == 1 || trials.back().objective < trials[incumbent].objective) {
    incumbent = trials.size() - 1;
  }
}

std::vector<double> TrialLog::incumbent_curve() const {
  std::vector<double> out;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : trials) {
    best = std::min(best, t.objective);
    out.push_back(best);
  }
  return out;
}

std::string TrialLog::to_csv() const {
  std::ostringstream os;
  os << "trial,method,cycles,learn_rate,min_leaf_size,max_depth,objective,failed,wall_seconds,timestamp\n";
  char buf[64];
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto& t = trials[i];
    os << i << ',' << model::to_string(t.config.method) << ',' << t.config.cycles << ',';
    std::snprintf(buf, sizeof buf, "%.17g", t.config.learn_rate);
    os << buf << ',' << t.config.min_leaf_size << ',' << t.config.max_depth << ',';
    std::snprintf(buf, sizeof buf, "%.17g", t.objective);
    os << buf << ',' << (t.failed ? 1 : 0) << ',';
    std::snprintf(buf, sizeof buf, "%.6f", t.wall_seconds);
    os << buf << ',' << t.timestamp << '\n';
  }
  return os.str();
}

std::size_t default_initial_design(std::size_t budget) {
  return std::min(budget, std::max<std::size_t>(5, budget / 10));
}

TrialLog optimize(const Objective& objective, const SearchSpace& space, std::size_t budget,
                  std::uint64_t seed, const OptimizerOptions& options) {
  check_budget(space, budget);
  const std::size_t n_init = options.n_init ? std::min(options.n_init, budget) : default_initial_design(budget);

  Rng rng(seed);
  TrialLog log;
  std::vector<std::vector<double>> inputs;
  std::set<std::vector<double>> seen;

  const auto design_shift = draw_shift(rng);
  for (std::size_t t = 0; t < n_init; ++t) {
    const auto u = halton(t + 1, design_shift);
    const auto config = space.decode(u, options.base);
    inputs.push_back(space.embed(config));
    seen.insert(inputs.back());
    log.append(run_trial(objective, config));
  }

  for (std::size_t t = n_init; t < budget; ++t) {
    const auto shift = draw_shift(rng);
    const std::uint64_t gp_seed = rng.next_u64();

    double worst = -std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& tr : log.trials) {
      if (tr.failed) continue;
      worst = std::max(worst, tr.objective);
      best = std::min(best, tr.objective);
    }

    std::optional<BoostConfig> pick;
    if (std::isfinite(best)) {
      std::vector<double> targets;
      for (const auto& tr : log.trials) targets.push_back(tr.failed ? worst : tr.objective);
      const auto gp = GaussianProcess::fit(inputs, targets, options.noise_variance, gp_seed);

      double best_ei = 0.0;
      double best_sd = -1.0;
      std::optional<BoostConfig> by_ei;
      std::optional<BoostConfig> by_sd;
      for (std::size_t c = 0; c < options.pool_size; ++c) {
        const auto config = space.decode(halton(c + 1, shift), options.base);
        const auto e = space.embed(config);
        if (seen.count(e)) continue;
        const auto post = gp.predict(e);
        const double ei = expected_improvement(post.mean, post.sd, best);
        if (ei > best_ei) {
          best_ei = ei;
          by_ei = config;
        }
        if (post.sd > best_sd) {
          best_sd = post.sd;
          by_sd = config;
        }
      }
      pick = by_ei ? by_ei : by_sd;
    }
    if (!pick) {
      // Every trial failed so far, or the pool holds nothing new.
      std::array<double, kUnitDims> u{};
      for (auto& v : u) v = rng.uniform();
      pick = space.decode(u, options.base);
    }
    inputs.push_back(space.embed(*pick));
    seen.insert(inputs.back());
    log.append(run_trial(objective, *pick));
  }
  return log;
}

TrialLog random_search(const Objective& objective, const SearchSpace& space, std::size_t budget,
                       std::uint64_t seed, const OptimizerOptions& options) {
  check_budget(space, budget);
  Rng rng(seed);
  TrialLog log;
  for (std::size_t t = 0; t < budget; ++t) {
    std::array<double, kUnitDims> u{};
    for (auto& v : u) v = rng.uniform();
    log.append(run_trial(objective, space.decode(u, options.base)));
  }
  return log;
}

TuneResult tune_ensemble(const FeatureMatrix& x, std::span<const double> y, const SearchSpace& space,
                         std::size_t budget, std::size_t k, std::uint64_t seed,
                         const OptimizerOptions& options) {
  if (x.rows() != y.size()) {
    throw Error(ErrorCategory::input_mismatch, "tune: feature rows and targets differ");
  }
  model::assign_folds(y.size(), k, seed);  // validates k before any trial runs
  OptimizerOptions opts = options;
  opts.base.seed = seed;
  const std::vector<double> targets(y.begin(), y.end());
  const Objective objective = [&](const BoostConfig& config) {
    const model::FitPredict fit = [&config](const FeatureMatrix& xt, std::span<const double> yt,
                                            const FeatureMatrix& xv) {
      return model::fit_ensemble(xt, yt, config).predict_raw(xv);
    };
    const model::Metric metric = [](std::span<const double> p, std::span<const double> a) {
      return model::rmse(p, a);
    };
    return model::kfold_cv(x, targets, k, fit, metric, seed).mean;
  };
  TuneResult out;
  out.log = optimize(objective, space, budget, seed, opts);
  out.best = out.log.best().config;
  return out;
}

}  // namespace fatiguescope::tuner
