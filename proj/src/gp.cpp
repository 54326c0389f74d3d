#include "fatiguescope/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fatiguescope/error.hpp"
#include "fatiguescope/rng.hpp"

namespace fatiguescope::tuner {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double expected_improvement(double mean, double sd, double best) {
  const double gap = best - mean;
  if (!(sd > 0.0)) return std::max(gap, 0.0);
  const double z = gap / sd;
  return std::max(0.0, gap * normal_cdf(z) + sd * normal_pdf(z));
}

double matern52(std::span<const double> a, std::span<const double> b, const MaternParams& p) {
  double r2 = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double u = (a[d] - b[d]) / p.lengthscales[d];
    r2 += u * u;
  }
  const double r = std::sqrt(5.0 * r2);
  return p.signal_variance * (1.0 + r + r * r / 3.0) * std::exp(-r);
}

GaussianProcess::GaussianProcess(std::vector<std::vector<double>> inputs, std::vector<double> targets,
                                 MaternParams params, double noise_variance)
    : inputs_(std::move(inputs)), params_(std::move(params)), noise_variance_(noise_variance) {
  const std::size_t n = inputs_.size();
  if (n == 0 || n != targets.size()) {
    throw Error(ErrorCategory::degenerate, "GP needs matching, non-empty inputs and targets");
  }
  const std::size_t dim = inputs_.front().size();
  if (params_.lengthscales.size() != dim) {
    throw Error(ErrorCategory::invalid_config, "GP lengthscale count differs from input dimension");
  }

  double sum = 0.0;
  for (double t : targets) sum += t;
  y_mean_ = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double t : targets) ss += (t - y_mean_) * (t - y_mean_);
  const double sd = std::sqrt(ss / static_cast<double>(n));
  y_scale_ = sd > 1e-12 * std::max(1.0, std::fabs(y_mean_)) ? sd : 1.0;

  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) y[static_cast<Eigen::Index>(i)] = (targets[i] - y_mean_) / y_scale_;

  Eigen::MatrixXd k(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = matern52(inputs_[i], inputs_[j], params_);
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      k(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  double jitter = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::MatrixXd kn = k;
    kn.diagonal().array() += noise_variance_ + jitter;
    llt_.compute(kn);
    if (llt_.info() == Eigen::Success) break;
    jitter = jitter == 0.0 ? 1e-10 * params_.signal_variance : jitter * 10.0;
  }
  if (llt_.info() != Eigen::Success) {
    throw Error(ErrorCategory::degenerate, "GP kernel matrix is not positive definite");
  }
  alpha_ = llt_.solve(y);
  const Eigen::MatrixXd l = llt_.matrixL();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) log_det += std::log(l(i, i));
  log_likelihood_ = -0.5 * y.dot(alpha_) - log_det -
                    0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

Posterior GaussianProcess::predict(std::span<const double> x) const {
  const auto n = static_cast<Eigen::Index>(inputs_.size());
  Eigen::VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) ks[i] = matern52(x, inputs_[static_cast<std::size_t>(i)], params_);
  const double mean = ks.dot(alpha_);
  const Eigen::VectorXd v = llt_.matrixL().solve(ks);
  const double var = std::max(0.0, params_.signal_variance - v.squaredNorm());
  return {y_mean_ + y_scale_ * mean, y_scale_ * std::sqrt(var)};
}

namespace {

constexpr double kMinLogLength = -4.605170185988091;  // log 0.01
constexpr double kMaxLogLength = 2.302585092994046;   // log 10
constexpr double kMinLogSignal = -4.605170185988091;
constexpr double kMaxLogSignal = 4.605170185988091;

std::vector<double> project(std::vector<double> theta) {
  theta[0] = std::clamp(theta[0], kMinLogSignal, kMaxLogSignal);
  for (std::size_t i = 1; i < theta.size(); ++i) theta[i] = std::clamp(theta[i], kMinLogLength, kMaxLogLength);
  return theta;
}

MaternParams to_params(const std::vector<double>& theta) {
  MaternParams p;
  p.signal_variance = std::exp(theta[0]);
  for (std::size_t i = 1; i < theta.size(); ++i) p.lengthscales.push_back(std::exp(theta[i]));
  return p;
}

template <typename F>
std::vector<double> nelder_mead(const F& f, std::vector<double> start, double step, int iterations) {
  const std::size_t d = start.size();
  std::vector<std::vector<double>> simplex{start};
  for (std::size_t i = 0; i < d; ++i) {
    auto p = start;
    p[i] += step;
    simplex.push_back(p);
  }
  std::vector<double> values;
  for (const auto& p : simplex) values.push_back(f(p));

  std::vector<std::size_t> order(d + 1);
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i <= d; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[d - 1];
    if (std::fabs(values[worst] - values[best]) < 1e-10) break;

    std::vector<double> centroid(d, 0.0);
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == worst) continue;
      for (std::size_t c = 0; c < d; ++c) centroid[c] += simplex[i][c] / static_cast<double>(d);
    }
    auto along = [&](double t) {
      std::vector<double> p(d);
      for (std::size_t c = 0; c < d; ++c) p[c] = centroid[c] + t * (simplex[worst][c] - centroid[c]);
      return p;
    };
    auto reflected = along(-1.0);
    const double fr = f(reflected);
    if (fr < values[best]) {
      auto expanded = along(-2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
    } else if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
    } else {
      auto contracted = fr < values[worst] ? along(-0.5) : along(0.5);
      const double fc = f(contracted);
      if (fc < std::min(fr, values[worst])) {
        simplex[worst] = contracted;
        values[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= d; ++i) {
          if (i == best) continue;
          for (std::size_t c = 0; c < d; ++c) {
            simplex[i][c] = simplex[best][c] + 0.5 * (simplex[i][c] - simplex[best][c]);
          }
          values[i] = f(simplex[i]);
        }
      }
    }
  }
  const auto it = std::min_element(values.begin(), values.end());
  return simplex[static_cast<std::size_t>(it - values.begin())];
}

}  // namespace

GaussianProcess GaussianProcess::fit(std::vector<std::vector<double>> inputs, std::vector<double> targets,
                                     double noise_variance, std::uint64_t seed, int restarts) {
  if (inputs.empty()) throw Error(ErrorCategory::degenerate, "GP fit without observations");
  const std::size_t dim = inputs.front().size();

  auto nll = [&](const std::vector<double>& raw) {
    const auto theta = project(raw);
    try {
      return -GaussianProcess(inputs, targets, to_params(theta), noise_variance).log_marginal_likelihood();
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  Rng rng(seed);
  std::vector<double> best_theta;
  double best_value = std::numeric_limits<double>::infinity();
  for (int s = 0; s < std::max(1, restarts); ++s) {
    std::vector<double> start(dim + 1);
    if (s == 0) {
      start[0] = 0.0;
      for (std::size_t i = 1; i <= dim; ++i) start[i] = std::log(0.3);
    } else {
      start[0] = kMinLogSignal + rng.uniform() * (kMaxLogSignal - kMinLogSignal);
      for (std::size_t i = 1; i <= dim; ++i) {
        start[i] = kMinLogLength + rng.uniform() * (kMaxLogLength - kMinLogLength);
      }
    }
    const auto theta = project(nelder_mead(nll, start, 0.7, 150));
    const double v = nll(theta);
    if (v < best_value || best_theta.empty()) {
      best_value = v;
      best_theta = theta;
    }
  }
  return GaussianProcess(std::move(inputs), std::move(targets), to_params(best_theta), noise_variance);
}

}  // namespace fatiguescope::tuner
