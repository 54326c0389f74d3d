#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fatiguescope::tuner {

// Matern 5/2 kernel with one lengthscale per input dimension.
struct MaternParams {
  double signal_variance = 1.0;
  std::vector<double> lengthscales;
};

double matern52(std::span<const double> a, std::span<const double> b, const MaternParams& p);

struct Posterior {
  double mean = 0.0;
  double sd = 0.0;
};

// Zero-mean GP on standardized targets with a fixed noise variance.
class GaussianProcess {
 public:
  // Throws Error(degenerate) when the kernel matrix cannot be factored.
  GaussianProcess(std::vector<std::vector<double>> inputs, std::vector<double> targets,
                  MaternParams params, double noise_variance = 1e-8);

  // Posterior in the original target units.
  Posterior predict(std::span<const double> x) const;

  // Log marginal likelihood of the standardized targets.
  double log_marginal_likelihood() const { return log_likelihood_; }
  const MaternParams& params() const { return params_; }

  // Fits lengthscales and signal variance by maximizing the marginal
  // likelihood with multi-start Nelder-Mead over log-parameters.
  static GaussianProcess fit(std::vector<std::vector<double>> inputs, std::vector<double> targets,
                             double noise_variance, std::uint64_t seed, int restarts = 4);

 private:
  std::vector<std::vector<double>> inputs_;
  MaternParams params_;
  double noise_variance_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double log_likelihood_ = 0.0;
};

double normal_pdf(double z);
double normal_cdf(double z);

// Expected improvement for minimization: (best - mean) Phi(z) + sd phi(z)
// with z = (best - mean) / sd, and max(best - mean, 0) when sd == 0.
double expected_improvement(double mean, double sd, double best);

}  // namespace fatiguescope::tuner
