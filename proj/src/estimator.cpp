#include "fatiguescope/estimator.hpp"

#include <cmath>

#include "fatiguescope/error.hpp"

namespace fatiguescope::model {

double CombinedEstimator::raw(const CueRatings& cues) const {
  if (cues.scale != CueScale::percent_0_100) {
    throw Error(ErrorCategory::validation, "combined estimator expects percent_0_100 cues");
  }
  if (auto bad = first_invalid_cue(cues, false)) {
    throw Error(ErrorCategory::validation,
                "cue " + std::string(to_string(*bad)) + " outside [0,100]");
  }
  double y = intercept;
  for (std::size_t i = 0; i < kCueCount; ++i) y += coefficients[i] * cues.values[i];
  return y;
}

FatigueRate CombinedEstimator::operator()(const CueRatings& cues) const {
  return FatigueRate::clamped(raw(cues));
}

double CombinedEstimator::min_output() const {
  double y = intercept;
  for (double c : coefficients) y += std::min(0.0, c) * 100.0;
  return y;
}

double CombinedEstimator::max_output() const {
  double y = intercept;
  for (double c : coefficients) y += std::max(0.0, c) * 100.0;
  return y;
}

CombinedEstimator combine_linear_estimators(const std::vector<LinearModel>& models) {
  if (models.size() != kCueCount) {
    throw Error(ErrorCategory::validation, "expected 8 linear estimators, got " +
                                               std::to_string(models.size()));
  }
  CombinedEstimator e;
  double intercepts = 0.0;
  for (std::size_t i = 0; i < kCueCount; ++i) {
    if (!std::isfinite(models[i].slope) || !std::isfinite(models[i].intercept)) {
      throw Error(ErrorCategory::validation, "non-finite linear estimator");
    }
    e.coefficients[i] = models[i].slope / static_cast<double>(kCueCount);
    intercepts += models[i].intercept;
  }
  e.intercept = intercepts / static_cast<double>(kCueCount);
  return e;
}

CueRatings rescale_to_percent(const CueRatings& rater_cues, double factor) {
  if (rater_cues.scale != CueScale::rater_0_4) {
    throw Error(ErrorCategory::validation, "rescale expects rater_0_4 cues");
  }
  CueRatings out;
  out.scale = CueScale::percent_0_100;
  for (std::size_t i = 0; i < kCueCount; ++i) out.values[i] = rater_cues.values[i] * factor;
  return out;
}

}  // namespace fatiguescope::model
