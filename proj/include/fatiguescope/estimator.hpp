#pragma once

#include <array>
#include <utility>
#include <vector>

#include "fatiguescope/core.hpp"

namespace fatiguescope::model {

// Linear map from the eight cue rates (0-100) to the overall fatigue rate,
// obtained by averaging eight single-cue linear regressions.
struct CombinedEstimator {
  std::array<double, kCueCount> coefficients = {0.037, 0.030, 0.041, 0.014,
                                                0.022, 0.033, 0.027, 0.024};
  double intercept = 44.41;

  // Throws Error(validation) unless cues are on the percent scale and in range.
  FatigueRate operator()(const CueRatings& cues) const;
  double raw(const CueRatings& cues) const;

  double min_output() const;  // over cue rates in [0,100]
  double max_output() const;
};

struct LinearModel {
  double slope = 0.0;
  double intercept = 0.0;
};

// coefficient_i = slope_i / 8, intercept = mean intercept. Throws
// Error(validation) unless exactly eight models are given (x1..x8 order).
CombinedEstimator combine_linear_estimators(const std::vector<LinearModel>& models);

// Maps rater-scale cues onto the percent axes by a constant factor (25 turns
// 0-4 into 0-100).
CueRatings rescale_to_percent(const CueRatings& rater_cues, double factor = 25.0);

}  // namespace fatiguescope::model
