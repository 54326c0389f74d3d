#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fatiguescope/core.hpp"
#include "fatiguescope/stats.hpp"

namespace fatiguescope::ingestion {
struct TimelineCorpus;
}

namespace fatiguescope::cohort {

struct UserProfile {
  std::string user_id;
  Gender modal_gender = Gender::male;
  std::string modal_race_label;     // raw label the timeline agreed on
  std::optional<Race> modal_race;   // empty for labels outside the analyzed classes
  int modal_age_bucket = 0;         // decade index
  std::vector<std::string> face_ids;  // accepted user faces, timeline order
};

struct UserIdentification {
  std::optional<UserProfile> profile;
  std::string ambiguous_dimension;  // "gender" or "race" when profile is empty
  std::size_t posts = 0;
  std::size_t candidates_rejected = 0;
};

// Picks the largest-bbox face per post (ties: wider box, then record order),
// takes the modal gender and race over those candidates, and accepts the
// candidates matching both. A tied modal vote leaves the user unidentified.
UserIdentification identify_user_faces(const std::vector<DetectionRecord>& timeline);

struct WeekdayFatigue {
  std::string user_id;
  std::array<std::optional<double>, 7> mean{};  // Sun..Sat
  std::array<std::size_t, 7> count{};
};

WeekdayFatigue weekday_aggregate(const UserProfile& profile,
                                 const std::map<std::string, double>& rates,
                                 const std::map<std::string, std::int64_t>& timestamps);

struct LabeledSample {
  std::string label;
  std::vector<double> values;
};

struct PairwiseComparison {
  stats::ComparisonResult result;
  double bonferroni_alpha = 0.05;
  bool significant_raw = false;
  bool significant_adjusted = false;
};

struct PairwiseResult {
  std::vector<PairwiseComparison> comparisons;
  std::vector<std::string> skipped;  // "label: reason"
};

// All unordered pairs in input order (i < j). Groups with fewer than two
// samples are skipped; pairs whose Welch test is degenerate are skipped too.
PairwiseResult pairwise_group_comparison(const std::vector<LabeledSample>& groups,
                                         double alpha = 0.05);

struct GroupingSpec {
  bool by_age = true;
  bool by_gender = false;
  bool by_race = false;
  bool by_weekday = false;
  std::size_t min_group_size = 20;
  double alpha = 0.05;
};

// Row key for report tables; ordering is age ascending, male before female,
// race alphabetical, weekday Sun..Sat. Unused dimensions are nullopt.
struct GroupKey {
  std::optional<int> age_bucket;
  std::optional<Gender> gender;
  std::optional<Race> race;
  std::optional<int> weekday;

  auto operator<=>(const GroupKey&) const = default;
  std::string label() const;
  // The same key without the weekday; comparisons are made within a weekday.
  GroupKey demographic() const;
};

struct GroupSummary {
  GroupKey key;
  std::size_t users = 0;
  double mean = 0.0;
  double sd = 0.0;
  std::vector<double> values;  // one value per user
};

struct CohortReport {
  GroupingSpec spec;
  std::vector<GroupSummary> groups;     // included, key order
  std::vector<GroupSummary> excluded;   // under min_group_size, key order
  // Pairwise tests between included groups that share a weekday (or all
  // groups when the weekday is not a dimension); Bonferroni is per weekday.
  PairwiseResult comparisons;
  std::vector<std::string> comparison_slices;  // weekday label per comparison
  std::array<double, 100> histogram{};  // normalized, bin width 1.0 on [0,100]
  std::size_t histogram_total = 0;
  std::size_t users_total = 0;
  std::size_t users_ambiguous = 0;
  std::size_t users_unknown_race = 0;

  std::string means_csv() const;
  std::string comparisons_csv() const;
  std::string histogram_csv() const;
  std::string excluded_csv() const;
};

// Throws Error(degenerate) when the corpus has no users and
// Error(input_mismatch) when an accepted user face has no rate.
CohortReport cohort_report(const ingestion::TimelineCorpus& corpus,
                           const std::map<std::string, double>& rates, const GroupingSpec& spec);

}  // namespace fatiguescope::cohort
