#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fatiguescope/core.hpp"

namespace fatiguescope::ingestion {

// Hashtags the selfie collection searched on; corpus metadata only.
inline const std::vector<std::string> kCollectionTags = {
    "#selfie", "#me",     "#happy",  "#fun",     "#smile",
    "#nomakeup", "#friend", "#family", "#fashion", "#summer"};

struct FilterPolicy {
  int min_posts = 20;
  EyeStatusKind require_eye_status = EyeStatusKind::no_glasses_eye_open;
  bool enforce_blur = true;
  bool enforce_face_quality = true;

  void validate() const;
};

enum class RejectReason { eye_status, blur, face_quality, invalid, malformed, min_posts };
inline constexpr std::array<RejectReason, 6> kRejectReasons = {
    RejectReason::eye_status, RejectReason::blur,      RejectReason::face_quality,
    RejectReason::invalid,    RejectReason::malformed, RejectReason::min_posts};
std::string_view to_string(RejectReason reason);

struct FilterDecision {
  bool keep = true;
  RejectReason reason = RejectReason::eye_status;  // meaningful only when !keep

  static FilterDecision kept() { return {}; }
  static FilterDecision rejected(RejectReason r) { return {false, r}; }
  bool operator==(const FilterDecision&) const = default;
};

// First failing criterion in the order eye status, blur, face quality.
// Blur must be strictly below its threshold and face quality strictly above.
FilterDecision quality_filter(const DetectionRecord& record, const FilterPolicy& policy);

struct TimelineCorpus {
  std::map<std::string, std::vector<DetectionRecord>> users;  // ordered by user_id
  std::string provenance;
  std::vector<std::string> collected_tags = kCollectionTags;

  std::size_t record_count() const;
  std::vector<DetectionRecord> records() const;  // user order, then timeline order
};

struct MalformedLine {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct IngestStats {
  std::size_t records_read = 0;
  std::size_t kept = 0;
  std::map<RejectReason, std::size_t> rejected;
  std::size_t users_seen = 0;
  std::size_t users_kept = 0;
  std::vector<MalformedLine> malformed;

  std::size_t rejected_total() const;
  nlohmann::json to_json() const;
};

struct IngestResult {
  TimelineCorpus corpus;
  IngestStats stats;
};

// Streams DetectionRecord JSONL. Malformed or invalid lines are counted and
// skipped; users with fewer than policy.min_posts distinct kept posts are
// dropped. Throws Error(io) when the file cannot be read.
IngestResult ingest(const std::filesystem::path& path, const FilterPolicy& policy);
IngestResult ingest_stream(std::istream& in, const FilterPolicy& policy,
                           std::string provenance = "stream");

void write_corpus(std::ostream& out, const TimelineCorpus& corpus);
// Reads a corpus written by write_corpus without filtering. Throws
// Error(parse) naming the line of the first bad record.
TimelineCorpus read_corpus(const std::filesystem::path& path);

struct CountWithConfidence {
  std::size_t count = 0;
  double mean_confidence = 0.0;
};

struct DemographicHistogram {
  int bucket_width = 10;
  std::map<int, std::size_t> age_buckets;                // bucket index -> users
  std::map<Gender, CountWithConfidence> gender;
  std::map<std::string, CountWithConfidence> race;       // raw label, alphabetical
  std::size_t users = 0;
  std::size_t ambiguous_users = 0;                       // modal vote tied
  double mean_gender_confidence = 0.0;
  double mean_race_confidence = 0.0;

  nlohmann::json to_json() const;
};

// One count per user using the user's modal demographics over the identified
// user faces. bucket_width 10 gives decades, 20 the training-set view.
// Throws Error(degenerate) for a corpus with no users.
DemographicHistogram demographic_histogram(const TimelineCorpus& corpus, int bucket_width = 10);

}  // namespace fatiguescope::ingestion
