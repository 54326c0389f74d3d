#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fatiguescope/core.hpp"
#include "fatiguescope/error.hpp"
#include "fatiguescope/estimator.hpp"

namespace fatiguescope::rating {

inline constexpr std::size_t kMinReferenceImages = 4;

struct FaceEntry {
  std::string face_id;
  std::filesystem::path primary;
  std::vector<std::filesystem::path> references;
};

// Immutable set of training faces with their image files.
class FaceStore {
 public:
  FaceStore() = default;
  explicit FaceStore(std::vector<FaceEntry> faces);

  // {"faces": [{"face_id", "primary", "references": [...]}]}; relative paths
  // resolve against the manifest's directory.
  static FaceStore load(const std::filesystem::path& manifest);

  const FaceEntry* find(const std::string& face_id) const;
  std::vector<std::string> face_ids() const;  // sorted
  std::size_t size() const { return faces_.size(); }

 private:
  std::map<std::string, FaceEntry> faces_;
};

struct FaceBundle {
  std::string face_id;
  std::string primary_ref;               // /images/{face_id}/0
  std::vector<std::string> reference_refs;  // /images/{face_id}/1..
  bool insufficient_references = false;
  std::size_t cursor = 0;
  std::size_t total = 0;
};

// Failure of a rating call. `reason` is one of: duplicate_rater, empty_face_set,
// unknown_session, unknown_face, out_of_order, out_of_range, not_integer,
// missing_cue, conflict, complete, skip_disabled, bad_request.
class RatingError : public Error {
 public:
  RatingError(std::string reason, std::string message, std::optional<Cue> cue = std::nullopt)
      : Error(ErrorCategory::session, message), reason_(std::move(reason)), cue_(cue) {}
  const std::string& reason() const { return reason_; }
  const std::optional<Cue>& cue() const { return cue_; }

 private:
  std::string reason_;
  std::optional<Cue> cue_;
};

struct RatingSession {
  std::string session_id;
  std::string rater_id;
  std::uint64_t seed = 0;
  std::vector<std::string> order;
  std::size_t cursor = 0;
  std::map<std::string, CueRatings> submitted;
  std::set<std::string> skipped;

  bool complete() const { return cursor == order.size(); }
};

// Order is a Fisher-Yates shuffle of the sorted face set driven by
// std::mt19937_64 seeded with `seed`.
RatingSession open_session(const std::string& rater_id, const std::vector<std::string>& face_set,
                           std::uint64_t seed);

// Current face without advancing; nullopt once every face is rated.
std::optional<FaceBundle> next_face(const RatingSession& session, const FaceStore& store);

struct Ack {
  bool duplicate = false;  // identical re-submission of an already stored face
  std::size_t cursor = 0;
};

Ack submit_rating(RatingSession& session, const std::string& face_id, const CueRatings& ratings);
Ack skip_face(RatingSession& session, const std::string& face_id);

struct LabeledFace {
  std::string face_id;
  CueRatings mean_cues;  // rater_0_4, possibly fractional
  std::size_t rater_count = 0;
  FatigueRate fatigue_label{0.0};
};

struct LabelSet {
  std::vector<LabeledFace> faces;        // sorted by face_id
  std::array<double, 100> histogram{};   // normalized, bin width 1.0 on [0,100]
  std::vector<std::string> unrated;      // skipped by every rater

  std::string to_csv() const;
  std::string histogram_csv() const;
};

// Mean of each cue over the raters that rated the face, rescaled to percent
// by `scale_factor`, then passed through the combined estimator. Throws
// Error(no_complete_sessions) for an empty list, Error(session) for an
// incomplete session, Error(input_mismatch) when face sets differ.
LabelSet aggregate_labels(const std::vector<RatingSession>& sessions,
                          const model::CombinedEstimator& estimator = {}, double scale_factor = 25.0);

struct Progress {
  std::size_t cursor = 0;
  std::size_t total = 0;
};

// Concurrent multi-rater front end over the pure session functions, with an
// append-only JSONL journal replayed on construction.
class RatingService {
 public:
  RatingService(FaceStore store, std::optional<std::filesystem::path> journal, bool allow_skip = false);

  std::string open(const std::string& rater_id, std::uint64_t seed);
  std::optional<FaceBundle> next(const std::string& session_id) const;
  Ack submit(const std::string& session_id, const std::string& face_id, const CueRatings& ratings);
  Ack skip(const std::string& session_id, const std::string& face_id);
  Progress progress(const std::string& session_id) const;

  std::vector<RatingSession> sessions() const;
  std::vector<RatingSession> completed_sessions() const;
  const FaceStore& store() const { return store_; }
  bool allow_skip() const { return allow_skip_; }

 private:
  void apply(const nlohmann::json& event, bool replaying);
  void record(const nlohmann::json& event);
  RatingSession& session(const std::string& id);
  const RatingSession& session(const std::string& id) const;

  FaceStore store_;
  std::optional<std::filesystem::path> journal_path_;
  std::ofstream journal_;
  bool allow_skip_;
  mutable std::mutex mutex_;
  std::map<std::string, RatingSession> sessions_;
  std::size_t next_id_ = 1;
};

}  // namespace fatiguescope::rating
