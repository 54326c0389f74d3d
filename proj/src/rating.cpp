#include "fatiguescope/rating.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fatiguescope/format.hpp"
#include "fatiguescope/json_io.hpp"
#include "fatiguescope/rng.hpp"

namespace fatiguescope::rating {

using nlohmann::json;

FaceStore::FaceStore(std::vector<FaceEntry> faces) {
  for (auto& f : faces) {
    if (f.face_id.empty()) throw Error(ErrorCategory::validation, "face store entry without face_id");
    const auto id = f.face_id;
    if (!faces_.emplace(id, std::move(f)).second) {
      throw Error(ErrorCategory::validation, "duplicate face_id " + id + " in face store");
    }
  }
}

FaceStore FaceStore::load(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw Error(ErrorCategory::io, "cannot open face manifest " + manifest.string());
  const auto base = manifest.parent_path();
  auto resolve = [&base](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
  };
  std::vector<FaceEntry> faces;
  try {
    const auto doc = json::parse(in);
    for (const auto& f : doc.at("faces")) {
      FaceEntry e;
      e.face_id = f.at("face_id").get<std::string>();
      e.primary = resolve(f.at("primary").get<std::string>());
      for (const auto& r : f.value("references", json::array())) e.references.push_back(resolve(r.get<std::string>()));
      faces.push_back(std::move(e));
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCategory::parse, "face manifest " + manifest.string() + ": " + e.what());
  }
  return FaceStore(std::move(faces));
}

const FaceEntry* FaceStore::find(const std::string& face_id) const {
  const auto it = faces_.find(face_id);
  return it == faces_.end() ? nullptr : &it->second;
}

std::vector<std::string> FaceStore::face_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, _] : faces_) ids.push_back(id);
  return ids;
}

RatingSession open_session(const std::string& rater_id, const std::vector<std::string>& face_set,
                           std::uint64_t seed) {
  if (face_set.empty()) throw RatingError("empty_face_set", "cannot open a session over no faces");
  RatingSession s;
  s.rater_id = rater_id;
  s.seed = seed;
  s.order = face_set;
  std::sort(s.order.begin(), s.order.end());
  s.order.erase(std::unique(s.order.begin(), s.order.end()), s.order.end());
  Rng rng(seed);
  fisher_yates_shuffle(std::span<std::string>(s.order), rng);
  return s;
}

std::optional<FaceBundle> next_face(const RatingSession& session, const FaceStore& store) {
  if (session.complete()) return std::nullopt;
  FaceBundle b;
  b.face_id = session.order[session.cursor];
  b.cursor = session.cursor;
  b.total = session.order.size();
  b.primary_ref = "/images/" + b.face_id + "/0";
  const auto* entry = store.find(b.face_id);
  const std::size_t refs = entry ? entry->references.size() : 0;
  for (std::size_t i = 0; i < refs; ++i) b.reference_refs.push_back("/images/" + b.face_id + "/" + std::to_string(i + 1));
  b.insufficient_references = refs < kMinReferenceImages;
  return b;
}

namespace {

void check_rating_values(const CueRatings& ratings) {
  if (ratings.scale != CueScale::rater_0_4) {
    throw RatingError("bad_request", "ratings must use the rater_0_4 scale");
  }
  for (auto cue : kCues) {
    const double v = ratings[cue];
    if (!std::isfinite(v) || v < 0.0 || v > 4.0) {
      throw RatingError("out_of_range", std::string(to_string(cue)) + " must be an integer from 0 to 4", cue);
    }
    if (v != std::floor(v)) {
      throw RatingError("not_integer", std::string(to_string(cue)) + " must be an integer from 0 to 4", cue);
    }
  }
}

void check_position(const RatingSession& session, const std::string& face_id) {
  if (session.skipped.count(face_id)) throw RatingError("conflict", "face " + face_id + " was skipped");
  if (session.complete()) throw RatingError("complete", "session " + session.session_id + " is complete");
  if (session.order[session.cursor] != face_id) {
    if (std::find(session.order.begin(), session.order.end(), face_id) == session.order.end()) {
      throw RatingError("unknown_face", "face " + face_id + " is not part of this session");
    }
    throw RatingError("out_of_order", "expected face " + session.order[session.cursor] + ", got " + face_id);
  }
}

}  // namespace

Ack submit_rating(RatingSession& session, const std::string& face_id, const CueRatings& ratings) {
  if (const auto it = session.submitted.find(face_id); it != session.submitted.end()) {
    if (it->second == ratings) return {true, session.cursor};
    throw RatingError("conflict", "face " + face_id + " was already rated with different values");
  }
  check_position(session, face_id);
  check_rating_values(ratings);
  session.submitted.emplace(face_id, ratings);
  ++session.cursor;
  return {false, session.cursor};
}

Ack skip_face(RatingSession& session, const std::string& face_id) {
  if (session.submitted.count(face_id)) throw RatingError("conflict", "face " + face_id + " was already rated");
  if (session.skipped.count(face_id)) return {true, session.cursor};
  check_position(session, face_id);
  session.skipped.insert(face_id);
  ++session.cursor;
  return {false, session.cursor};
}

LabelSet aggregate_labels(const std::vector<RatingSession>& sessions, const model::CombinedEstimator& estimator,
                          double scale_factor) {
  if (sessions.empty()) throw Error(ErrorCategory::no_complete_sessions, "no completed rating sessions");
  std::vector<std::string> faces;
  for (const auto& s : sessions) {
    if (!s.complete()) {
      throw Error(ErrorCategory::session, "session " + s.session_id + " (" + s.rater_id + ") is incomplete");
    }
    auto set = s.order;
    std::sort(set.begin(), set.end());
    if (faces.empty()) {
      faces = set;
    } else if (set != faces) {
      throw Error(ErrorCategory::input_mismatch, "rating sessions cover different face sets");
    }
  }

  LabelSet out;
  std::array<std::size_t, 100> bins{};
  for (const auto& id : faces) {
    LabeledFace lf;
    lf.face_id = id;
    lf.mean_cues.scale = CueScale::rater_0_4;
    for (const auto& s : sessions) {
      const auto it = s.submitted.find(id);
      if (it == s.submitted.end()) continue;
      for (std::size_t c = 0; c < kCueCount; ++c) lf.mean_cues.values[c] += it->second.values[c];
      ++lf.rater_count;
    }
    if (lf.rater_count == 0) {
      out.unrated.push_back(id);
      continue;
    }
    for (auto& v : lf.mean_cues.values) v /= static_cast<double>(lf.rater_count);
    lf.fatigue_label = estimator(model::rescale_to_percent(lf.mean_cues, scale_factor));
    ++bins[static_cast<std::size_t>(std::clamp(static_cast<int>(std::floor(lf.fatigue_label.value())), 0, 99))];
    out.faces.push_back(std::move(lf));
  }
  for (std::size_t b = 0; b < bins.size(); ++b) {
    out.histogram[b] = out.faces.empty() ? 0.0 : static_cast<double>(bins[b]) / static_cast<double>(out.faces.size());
  }
  return out;
}

std::string LabelSet::to_csv() const {
  std::ostringstream os;
  os << "face_id";
  for (auto cue : kCues) os << ',' << to_string(cue);
  os << ",fatigue_label\n";
  for (const auto& f : faces) {
    os << f.face_id;
    for (double v : f.mean_cues.values) os << ',' << shortest(v);
    os << ',' << shortest(f.fatigue_label.value()) << '\n';
  }
  return os.str();
}

std::string LabelSet::histogram_csv() const {
  std::ostringstream os;
  os << "bin_low,bin_high,fraction\n";
  for (std::size_t b = 0; b < histogram.size(); ++b) os << b << ',' << b + 1 << ',' << fixed(histogram[b], 6) << '\n';
  return os.str();
}

// ----------------------------------------------------------------------------

RatingService::RatingService(FaceStore store, std::optional<std::filesystem::path> journal, bool allow_skip)
    : store_(std::move(store)), journal_path_(std::move(journal)), allow_skip_(allow_skip) {
  if (!journal_path_) return;
  if (std::filesystem::exists(*journal_path_)) {
    std::ifstream in(*journal_path_);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        apply(json::parse(line), true);
      } catch (const std::exception& e) {
        throw Error(ErrorCategory::parse,
                    "journal " + journal_path_->string() + " line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  journal_.open(*journal_path_, std::ios::app);
  if (!journal_) throw Error(ErrorCategory::io, "cannot append to journal " + journal_path_->string());
}

void RatingService::record(const json& event) {
  if (!journal_path_) return;
  journal_ << event.dump() << '\n';
  journal_.flush();
  if (!journal_) throw Error(ErrorCategory::io, "journal write failed");
}

RatingSession& RatingService::session(const std::string& id) {
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw RatingError("unknown_session", "no session " + id);
  return it->second;
}

const RatingSession& RatingService::session(const std::string& id) const {
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw RatingError("unknown_session", "no session " + id);
  return it->second;
}

void RatingService::apply(const json& event, bool replaying) {
  const auto kind = event.at("event").get<std::string>();
  const auto id = event.at("session_id").get<std::string>();
  if (kind == "open") {
    auto s = open_session(event.at("rater_id").get<std::string>(), store_.face_ids(),
                          event.at("seed").get<std::uint64_t>());
    s.session_id = id;
    sessions_[id] = std::move(s);
    if (replaying && id.size() > 1 && id[0] == 's') {
      next_id_ = std::max(next_id_, static_cast<std::size_t>(std::stoull(id.substr(1))) + 1);
    }
  } else if (kind == "rating") {
    submit_rating(session(id), event.at("face_id").get<std::string>(), event.at("cues").get<CueRatings>());
  } else if (kind == "skip") {
    skip_face(session(id), event.at("face_id").get<std::string>());
  } else {
    throw Error(ErrorCategory::parse, "unknown journal event " + kind);
  }
}

std::string RatingService::open(const std::string& rater_id, std::uint64_t seed) {
  std::lock_guard lock(mutex_);
  if (rater_id.empty()) throw RatingError("bad_request", "rater_id must be non-empty");
  for (const auto& [_, s] : sessions_) {
    if (s.rater_id == rater_id && !s.complete()) {
      throw RatingError("duplicate_rater", "rater " + rater_id + " already has an open session");
    }
  }
  if (store_.size() == 0) throw RatingError("empty_face_set", "the face store is empty");
  const std::string id = "s" + std::to_string(next_id_++);
  const json event{{"event", "open"}, {"session_id", id}, {"rater_id", rater_id}, {"seed", seed}};
  apply(event, false);
  record(event);
  return id;
}

std::optional<FaceBundle> RatingService::next(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  return next_face(session(session_id), store_);
}

Ack RatingService::submit(const std::string& session_id, const std::string& face_id, const CueRatings& ratings) {
  std::lock_guard lock(mutex_);
  const Ack ack = submit_rating(session(session_id), face_id, ratings);
  if (!ack.duplicate) {
    record({{"event", "rating"}, {"session_id", session_id}, {"face_id", face_id}, {"cues", ratings}});
  }
  return ack;
}

Ack RatingService::skip(const std::string& session_id, const std::string& face_id) {
  std::lock_guard lock(mutex_);
  if (!allow_skip_) throw RatingError("skip_disabled", "skipping is disabled for this service");
  const Ack ack = skip_face(session(session_id), face_id);
  if (!ack.duplicate) record({{"event", "skip"}, {"session_id", session_id}, {"face_id", face_id}});
  return ack;
}

Progress RatingService::progress(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  const auto& s = session(session_id);
  return {s.cursor, s.order.size()};
}

std::vector<RatingSession> RatingService::sessions() const {
  std::lock_guard lock(mutex_);
  std::vector<RatingSession> out;
  for (const auto& [_, s] : sessions_) out.push_back(s);
  return out;
}

std::vector<RatingSession> RatingService::completed_sessions() const {
  std::lock_guard lock(mutex_);
  std::vector<RatingSession> out;
  for (const auto& [_, s] : sessions_) {
    if (s.complete()) out.push_back(s);
  }
  return out;
}

}  // namespace fatiguescope::rating
