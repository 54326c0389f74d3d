#include "fatiguescope/ingestion.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "fatiguescope/cohort.hpp"
#include "fatiguescope/error.hpp"
#include "fatiguescope/json_io.hpp"

namespace fatiguescope::ingestion {

void FilterPolicy::validate() const {
  if (min_posts < 1) throw Error(ErrorCategory::invalid_config, "min_posts must be >= 1");
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::eye_status: return "eye-status";
    case RejectReason::blur: return "blur";
    case RejectReason::face_quality: return "face-quality";
    case RejectReason::invalid: return "invalid";
    case RejectReason::malformed: return "malformed";
    case RejectReason::min_posts: return "min-posts";
  }
  return "";
}

FilterDecision quality_filter(const DetectionRecord& record, const FilterPolicy& policy) {
  if (record.left_eye_status.status != policy.require_eye_status ||
      record.right_eye_status.status != policy.require_eye_status) {
    return FilterDecision::rejected(RejectReason::eye_status);
  }
  if (policy.enforce_blur && !(record.quality.blur_value < record.quality.blur_threshold)) {
    return FilterDecision::rejected(RejectReason::blur);
  }
  if (policy.enforce_face_quality &&
      !(record.quality.face_quality_value > record.quality.face_quality_threshold)) {
    return FilterDecision::rejected(RejectReason::face_quality);
  }
  return FilterDecision::kept();
}

std::size_t TimelineCorpus::record_count() const {
  std::size_t n = 0;
  for (const auto& [_, recs] : users) n += recs.size();
  return n;
}

std::vector<DetectionRecord> TimelineCorpus::records() const {
  std::vector<DetectionRecord> out;
  out.reserve(record_count());
  for (const auto& [_, recs] : users) out.insert(out.end(), recs.begin(), recs.end());
  return out;
}

std::size_t IngestStats::rejected_total() const {
  std::size_t n = 0;
  for (const auto& [_, c] : rejected) n += c;
  return n;
}

nlohmann::json IngestStats::to_json() const {
  nlohmann::json rej = nlohmann::json::object();
  for (auto reason : kRejectReasons) {
    auto it = rejected.find(reason);
    rej[std::string(to_string(reason))] = it == rejected.end() ? 0 : it->second;
  }
  nlohmann::json bad = nlohmann::json::array();
  for (const auto& m : malformed) bad.push_back({{"line", m.line}, {"message", m.message}});
  return {{"records_read", records_read}, {"kept", kept},         {"rejected", rej},
          {"users_seen", users_seen},     {"users_kept", users_kept}, {"malformed", bad}};
}

IngestResult ingest_stream(std::istream& in, const FilterPolicy& policy, std::string provenance) {
  policy.validate();
  IngestResult result;
  auto& stats = result.stats;
  result.corpus.provenance = std::move(provenance);
  for (auto reason : kRejectReasons) stats.rejected[reason] = 0;

  std::map<std::string, std::vector<DetectionRecord>> kept_by_user;
  std::set<std::string> seen_users;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ++stats.records_read;

    DetectionRecord record;
    try {
      record = decode_record(line);
    } catch (const Error& e) {
      ++stats.rejected[RejectReason::malformed];
      stats.malformed.push_back({line_no, e.what()});
      continue;
    }
    seen_users.insert(record.user_id);
    if (!validate_record(record).empty()) {
      ++stats.rejected[RejectReason::invalid];
      continue;
    }
    const auto decision = quality_filter(record, policy);
    if (!decision.keep) {
      ++stats.rejected[decision.reason];
      continue;
    }
    kept_by_user[record.user_id].push_back(std::move(record));
  }
  if (in.bad()) throw Error(ErrorCategory::io, "read error on " + result.corpus.provenance);

  stats.users_seen = seen_users.size();
  for (auto& [user, recs] : kept_by_user) {
    std::set<std::string> posts;
    for (const auto& r : recs) posts.insert(r.post_key());
    if (posts.size() < static_cast<std::size_t>(policy.min_posts)) {
      stats.rejected[RejectReason::min_posts] += recs.size();
      continue;
    }
    std::stable_sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) {
      return a.post_timestamp < b.post_timestamp;
    });
    stats.kept += recs.size();
    result.corpus.users.emplace(user, std::move(recs));
  }
  stats.users_kept = result.corpus.users.size();
  return result;
}

IngestResult ingest(const std::filesystem::path& path, const FilterPolicy& policy) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::io, "cannot open " + path.string());
  return ingest_stream(in, policy, path.string());
}

void write_corpus(std::ostream& out, const TimelineCorpus& corpus) {
  for (const auto& [_, recs] : corpus.users) {
    for (const auto& r : recs) out << encode_record(r) << '\n';
  }
}

TimelineCorpus read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::io, "cannot open corpus " + path.string());
  TimelineCorpus corpus;
  corpus.provenance = path.string();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto rec = decode_record(line);
      corpus.users[rec.user_id].push_back(std::move(rec));
    } catch (const Error& e) {
      throw Error(ErrorCategory::parse, path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  for (auto& [_, recs] : corpus.users) {
    std::stable_sort(recs.begin(), recs.end(),
                     [](const auto& a, const auto& b) { return a.post_timestamp < b.post_timestamp; });
  }
  return corpus;
}

nlohmann::json DemographicHistogram::to_json() const {
  nlohmann::json ages = nlohmann::json::object();
  for (const auto& [b, c] : age_buckets) ages[age_bucket_label(b, bucket_width)] = c;
  nlohmann::json g = nlohmann::json::object();
  for (const auto& [k, v] : gender) {
    g[std::string(fatiguescope::to_string(k))] = {{"count", v.count},
                                                 {"mean_confidence", v.mean_confidence}};
  }
  nlohmann::json r = nlohmann::json::object();
  for (const auto& [k, v] : race) r[k] = {{"count", v.count}, {"mean_confidence", v.mean_confidence}};
  return {{"users", users},
          {"ambiguous_users", ambiguous_users},
          {"bucket_width", bucket_width},
          {"age", ages},
          {"gender", g},
          {"race", r},
          {"mean_gender_confidence", mean_gender_confidence},
          {"mean_race_confidence", mean_race_confidence}};
}

DemographicHistogram demographic_histogram(const TimelineCorpus& corpus, int bucket_width) {
  if (corpus.users.empty()) {
    throw Error(ErrorCategory::degenerate, "demographic histogram of an empty corpus");
  }
  DemographicHistogram h;
  h.bucket_width = bucket_width;

  struct Acc {
    std::size_t users = 0;
    double conf_sum = 0.0;
    std::size_t faces = 0;
  };
  std::map<Gender, Acc> gender_acc;
  std::map<std::string, Acc> race_acc;
  double gender_conf = 0.0;
  double race_conf = 0.0;
  std::size_t faces = 0;

  for (const auto& [user, recs] : corpus.users) {
    const auto ident = cohort::identify_user_faces(recs);
    if (!ident.profile) {
      ++h.ambiguous_users;
      continue;
    }
    const auto& p = *ident.profile;
    std::map<std::string, const DetectionRecord*> by_face;
    for (const auto& r : recs) by_face.emplace(r.face_id, &r);

    std::map<int, std::size_t> age_votes;
    auto& ga = gender_acc[p.modal_gender];
    auto& ra = race_acc[p.modal_race_label];
    ++ga.users;
    ++ra.users;
    for (const auto& id : p.face_ids) {
      const auto& d = by_face.at(id)->demographics;
      ++age_votes[age_bucket(d.age, bucket_width)];
      ga.conf_sum += d.gender_confidence;
      ++ga.faces;
      ra.conf_sum += d.race_confidence;
      ++ra.faces;
      gender_conf += d.gender_confidence;
      race_conf += d.race_confidence;
      ++faces;
    }
    // Modal bucket; the younger bucket wins a tie.
    int best = age_votes.begin()->first;
    for (const auto& [b, c] : age_votes) {
      if (c > age_votes[best]) best = b;
    }
    ++h.age_buckets[best];
    ++h.users;
  }
  for (const auto& [g, a] : gender_acc) {
    h.gender[g] = {a.users, a.faces ? a.conf_sum / static_cast<double>(a.faces) : 0.0};
  }
  for (const auto& [r, a] : race_acc) {
    h.race[r] = {a.users, a.faces ? a.conf_sum / static_cast<double>(a.faces) : 0.0};
  }
  if (faces > 0) {
    h.mean_gender_confidence = gender_conf / static_cast<double>(faces);
    h.mean_race_confidence = race_conf / static_cast<double>(faces);
  }
  return h;
}

}  // namespace fatiguescope::ingestion
