#include "fatiguescope/json_io.hpp"

#include "fatiguescope/error.hpp"

namespace fatiguescope {

using nlohmann::json;

namespace {

template <typename T, typename Parser>
T parse_enum(const json& j, const char* what, Parser parse) {
  const auto text = j.get<std::string>();
  const auto value = parse(text);
  if (!value) throw Error(ErrorCategory::parse, std::string("unknown ") + what + " '" + text + "'");
  return *value;
}

}  // namespace

void to_json(json& j, const Point2& p) { j = json::array({p.x, p.y}); }

void from_json(const json& j, Point2& p) {
  if (!j.is_array() || j.size() != 2) {
    throw Error(ErrorCategory::parse, "landmark must be an [x, y] pair");
  }
  p.x = j[0].get<double>();
  p.y = j[1].get<double>();
}

void to_json(json& j, const LandmarkSet& l) { j = l.points; }

void from_json(const json& j, LandmarkSet& l) {
  if (!j.is_array()) throw Error(ErrorCategory::parse, "landmarks must be an array");
  l.points = j.get<std::vector<Point2>>();
}

void to_json(json& j, const EyeStatus& s) {
  json conf = json::object();
  for (std::size_t i = 0; i < kEyeStatusCount; ++i) {
    conf[std::string(to_string(kEyeStatusKinds[i]))] = s.confidences[i];
  }
  j = json{{"status", to_string(s.status)}, {"confidences", conf}};
}

void from_json(const json& j, EyeStatus& s) {
  s.status = parse_enum<EyeStatusKind>(j.at("status"), "eye status", parse_eye_status);
  const auto& conf = j.at("confidences");
  for (std::size_t i = 0; i < kEyeStatusCount; ++i) {
    s.confidences[i] = conf.at(std::string(to_string(kEyeStatusKinds[i]))).get<double>();
  }
}

void to_json(json& j, const Demographics& d) {
  j = json{{"age", d.age},
           {"gender", to_string(d.gender)},
           {"gender_confidence", d.gender_confidence},
           {"race", d.race_label},
           {"race_confidence", d.race_confidence}};
}

void from_json(const json& j, Demographics& d) {
  d.age = j.at("age").get<int>();
  d.gender = parse_enum<Gender>(j.at("gender"), "gender", parse_gender);
  d.gender_confidence = j.at("gender_confidence").get<double>();
  d.race_label = j.at("race").get<std::string>();
  d.race = parse_race(d.race_label);
  d.race_confidence = j.at("race_confidence").get<double>();
}

void to_json(json& j, const QualityReport& q) {
  j = json{{"blur_value", q.blur_value},
           {"blur_threshold", q.blur_threshold},
           {"face_quality_value", q.face_quality_value},
           {"face_quality_threshold", q.face_quality_threshold}};
}

void from_json(const json& j, QualityReport& q) {
  q.blur_value = j.at("blur_value").get<double>();
  q.blur_threshold = j.at("blur_threshold").get<double>();
  q.face_quality_value = j.at("face_quality_value").get<double>();
  q.face_quality_threshold = j.at("face_quality_threshold").get<double>();
}

void to_json(json& j, const BBox& b) {
  j = json{{"x", b.x}, {"y", b.y}, {"width", b.width}, {"height", b.height}};
}

void from_json(const json& j, BBox& b) {
  b.x = j.at("x").get<double>();
  b.y = j.at("y").get<double>();
  b.width = j.at("width").get<double>();
  b.height = j.at("height").get<double>();
}

void to_json(json& j, const DetectionRecord& r) {
  j = json::object();
  j["face_id"] = r.face_id;
  j["user_id"] = r.user_id;
  if (r.post_id) j["post_id"] = *r.post_id;
  j["post_timestamp"] = r.post_timestamp;
  j["bbox"] = r.bbox;
  j["landmarks"] = r.landmarks;
  j["demographics"] = r.demographics;
  j["left_eye_status"] = r.left_eye_status;
  j["right_eye_status"] = r.right_eye_status;
  j["quality"] = r.quality;
  j["source_tags"] = r.source_tags;
}

void from_json(const json& j, DetectionRecord& r) {
  r.face_id = j.at("face_id").get<std::string>();
  r.user_id = j.at("user_id").get<std::string>();
  if (auto it = j.find("post_id"); it != j.end() && !it->is_null()) {
    r.post_id = it->get<std::string>();
  } else {
    r.post_id.reset();
  }
  r.post_timestamp = j.at("post_timestamp").get<std::int64_t>();
  r.bbox = j.at("bbox").get<BBox>();
  r.landmarks = j.at("landmarks").get<LandmarkSet>();
  r.demographics = j.at("demographics").get<Demographics>();
  r.left_eye_status = j.at("left_eye_status").get<EyeStatus>();
  r.right_eye_status = j.at("right_eye_status").get<EyeStatus>();
  r.quality = j.at("quality").get<QualityReport>();
  r.source_tags.clear();
  if (auto it = j.find("source_tags"); it != j.end()) {
    r.source_tags = it->get<std::vector<std::string>>();
  }
}

void to_json(json& j, const CueRatings& c) {
  j = json::object();
  for (auto cue : kCues) j[std::string(to_string(cue))] = c[cue];
  j["scale"] = to_string(c.scale);
}

void from_json(const json& j, CueRatings& c) {
  for (auto cue : kCues) c[cue] = j.at(std::string(to_string(cue))).get<double>();
  c.scale = CueScale::rater_0_4;
  if (auto it = j.find("scale"); it != j.end()) {
    c.scale = parse_enum<CueScale>(*it, "cue scale", parse_cue_scale);
  }
}

DetectionRecord decode_record(std::string_view line) {
  try {
    return json::parse(line).get<DetectionRecord>();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCategory::parse, e.what());
  }
}

std::string encode_record(const DetectionRecord& record) { return json(record).dump(); }

}  // namespace fatiguescope
