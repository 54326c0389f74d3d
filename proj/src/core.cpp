#include "fatiguescope/core.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "fatiguescope/error.hpp"

namespace fatiguescope {

namespace {

constexpr std::array<LandmarkRange, 7> kRanges = {{
    {0, 19},   // contour
    {19, 8},   // left_brow
    {27, 8},   // right_brow
    {35, 10},  // left_eye
    {45, 10},  // right_eye
    {55, 10},  // nose
    {65, 18},  // mouth
}};

bool in_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// 0001-01-01T00:00:00Z .. 9999-12-31T23:59:59Z
constexpr std::int64_t kMinTimestamp = -62135596800;
constexpr std::int64_t kMaxTimestamp = 253402300799;

}  // namespace

LandmarkRange landmark_range(LandmarkGroup group) {
  return kRanges[static_cast<std::size_t>(group)];
}

std::string_view landmark_group_name(LandmarkGroup group) {
  switch (group) {
    case LandmarkGroup::contour: return "contour";
    case LandmarkGroup::left_brow: return "left_brow";
    case LandmarkGroup::right_brow: return "right_brow";
    case LandmarkGroup::left_eye: return "left_eye";
    case LandmarkGroup::right_eye: return "right_eye";
    case LandmarkGroup::nose: return "nose";
    case LandmarkGroup::mouth: return "mouth";
  }
  return "";
}

std::vector<Point2> LandmarkSet::group(LandmarkGroup g) const {
  const auto range = landmark_range(g);
  if (points.size() < range.first + range.count) {
    throw Error(ErrorCategory::validation,
                "landmark set too short for group " + std::string(landmark_group_name(g)));
  }
  return {points.begin() + static_cast<std::ptrdiff_t>(range.first),
          points.begin() + static_cast<std::ptrdiff_t>(range.first + range.count)};
}

std::string_view to_string(EyeStatusKind kind) {
  switch (kind) {
    case EyeStatusKind::no_glasses_eye_open: return "no_glasses_eye_open";
    case EyeStatusKind::no_glasses_eye_close: return "no_glasses_eye_close";
    case EyeStatusKind::normal_glasses_eye_open: return "normal_glasses_eye_open";
    case EyeStatusKind::normal_glasses_eye_close: return "normal_glasses_eye_close";
    case EyeStatusKind::dark_glasses: return "dark_glasses";
  }
  return "";
}

std::optional<EyeStatusKind> parse_eye_status(std::string_view text) {
  for (auto kind : kEyeStatusKinds) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

EyeStatusKind EyeStatus::argmax(const std::array<double, kEyeStatusCount>& confidences) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kEyeStatusCount; ++i) {
    if (confidences[i] > confidences[best]) best = i;
  }
  return kEyeStatusKinds[best];
}

EyeStatus EyeStatus::from_confidences(const std::array<double, kEyeStatusCount>& confidences) {
  return EyeStatus{argmax(confidences), confidences};
}

std::string_view to_string(Gender g) { return g == Gender::male ? "male" : "female"; }

std::string_view to_string(Race r) {
  switch (r) {
    case Race::african_american: return "african_american";
    case Race::asian: return "asian";
    case Race::caucasian: return "caucasian";
  }
  return "";
}

std::optional<Gender> parse_gender(std::string_view text) {
  if (text == "male") return Gender::male;
  if (text == "female") return Gender::female;
  return std::nullopt;
}

std::optional<Race> parse_race(std::string_view text) {
  for (auto r : {Race::african_american, Race::asian, Race::caucasian}) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

std::string DetectionRecord::post_key() const {
  if (post_id) return "post:" + *post_id;
  return "ts:" + user_id + "@" + std::to_string(post_timestamp);
}

std::string_view to_string(Cue cue) {
  switch (cue) {
    case Cue::hanging_eyelids: return "hanging_eyelids";
    case Cue::red_eyes: return "red_eyes";
    case Cue::dark_circles: return "dark_circles";
    case Cue::pale_skin: return "pale_skin";
    case Cue::droopy_corner_mouth: return "droopy_corner_mouth";
    case Cue::swollen_eyes: return "swollen_eyes";
    case Cue::glazed_eyes: return "glazed_eyes";
    case Cue::wrinkles: return "wrinkles";
  }
  return "";
}

std::optional<Cue> parse_cue(std::string_view text) {
  for (auto cue : kCues) {
    if (to_string(cue) == text) return cue;
  }
  return std::nullopt;
}

std::string_view to_string(CueScale scale) {
  return scale == CueScale::rater_0_4 ? "rater_0_4" : "percent_0_100";
}

std::optional<CueScale> parse_cue_scale(std::string_view text) {
  if (text == "rater_0_4") return CueScale::rater_0_4;
  if (text == "percent_0_100") return CueScale::percent_0_100;
  return std::nullopt;
}

double scale_max(CueScale scale) { return scale == CueScale::rater_0_4 ? 4.0 : 100.0; }

std::optional<Cue> first_invalid_cue(const CueRatings& ratings, bool require_integers) {
  const double hi = scale_max(ratings.scale);
  for (auto cue : kCues) {
    const double v = ratings[cue];
    if (!std::isfinite(v) || v < 0.0 || v > hi) return cue;
    if (require_integers && v != std::floor(v)) return cue;
  }
  return std::nullopt;
}

FatigueRate::FatigueRate(double value) : value_(value) {
  if (!std::isfinite(value) || value < kMin || value > kMax) {
    std::ostringstream os;
    os << "fatigue rate " << value << " outside [0,100]";
    throw Error(ErrorCategory::validation, os.str());
  }
}

FatigueRate FatigueRate::clamped(double value) {
  if (std::isnan(value)) throw Error(ErrorCategory::validation, "fatigue rate is NaN");
  return FatigueRate(std::min(kMax, std::max(kMin, value)));
}

std::vector<Violation> validate_record(const DetectionRecord& record) {
  std::vector<Violation> out;
  auto add = [&out](std::string field, std::string message) {
    out.push_back({std::move(field), std::move(message)});
  };

  if (record.face_id.empty()) add("face_id", "face_id must be non-empty");
  if (record.user_id.empty()) add("user_id", "user_id must be non-empty");
  if (!is_valid_timestamp(record.post_timestamp)) {
    add("post_timestamp", "timestamp does not map to a valid calendar date");
  }

  if (!(std::isfinite(record.bbox.width) && record.bbox.width > 0.0)) {
    add("bbox.width", "bbox width > 0");
  }
  if (!(std::isfinite(record.bbox.height) && record.bbox.height > 0.0)) {
    add("bbox.height", "bbox height > 0");
  }

  const auto& pts = record.landmarks.points;
  if (pts.size() != kLandmarkCount) {
    add("landmarks", "landmark count \xE2\x89\xA0 83 (got " + std::to_string(pts.size()) + ")");
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!in_unit(pts[i].x) || !in_unit(pts[i].y)) {
      add("landmarks[" + std::to_string(i) + "]", "coordinates must lie within [0,1]");
    }
  }

  const auto& d = record.demographics;
  if (d.age < 0) add("demographics.age", "age must be >= 0");
  auto check_conf = [&](const std::string& field, double c) {
    if (!std::isfinite(c) || c < 0.0 || c > 100.0) add(field, "confidence must lie within [0,100]");
  };
  check_conf("demographics.gender_confidence", d.gender_confidence);
  check_conf("demographics.race_confidence", d.race_confidence);
  if (d.race && to_string(*d.race) != d.race_label) {
    add("demographics.race", "race enum disagrees with raw label");
  }

  auto check_eye = [&](const std::string& field, const EyeStatus& s) {
    for (std::size_t i = 0; i < kEyeStatusCount; ++i) {
      check_conf(field + ".confidences." + std::string(to_string(kEyeStatusKinds[i])),
                 s.confidences[i]);
    }
    if (s.status != EyeStatus::argmax(s.confidences)) {
      add(field + ".status", "status must equal the argmax of confidences");
    }
  };
  check_eye("left_eye_status", record.left_eye_status);
  check_eye("right_eye_status", record.right_eye_status);

  auto check_q = [&](const std::string& field, double v) {
    if (!std::isfinite(v) || v < 0.0) add(field, "must be finite and non-negative");
  };
  check_q("quality.blur_value", record.quality.blur_value);
  check_q("quality.blur_threshold", record.quality.blur_threshold);
  check_q("quality.face_quality_value", record.quality.face_quality_value);
  check_q("quality.face_quality_threshold", record.quality.face_quality_threshold);
  return out;
}

bool is_valid_timestamp(std::int64_t epoch_seconds) {
  return epoch_seconds >= kMinTimestamp && epoch_seconds <= kMaxTimestamp;
}

int utc_weekday(std::int64_t epoch_seconds) {
  if (!is_valid_timestamp(epoch_seconds)) {
    throw Error(ErrorCategory::validation,
                "timestamp " + std::to_string(epoch_seconds) + " is outside the calendar range");
  }
  const std::chrono::sys_days day{std::chrono::days{floor_div(epoch_seconds, 86400)}};
  return static_cast<int>(std::chrono::weekday{day}.c_encoding());
}

int age_bucket(int age, int width) {
  if (width <= 0) throw Error(ErrorCategory::invalid_config, "age bucket width must be > 0");
  const int last = 80 / width;
  if (age < 0) return 0;
  return std::min(age / width, last);
}

std::string age_bucket_label(int bucket, int width) {
  if (bucket >= 80 / width) return "80+";
  return std::to_string(bucket * width) + "-" + std::to_string((bucket + 1) * width);
}

}  // namespace fatiguescope
