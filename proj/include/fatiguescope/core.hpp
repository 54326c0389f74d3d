#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fatiguescope {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

// Contiguous index ranges into the 83-point landmark array. The table is fixed
// by this project (see docs/landmarks.md); it is not the detector's own order.
enum class LandmarkGroup { contour, left_brow, right_brow, left_eye, right_eye, nose, mouth };

struct LandmarkRange {
  std::size_t first;
  std::size_t count;
};

inline constexpr std::size_t kLandmarkCount = 83;
inline constexpr std::size_t kEyePointCount = 10;

LandmarkRange landmark_range(LandmarkGroup group);
std::string_view landmark_group_name(LandmarkGroup group);
inline constexpr std::array<LandmarkGroup, 7> kLandmarkGroups = {
    LandmarkGroup::contour,  LandmarkGroup::left_brow, LandmarkGroup::right_brow,
    LandmarkGroup::left_eye, LandmarkGroup::right_eye, LandmarkGroup::nose,
    LandmarkGroup::mouth};

// Landmarks in normalized image coordinates ([0,1] on both axes, y down).
struct LandmarkSet {
  std::vector<Point2> points;

  std::vector<Point2> group(LandmarkGroup g) const;
  bool operator==(const LandmarkSet&) const = default;
};

enum class EyeStatusKind {
  no_glasses_eye_open,
  no_glasses_eye_close,
  normal_glasses_eye_open,
  normal_glasses_eye_close,
  dark_glasses,
};
inline constexpr std::size_t kEyeStatusCount = 5;
inline constexpr std::array<EyeStatusKind, kEyeStatusCount> kEyeStatusKinds = {
    EyeStatusKind::no_glasses_eye_open, EyeStatusKind::no_glasses_eye_close,
    EyeStatusKind::normal_glasses_eye_open, EyeStatusKind::normal_glasses_eye_close,
    EyeStatusKind::dark_glasses};

std::string_view to_string(EyeStatusKind kind);
std::optional<EyeStatusKind> parse_eye_status(std::string_view text);

struct EyeStatus {
  EyeStatusKind status = EyeStatusKind::no_glasses_eye_open;
  std::array<double, kEyeStatusCount> confidences{};  // indexed by enum order

  // Argmax of confidences, first declared status wins ties.
  static EyeStatusKind argmax(const std::array<double, kEyeStatusCount>& confidences);
  static EyeStatus from_confidences(const std::array<double, kEyeStatusCount>& confidences);

  bool operator==(const EyeStatus&) const = default;
};

enum class Gender { male, female };
enum class Race { african_american, asian, caucasian };  // alphabetical: report order

std::string_view to_string(Gender g);
std::string_view to_string(Race r);
std::optional<Gender> parse_gender(std::string_view text);
std::optional<Race> parse_race(std::string_view text);

struct Demographics {
  int age = 0;
  Gender gender = Gender::male;
  double gender_confidence = 0.0;
  // Raw detector label; `race` is empty when the label is not one of the
  // three analyzed classes.
  std::string race_label;
  std::optional<Race> race;
  double race_confidence = 0.0;

  bool operator==(const Demographics&) const = default;
};

struct QualityReport {
  double blur_value = 0.0;
  double blur_threshold = 0.0;
  double face_quality_value = 0.0;
  double face_quality_threshold = 0.0;
  bool operator==(const QualityReport&) const = default;
};

// Pixel bounding box in the source image.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;
  double area() const { return width * height; }
  bool operator==(const BBox&) const = default;
};

struct DetectionRecord {
  std::string face_id;
  std::string user_id;
  // Groups faces detected in the same photo post. When absent the post is
  // identified by (user_id, post_timestamp).
  std::optional<std::string> post_id;
  std::int64_t post_timestamp = 0;  // UTC epoch seconds
  BBox bbox;
  LandmarkSet landmarks;
  Demographics demographics;
  EyeStatus left_eye_status;
  EyeStatus right_eye_status;
  QualityReport quality;
  std::vector<std::string> source_tags;

  std::string post_key() const;
  bool operator==(const DetectionRecord&) const = default;
};

// The eight facial cues, in the coefficient order of the combined estimator.
enum class Cue {
  hanging_eyelids,
  red_eyes,
  dark_circles,
  pale_skin,
  droopy_corner_mouth,
  swollen_eyes,
  glazed_eyes,
  wrinkles,
};
inline constexpr std::size_t kCueCount = 8;
inline constexpr std::array<Cue, kCueCount> kCues = {
    Cue::hanging_eyelids, Cue::red_eyes,     Cue::dark_circles, Cue::pale_skin,
    Cue::droopy_corner_mouth, Cue::swollen_eyes, Cue::glazed_eyes, Cue::wrinkles};

std::string_view to_string(Cue cue);
std::optional<Cue> parse_cue(std::string_view text);

enum class CueScale { rater_0_4, percent_0_100 };
std::string_view to_string(CueScale scale);
std::optional<CueScale> parse_cue_scale(std::string_view text);
double scale_max(CueScale scale);

struct CueRatings {
  std::array<double, kCueCount> values{};
  CueScale scale = CueScale::rater_0_4;

  double operator[](Cue cue) const { return values[static_cast<std::size_t>(cue)]; }
  double& operator[](Cue cue) { return values[static_cast<std::size_t>(cue)]; }
  bool operator==(const CueRatings&) const = default;
};

// First cue whose value is outside the scale's range, or (when
// `require_integers`) is not integral.
std::optional<Cue> first_invalid_cue(const CueRatings& ratings, bool require_integers);

class FatigueRate {
 public:
  static constexpr double kMin = 0.0;
  static constexpr double kMax = 100.0;

  // Throws Error(validation) outside [0,100] or when not finite.
  explicit FatigueRate(double value);
  static FatigueRate clamped(double value);

  double value() const { return value_; }
  auto operator<=>(const FatigueRate&) const = default;

 private:
  double value_;
};

struct Violation {
  std::string field;
  std::string message;
  bool operator==(const Violation&) const = default;
};

// Every violated invariant of the record; empty when the record is valid.
std::vector<Violation> validate_record(const DetectionRecord& record);

// Weekday of a UTC timestamp, 0 = Sunday .. 6 = Saturday.
int utc_weekday(std::int64_t epoch_seconds);
bool is_valid_timestamp(std::int64_t epoch_seconds);
inline constexpr std::array<std::string_view, 7> kWeekdayNames = {"Sun", "Mon", "Tue", "Wed",
                                                                  "Thu", "Fri", "Sat"};

// Decade bucket index: age 0..9 -> 0, ..., 70..79 -> 7, >= 80 -> 8.
inline constexpr int kAgeBucketCount = 9;
int age_bucket(int age, int width = 10);
std::string age_bucket_label(int bucket, int width = 10);

}  // namespace fatiguescope
