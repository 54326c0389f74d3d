#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "fatiguescope/core.hpp"

namespace testutil {

using namespace fatiguescope;

inline void put_ellipse(LandmarkSet& l, LandmarkGroup g, double cx, double cy, double rx, double ry) {
  const auto r = landmark_range(g);
  for (std::size_t i = 0; i < r.count; ++i) {
    const double a = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(r.count);
    l.points[r.first + i] = {cx + rx * std::cos(a), cy + ry * std::sin(a)};
  }
}

// A plausible frontal face: eyes at y=0.40, mouth at y=0.75.
inline LandmarkSet face_landmarks(double dx = 0.0, double dy = 0.0) {
  LandmarkSet l;
  l.points.assign(kLandmarkCount, {0.5 + dx, 0.5 + dy});
  const auto contour = landmark_range(LandmarkGroup::contour);
  for (std::size_t i = 0; i < contour.count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(contour.count - 1);
    l.points[contour.first + i] = {0.15 + 0.7 * t + dx, 0.5 + 0.35 * std::sin(M_PI * t) + dy};
  }
  put_ellipse(l, LandmarkGroup::left_eye, 0.35 + dx, 0.40 + dy, 0.08, 0.03);
  put_ellipse(l, LandmarkGroup::right_eye, 0.65 + dx, 0.40 + dy, 0.08, 0.03);
  put_ellipse(l, LandmarkGroup::mouth, 0.5 + dx, 0.75 + dy, 0.12, 0.04);
  return l;
}

inline EyeStatus eye(EyeStatusKind status) {
  std::array<double, kEyeStatusCount> c{};
  c.fill(1.0);
  c[static_cast<std::size_t>(status)] = 95.0;
  return EyeStatus::from_confidences(c);
}

inline DetectionRecord make_record(const std::string& face_id, const std::string& user_id,
                                   std::int64_t ts = 1489363200) {
  DetectionRecord r;
  r.face_id = face_id;
  r.user_id = user_id;
  r.post_timestamp = ts;
  r.bbox = {10, 20, 100, 120};
  r.landmarks = face_landmarks();
  r.demographics.age = 30;
  r.demographics.gender = Gender::female;
  r.demographics.gender_confidence = 90.0;
  r.demographics.race_label = "asian";
  r.demographics.race = Race::asian;
  r.demographics.race_confidence = 80.0;
  r.left_eye_status = eye(EyeStatusKind::no_glasses_eye_open);
  r.right_eye_status = eye(EyeStatusKind::no_glasses_eye_open);
  r.quality = {5.0, 50.0, 80.0, 70.0};
  r.source_tags = {"#selfie"};
  return r;
}

// Scratch directory removed on scope exit.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           ("fatiguescope_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline CueRatings cues(double v) {
  CueRatings r;
  r.values.fill(v);
  return r;
}

}  // namespace testutil
