#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "fatiguescope/error.hpp"
#include "fatiguescope/image.hpp"
#include "fatiguescope/rng.hpp"
#include "fatiguescope/roi.hpp"
#include "helpers.hpp"

using namespace fatiguescope;
using namespace fatiguescope::roi;

namespace {

const RoiSpec& spec(const std::vector<RoiSpec>& rois, RoiKind k) {
  for (const auto& r : rois) {
    if (r.kind == k) return r;
  }
  throw std::runtime_error("missing roi");
}

// Returns the intensity statistics of each crop, tagging nothing; used to
// check that descriptor slices line up with ROI order.
class TaggingBackend final : public DescriptorBackend {
 public:
  std::string id() const override { return "ext:tagging"; }
  std::size_t input_width() const override { return 8; }
  std::size_t input_height() const override { return 8; }
  std::size_t dimension() const override { return 2; }
  std::vector<double> describe(const Image& crop) const override {
    return {static_cast<double>(calls_++), crop.at(0, 0, 0)};
  }

 private:
  mutable int calls_ = 0;
};

class FailingBackend final : public DescriptorBackend {
 public:
  std::string id() const override { return "ext:failing"; }
  std::size_t input_width() const override { return 4; }
  std::size_t input_height() const override { return 4; }
  std::size_t dimension() const override { return 1; }
  std::vector<double> describe(const Image&) const override { throw std::runtime_error("model crashed"); }
};

Image gradient_image(std::size_t w, std::size_t h) {
  Image img(w, h, 1);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) img.at(x, y, 0) = static_cast<float>((x + 2 * y) % 256) / 255.0f;
  }
  return img;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("fs_roi_" + name);
}

}  // namespace

TEST_CASE("eye ROI margin example") {
  auto l = testutil::face_landmarks();
  const auto r = landmark_range(LandmarkGroup::left_eye);
  for (std::size_t i = 0; i < r.count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(r.count - 1);
    l.points[r.first + i] = {0.30 + 0.10 * t, i % 2 ? 0.45 : 0.50};
  }
  const auto rois = locate_rois(l, MarginConfig{});
  const auto& eye = spec(rois, RoiKind::left_eye).unclamped;
  CHECK(eye.x == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(eye.right() == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(eye.y == doctest::Approx(0.425).epsilon(1e-12));
  CHECK(eye.bottom() == doctest::Approx(0.525).epsilon(1e-12));

  const auto& below = spec(rois, RoiKind::left_eye_bottom).unclamped;
  CHECK(below.x == doctest::Approx(eye.x));
  CHECK(below.w == doctest::Approx(eye.w));
  CHECK(below.y == doctest::Approx(0.50));
  CHECK(below.h == doctest::Approx(0.05));
}

TEST_CASE("six ROIs in fixed order") {
  const auto rois = locate_rois(testutil::face_landmarks());
  REQUIRE(rois.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(rois[i].kind == kRoiKinds[i]);
  const auto& cheek = spec(rois, RoiKind::cheek).rect;
  const auto& mouth = spec(rois, RoiKind::mouth).unclamped;
  CHECK(cheek.bottom() <= mouth.y + 0.3 * mouth.h + 1e-12);
  CHECK(cheek.y >= spec(rois, RoiKind::left_eye_bottom).rect.bottom() - 1e-12);
}

TEST_CASE("border landmarks are clamped into the unit square") {
  auto l = testutil::face_landmarks(-0.3, 0.2);
  for (auto& p : l.points) {
    p.x = std::clamp(p.x, 0.0, 1.0);
    p.y = std::clamp(p.y, 0.0, 1.0);
  }
  for (const auto& r : locate_rois(l)) {
    CHECK(r.rect.x >= 0.0);
    CHECK(r.rect.y >= 0.0);
    CHECK(r.rect.right() <= 1.0);
    CHECK(r.rect.bottom() <= 1.0);
    CHECK(r.rect.w > 0.0);
    CHECK(r.rect.h > 0.0);
  }
}

TEST_CASE("mirror symmetric face gives mirrored eye ROIs") {
  auto l = testutil::face_landmarks();
  const auto lr = landmark_range(LandmarkGroup::left_eye);
  const auto rr = landmark_range(LandmarkGroup::right_eye);
  Rng rng(9);
  for (std::size_t i = 0; i < lr.count; ++i) {
    l.points[lr.first + i] = {0.25 + 0.15 * rng.uniform(), 0.35 + 0.1 * rng.uniform()};
    l.points[rr.first + i] = {1.0 - l.points[lr.first + i].x, l.points[lr.first + i].y};
  }
  const auto rois = locate_rois(l);
  for (auto [a, b] : {std::pair{RoiKind::left_eye, RoiKind::right_eye},
                      std::pair{RoiKind::left_eye_bottom, RoiKind::right_eye_bottom}}) {
    const auto& le = spec(rois, a).rect;
    const auto& re = spec(rois, b).rect;
    CHECK(std::abs(le.x - (1.0 - re.right())) < 1e-12);
    CHECK(std::abs(le.w - re.w) < 1e-12);
    CHECK(std::abs(le.y - re.y) < 1e-12);
    CHECK(std::abs(le.h - re.h) < 1e-12);
  }
}

TEST_CASE("unclamped ROIs are translation equivariant") {
  Rng rng(21);
  const auto base = locate_rois(testutil::face_landmarks());
  for (int t = 0; t < 50; ++t) {
    const double dx = rng.uniform() * 0.2 - 0.1;
    const double dy = rng.uniform() * 0.1 - 0.05;
    const auto moved = locate_rois(testutil::face_landmarks(dx, dy));
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(moved[i].unclamped.x == doctest::Approx(base[i].unclamped.x + dx).epsilon(1e-12));
      CHECK(moved[i].unclamped.y == doctest::Approx(base[i].unclamped.y + dy).epsilon(1e-12));
      CHECK(moved[i].unclamped.w == doctest::Approx(base[i].unclamped.w).epsilon(1e-12));
      CHECK(moved[i].unclamped.h == doctest::Approx(base[i].unclamped.h).epsilon(1e-12));
    }
  }
}

TEST_CASE("cheek side variants") {
  const auto l = testutil::face_landmarks();
  MarginConfig m;
  m.cheek_side = CheekSide::left;
  const auto left = spec(locate_rois(l, m), RoiKind::cheek).rect;
  m.cheek_side = CheekSide::right;
  const auto right = spec(locate_rois(l, m), RoiKind::cheek).rect;
  m.cheek_side = CheekSide::full;
  const auto full = spec(locate_rois(l, m), RoiKind::cheek).rect;
  CHECK(left.x == doctest::Approx(0.35));
  CHECK(left.right() == doctest::Approx(0.5));
  CHECK(right.x == doctest::Approx(0.5));
  CHECK(full.w == doctest::Approx(left.w + right.w));
}

TEST_CASE("zero-area eye is an error naming the ROI") {
  auto l = testutil::face_landmarks();
  const auto r = landmark_range(LandmarkGroup::right_eye);
  for (std::size_t i = 0; i < r.count; ++i) l.points[r.first + i] = {0.6, 0.4};
  try {
    locate_rois(l);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::degenerate);
    CHECK(std::string(e.what()).find("right_eye") != std::string::npos);
  }
}

TEST_CASE("cue coverage table") {
  CHECK(cues_for(DescriptorKind::eye) ==
        std::vector<Cue>{Cue::hanging_eyelids, Cue::red_eyes, Cue::swollen_eyes, Cue::glazed_eyes, Cue::wrinkles});
  CHECK(cues_for(DescriptorKind::eye_bottom) == std::vector<Cue>{Cue::dark_circles});
  CHECK(cues_for(DescriptorKind::cheek) == std::vector<Cue>{Cue::pale_skin});
  CHECK(cues_for(DescriptorKind::mouth) == std::vector<Cue>{Cue::droopy_corner_mouth});
  std::size_t covered = 0;
  for (auto k : kDescriptorKinds) {
    for (auto c : cues_for(k)) {
      CHECK(descriptor_for(c) == k);
      ++covered;
    }
  }
  CHECK(covered == kCueCount);
}

TEST_CASE("toy backend features") {
  const ToyBackend toy;
  SUBCASE("dimension 24") {
    const auto fv = extract_features(gradient_image(128, 128), locate_rois(testutil::face_landmarks()), toy);
    CHECK(fv.dimension() == 24);
    CHECK(fv.base_dim == 4);
    CHECK(fv.backend_id == "toy");
  }
  SUBCASE("uniform gray") {
    const auto fv = extract_features(Image(64, 64, 3, 0.5f), locate_rois(testutil::face_landmarks()), toy);
    for (std::size_t i = 0; i < fv.values.size(); i += 4) {
      CHECK(fv.values[i] == doctest::Approx(0.5));
      CHECK(fv.values[i + 1] == doctest::Approx(0.0));
      CHECK(fv.values[i + 2] == doctest::Approx(0.5));
      CHECK(fv.values[i + 3] == doctest::Approx(0.5));
    }
  }
  SUBCASE("bit-identical reruns") {
    const auto img = gradient_image(97, 130);
    const auto rois = locate_rois(testutil::face_landmarks(0.01, -0.02));
    CHECK(extract_features(img, rois, toy) == extract_features(img, rois, toy));
  }
}

TEST_CASE("descriptor layout follows ROI order") {
  const TaggingBackend tag;
  const auto fv = extract_features(gradient_image(100, 100), locate_rois(testutil::face_landmarks()), tag);
  REQUIRE(fv.dimension() == 12);
  // the tagging backend numbers its calls; ROI order is left, right eye,
  // left, right eye-bottom, cheek, mouth
  for (std::size_t i = 0; i < 6; ++i) CHECK(fv.values[2 * i] == static_cast<double>(i));
  CHECK(fv.descriptor(DescriptorKind::eye) == std::vector<double>(fv.values.begin(), fv.values.begin() + 4));
  CHECK(fv.descriptor(DescriptorKind::eye_bottom) == std::vector<double>(fv.values.begin() + 4, fv.values.begin() + 8));
  CHECK(fv.descriptor(DescriptorKind::cheek) == std::vector<double>(fv.values.begin() + 8, fv.values.begin() + 10));
  CHECK(fv.descriptor(DescriptorKind::mouth) == std::vector<double>(fv.values.begin() + 10, fv.values.end()));
}

TEST_CASE("backend failure names the ROI") {
  try {
    extract_features(gradient_image(64, 64), locate_rois(testutil::face_landmarks()), FailingBackend{});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::backend);
    CHECK(std::string(e.what()).find("left_eye") != std::string::npos);
  }
}

TEST_CASE("tiny crops are rejected") {
  CHECK_THROWS_AS(extract_features(gradient_image(6, 6), locate_rois(testutil::face_landmarks()), ToyBackend{}),
                  Error);
}

TEST_CASE("pixel window rounding") {
  const auto p = to_pixels({0.25, 0.1, 0.5, 0.3}, 10, 10);
  CHECK(p.x0 == 2);
  CHECK(p.x1 == 8);
  CHECK(p.y0 == 1);
  CHECK(p.y1 == 4);
}

TEST_CASE("descriptor files") {
  DescriptorFile f;
  f.backend_id = "toy";
  f.base_dim = 4;
  f.total_dim = 24;
  Rng rng(4);
  for (int r = 0; r < 3; ++r) {
    std::vector<double> v(24);
    for (auto& x : v) x = rng.normal() * 1e3;
    f.rows.emplace_back("face" + std::to_string(r), v);
  }
  SUBCASE("binary and csv round trips are exact") {
    for (auto fmt : {DescriptorFormat::binary, DescriptorFormat::csv}) {
      CHECK(decode_descriptor_file(encode_descriptor_file(f, fmt), fmt) == f);
    }
    const auto path = temp_path("rt.bin");
    write_descriptor_file(path, f);
    CHECK(read_descriptor_file(path) == f);
    CHECK(load_precomputed(path).size() == 3);
    std::filesystem::remove(path);
  }
  SUBCASE("single row of 24 values") {
    std::string csv = "backend_id,base_dim,total_dim\ntoy,4,24\nonly";
    for (int i = 0; i < 24; ++i) csv += "," + std::to_string(i);
    const auto path = temp_path("one.csv");
    std::ofstream(path) << csv << "\n";
    const auto m = load_precomputed(path);
    CHECK(m.size() == 1);
    CHECK(m.at("only").dimension() == 24);
    std::filesystem::remove(path);
  }
  SUBCASE("row with 23 values names the row") {
    std::string csv = "backend_id,base_dim,total_dim\ntoy,4,24\nshort_row";
    for (int i = 0; i < 23; ++i) csv += "," + std::to_string(i);
    try {
      decode_descriptor_file(csv + "\n", DescriptorFormat::csv);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("short_row") != std::string::npos);
    }
  }
  SUBCASE("unknown backend") {
    try {
      decode_descriptor_file("backend_id,base_dim,total_dim\nvgg16,4,24\n", DescriptorFormat::csv);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.category() == ErrorCategory::validation);
    }
    CHECK_FALSE(is_known_backend_id("vgg16"));
    CHECK(is_known_backend_id("ext:vgg16"));
  }
  SUBCASE("truncated binary") {
    auto bytes = encode_descriptor_file(f, DescriptorFormat::binary);
    bytes.resize(bytes.size() - 3);
    CHECK_THROWS_AS(decode_descriptor_file(bytes, DescriptorFormat::binary), Error);
  }
}

TEST_CASE("netpbm io") {
  const auto path = temp_path("img.pgm");
  const auto img = gradient_image(17, 9);
  save_pgm(path, img);
  const auto back = load_netpbm(path);
  CHECK(back.width() == 17);
  CHECK(back.height() == 9);
  CHECK(back.channels() == 1);
  for (std::size_t y = 0; y < 9; ++y) {
    for (std::size_t x = 0; x < 17; ++x) CHECK(back.at(x, y, 0) == doctest::Approx(img.at(x, y, 0)).epsilon(1e-6));
  }
  std::ofstream(path) << "P3\n# comment\n2 1\n65535\n65535 0 0  0 32768 65535\n";
  const auto ppm = load_netpbm(path);
  CHECK(ppm.channels() == 3);
  CHECK(ppm.at(0, 0, 0) == doctest::Approx(1.0));
  CHECK(ppm.at(1, 0, 2) == doctest::Approx(1.0));
  std::ofstream(path) << "P7\n";
  CHECK_THROWS_AS(load_netpbm(path), Error);
  std::filesystem::remove(path);
}

TEST_CASE("bilinear resize keeps constants and corners") {
  const Image flat(20, 30, 1, 0.25f);
  const auto r = resize_bilinear(flat, 7, 5);
  for (float v : r.pixels()) CHECK(v == doctest::Approx(0.25f));
  Image two(2, 1, 1);
  two.at(1, 0, 0) = 1.0f;
  const auto up = resize_bilinear(two, 4, 1);
  CHECK(up.at(0, 0, 0) == doctest::Approx(0.0f));
  CHECK(up.at(1, 0, 0) == doctest::Approx(0.25f));
  CHECK(up.at(2, 0, 0) == doctest::Approx(0.75f));
  CHECK(up.at(3, 0, 0) == doctest::Approx(1.0f));
}
