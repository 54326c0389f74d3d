#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "fatiguescope/core.hpp"
#include "fatiguescope/image.hpp"

namespace fatiguescope::roi {

enum class RoiKind { left_eye, right_eye, left_eye_bottom, right_eye_bottom, cheek, mouth };
inline constexpr std::array<RoiKind, 6> kRoiKinds = {RoiKind::left_eye,        RoiKind::right_eye,
                                                     RoiKind::left_eye_bottom, RoiKind::right_eye_bottom,
                                                     RoiKind::cheek,           RoiKind::mouth};
std::string_view to_string(RoiKind kind);

// Descriptor kinds after pairing left and right.
enum class DescriptorKind { eye, eye_bottom, cheek, mouth };
inline constexpr std::array<DescriptorKind, 4> kDescriptorKinds = {
    DescriptorKind::eye, DescriptorKind::eye_bottom, DescriptorKind::cheek, DescriptorKind::mouth};
std::string_view to_string(DescriptorKind kind);
std::size_t roi_multiplicity(DescriptorKind kind);  // 2 for eye / eye_bottom

// Which cues each descriptor is meant to capture.
std::vector<Cue> cues_for(DescriptorKind kind);
DescriptorKind descriptor_for(Cue cue);

// Normalized rectangle, origin top-left.
struct Rect {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  double right() const { return x + w; }
  double bottom() const { return y + h; }
  bool operator==(const Rect&) const = default;
};

struct RoiSpec {
  RoiKind kind = RoiKind::left_eye;
  Rect rect;       // clamped to the unit square
  Rect unclamped;  // geometry before clamping
};

enum class CheekSide { left, right, full };

// Eye ROI: eye bbox grown by eye_margin x its size on every side. Eye-bottom
// ROI: as wide as the eye ROI, starting at the eye bbox bottom, eye_bottom_height
// x eye bbox height tall. Cheek: below the lower eye-bottom edge down to the
// top of the mouth, horizontally between the two eye centers; `left` keeps the
// half from the left eye center to the midline. Mouth: mouth bbox grown by
// mouth_margin. Left means image left.
struct MarginConfig {
  double eye_margin = 0.5;
  double eye_bottom_height = 1.0;
  double mouth_margin = 0.3;
  CheekSide cheek_side = CheekSide::left;
};

// Exactly six specs in kRoiKinds order. Throws Error(degenerate) naming the
// ROI when its geometry has zero area.
std::vector<RoiSpec> locate_rois(const LandmarkSet& landmarks, const MarginConfig& margins = {});

struct FeatureDescriptor {
  DescriptorKind kind = DescriptorKind::eye;
  std::vector<double> values;
};

struct FeatureVector {
  std::vector<double> values;  // eye, eye_bottom, cheek, mouth
  std::string backend_id;
  std::size_t base_dim = 0;

  std::size_t dimension() const { return values.size(); }
  // Slice for one descriptor kind under the fixed layout.
  std::vector<double> descriptor(DescriptorKind kind) const;
  bool operator==(const FeatureVector&) const = default;
};

// A pure function from a resized crop to a fixed-length vector.
class DescriptorBackend {
 public:
  virtual ~DescriptorBackend() = default;
  virtual std::string id() const = 0;
  virtual std::size_t input_width() const = 0;
  virtual std::size_t input_height() const = 0;
  virtual std::size_t dimension() const = 0;
  // False when calls must be serialized by the caller.
  virtual bool thread_safe() const { return true; }
  virtual std::vector<double> describe(const Image& crop) const = 0;
};

// Mean, population standard deviation, minimum and maximum of pixel intensity
// (the channel average) over the resized crop.
class ToyBackend final : public DescriptorBackend {
 public:
  explicit ToyBackend(std::size_t input_size = 32) : size_(input_size) {}
  std::string id() const override { return "toy"; }
  std::size_t input_width() const override { return size_; }
  std::size_t input_height() const override { return size_; }
  std::size_t dimension() const override { return 4; }
  std::vector<double> describe(const Image& crop) const override;

 private:
  std::size_t size_;
};

// Pixel window of a normalized rect: floor on the low edge, ceil on the high
// edge, clipped to the image.
PixelRect to_pixels(const Rect& rect, std::size_t width, std::size_t height);

// Crops every ROI, resizes it to the backend input size and concatenates the
// descriptors as eye(left, right), eye_bottom(left, right), cheek, mouth.
// Throws Error(degenerate) for a crop under 2x2 pixels and Error(backend)
// naming the ROI when the backend fails.
FeatureVector extract_features(const Image& image, const std::vector<RoiSpec>& rois,
                               const DescriptorBackend& backend);

// Descriptor files. Binary (little-endian):
//   "FSDF" u32 version=1, u32 len + backend_id, u32 base_dim, u32 total_dim,
//   u64 rows, then per row: u32 len + face_id, total_dim x f64.
// CSV: "backend_id,base_dim,total_dim" header, "<id>,<base>,<total>" line,
//   then "face_id,v1,...,vN" rows with round-trip precision.
struct DescriptorFile {
  std::string backend_id;
  std::size_t base_dim = 0;
  std::size_t total_dim = 0;
  std::vector<std::pair<std::string, std::vector<double>>> rows;  // file order

  std::map<std::string, FeatureVector> to_map() const;
  bool operator==(const DescriptorFile&) const = default;
};

// "toy" and ids under the "ext:" namespace (external extractors).
bool is_known_backend_id(std::string_view id);

enum class DescriptorFormat { binary, csv };
DescriptorFormat format_for(const std::filesystem::path& path);  // .csv -> csv

// Throws Error(parse) on a header/row dimension mismatch (naming the row)
// and Error(validation) for an unknown backend id.
DescriptorFile read_descriptor_file(const std::filesystem::path& path);
void write_descriptor_file(const std::filesystem::path& path, const DescriptorFile& file);
std::string encode_descriptor_file(const DescriptorFile& file, DescriptorFormat format);
DescriptorFile decode_descriptor_file(const std::string& bytes, DescriptorFormat format);

std::map<std::string, FeatureVector> load_precomputed(const std::filesystem::path& path);

}  // namespace fatiguescope::roi
