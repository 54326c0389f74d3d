#include "fatiguescope/roi.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "fatiguescope/error.hpp"

namespace fatiguescope::roi {

std::string_view to_string(RoiKind kind) {
  switch (kind) {
    case RoiKind::left_eye: return "left_eye";
    case RoiKind::right_eye: return "right_eye";
    case RoiKind::left_eye_bottom: return "left_eye_bottom";
    case RoiKind::right_eye_bottom: return "right_eye_bottom";
    case RoiKind::cheek: return "cheek";
    case RoiKind::mouth: return "mouth";
  }
  return "";
}

std::string_view to_string(DescriptorKind kind) {
  switch (kind) {
    case DescriptorKind::eye: return "eye";
    case DescriptorKind::eye_bottom: return "eye_bottom";
    case DescriptorKind::cheek: return "cheek";
    case DescriptorKind::mouth: return "mouth";
  }
  return "";
}

std::size_t roi_multiplicity(DescriptorKind kind) {
  return kind == DescriptorKind::eye || kind == DescriptorKind::eye_bottom ? 2 : 1;
}

std::vector<Cue> cues_for(DescriptorKind kind) {
  switch (kind) {
    case DescriptorKind::eye:
      return {Cue::hanging_eyelids, Cue::red_eyes, Cue::swollen_eyes, Cue::glazed_eyes, Cue::wrinkles};
    case DescriptorKind::eye_bottom: return {Cue::dark_circles};
    case DescriptorKind::cheek: return {Cue::pale_skin};
    case DescriptorKind::mouth: return {Cue::droopy_corner_mouth};
  }
  return {};
}

DescriptorKind descriptor_for(Cue cue) {
  for (auto kind : kDescriptorKinds) {
    const auto cues = cues_for(kind);
    if (std::find(cues.begin(), cues.end(), cue) != cues.end()) return kind;
  }
  throw Error(ErrorCategory::internal, "cue without descriptor");
}

namespace {

struct Box {
  double x0, y0, x1, y1;
  double w() const { return x1 - x0; }
  double h() const { return y1 - y0; }
  double cx() const { return (x0 + x1) / 2.0; }
};

Box bounds(const std::vector<Point2>& pts) {
  Box b{pts.front().x, pts.front().y, pts.front().x, pts.front().y};
  for (const auto& p : pts) {
    b.x0 = std::min(b.x0, p.x);
    b.y0 = std::min(b.y0, p.y);
    b.x1 = std::max(b.x1, p.x);
    b.y1 = std::max(b.y1, p.y);
  }
  return b;
}

Box grow(const Box& b, double margin) {
  return {b.x0 - margin * b.w(), b.y0 - margin * b.h(), b.x1 + margin * b.w(), b.y1 + margin * b.h()};
}

RoiSpec make_spec(RoiKind kind, const Box& b) {
  if (!(b.w() > 0.0) || !(b.h() > 0.0)) {
    throw Error(ErrorCategory::degenerate, "degenerate geometry for ROI " + std::string(to_string(kind)));
  }
  RoiSpec s;
  s.kind = kind;
  s.unclamped = {b.x0, b.y0, b.w(), b.h()};
  const double x0 = std::clamp(b.x0, 0.0, 1.0);
  const double y0 = std::clamp(b.y0, 0.0, 1.0);
  const double x1 = std::clamp(b.x1, 0.0, 1.0);
  const double y1 = std::clamp(b.y1, 0.0, 1.0);
  if (!(x1 > x0) || !(y1 > y0)) {
    throw Error(ErrorCategory::degenerate, "ROI " + std::string(to_string(kind)) + " lies outside the image");
  }
  s.rect = {x0, y0, x1 - x0, y1 - y0};
  return s;
}

Box eye_box(const LandmarkSet& l, LandmarkGroup g, RoiKind kind) {
  const Box b = bounds(l.group(g));
  if (!(b.w() > 0.0) || !(b.h() > 0.0)) {
    throw Error(ErrorCategory::degenerate, "zero-area eye landmarks for ROI " + std::string(to_string(kind)));
  }
  return b;
}

}  // namespace

std::vector<RoiSpec> locate_rois(const LandmarkSet& landmarks, const MarginConfig& margins) {
  if (landmarks.points.size() != kLandmarkCount) {
    throw Error(ErrorCategory::validation, "locate_rois needs 83 landmarks");
  }
  const Box left = eye_box(landmarks, LandmarkGroup::left_eye, RoiKind::left_eye);
  const Box right = eye_box(landmarks, LandmarkGroup::right_eye, RoiKind::right_eye);
  const Box left_roi = grow(left, margins.eye_margin);
  const Box right_roi = grow(right, margins.eye_margin);
  const Box left_bottom{left_roi.x0, left.y1, left_roi.x1, left.y1 + margins.eye_bottom_height * left.h()};
  const Box right_bottom{right_roi.x0, right.y1, right_roi.x1, right.y1 + margins.eye_bottom_height * right.h()};

  const Box mouth = bounds(landmarks.group(LandmarkGroup::mouth));
  const double cheek_top = std::max(left_bottom.y1, right_bottom.y1);
  const double lcx = left.cx();
  const double rcx = right.cx();
  const double mid = (lcx + rcx) / 2.0;
  Box cheek{std::min(lcx, rcx), cheek_top, std::max(lcx, rcx), mouth.y0};
  if (margins.cheek_side == CheekSide::left) {
    cheek.x0 = std::min(lcx, mid);
    cheek.x1 = std::max(lcx, mid);
  } else if (margins.cheek_side == CheekSide::right) {
    cheek.x0 = std::min(rcx, mid);
    cheek.x1 = std::max(rcx, mid);
  }

  return {make_spec(RoiKind::left_eye, left_roi),
          make_spec(RoiKind::right_eye, right_roi),
          make_spec(RoiKind::left_eye_bottom, left_bottom),
          make_spec(RoiKind::right_eye_bottom, right_bottom),
          make_spec(RoiKind::cheek, cheek),
          make_spec(RoiKind::mouth, grow(mouth, margins.mouth_margin))};
}

std::vector<double> FeatureVector::descriptor(DescriptorKind kind) const {
  std::size_t offset = 0;
  for (auto k : kDescriptorKinds) {
    const std::size_t len = base_dim * roi_multiplicity(k);
    if (k == kind) {
      if (offset + len > values.size()) throw Error(ErrorCategory::validation, "feature vector too short");
      return {values.begin() + static_cast<std::ptrdiff_t>(offset),
              values.begin() + static_cast<std::ptrdiff_t>(offset + len)};
    }
    offset += len;
  }
  return {};
}

std::vector<double> ToyBackend::describe(const Image& crop) const {
  const std::size_t n = crop.width() * crop.height();
  if (n == 0) throw Error(ErrorCategory::backend, "toy backend: empty crop");
  std::vector<double> intensity(n);
  for (std::size_t y = 0; y < crop.height(); ++y) {
    for (std::size_t x = 0; x < crop.width(); ++x) {
      double s = 0.0;
      for (std::size_t c = 0; c < crop.channels(); ++c) s += crop.at(x, y, c);
      intensity[y * crop.width() + x] = s / static_cast<double>(crop.channels());
    }
  }
  double sum = 0.0;
  double lo = intensity.front();
  double hi = intensity.front();
  for (double v : intensity) {
    sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : intensity) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(n)), lo, hi};
}

PixelRect to_pixels(const Rect& rect, std::size_t width, std::size_t height) {
  // The 1e-9 slack keeps float noise (0.3 * 100 = 30.000000000000004) from
  // adding a pixel row or column.
  auto lo = [](double v, std::size_t size) {
    return static_cast<std::size_t>(std::clamp(std::floor(v * static_cast<double>(size) + 1e-9), 0.0,
                                               static_cast<double>(size)));
  };
  auto hi = [](double v, std::size_t size) {
    return static_cast<std::size_t>(std::clamp(std::ceil(v * static_cast<double>(size) - 1e-9), 0.0,
                                               static_cast<double>(size)));
  };
  return {lo(rect.x, width), lo(rect.y, height), hi(rect.right(), width), hi(rect.bottom(), height)};
}

FeatureVector extract_features(const Image& image, const std::vector<RoiSpec>& rois,
                               const DescriptorBackend& backend) {
  if (image.empty()) throw Error(ErrorCategory::validation, "extract_features on an empty image");
  auto find = [&](RoiKind kind) -> const RoiSpec& {
    for (const auto& r : rois) {
      if (r.kind == kind) return r;
    }
    throw Error(ErrorCategory::validation, "missing ROI " + std::string(to_string(kind)));
  };
  auto describe = [&](RoiKind kind) {
    const auto px = to_pixels(find(kind).rect, image.width(), image.height());
    if (px.x1 < px.x0 + 2 || px.y1 < px.y0 + 2) {
      throw Error(ErrorCategory::degenerate,
                  "crop for ROI " + std::string(to_string(kind)) + " is smaller than 2x2 pixels");
    }
    const auto resized = resize_bilinear(crop(image, px), backend.input_width(), backend.input_height());
    std::vector<double> d;
    try {
      d = backend.describe(resized);
    } catch (const std::exception& e) {
      throw Error(ErrorCategory::backend,
                  "backend " + backend.id() + " failed on ROI " + std::string(to_string(kind)) + ": " + e.what());
    }
    if (d.size() != backend.dimension()) {
      throw Error(ErrorCategory::backend, "backend " + backend.id() + " returned " + std::to_string(d.size()) +
                                              " values for ROI " + std::string(to_string(kind)));
    }
    for (double v : d) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCategory::backend, "backend " + backend.id() + " produced a non-finite value for ROI " +
                                                std::string(to_string(kind)));
      }
    }
    return d;
  };

  FeatureVector fv;
  fv.backend_id = backend.id();
  fv.base_dim = backend.dimension();
  fv.values.reserve(6 * fv.base_dim);
  for (auto kind : kRoiKinds) {
    const auto d = describe(kind);
    fv.values.insert(fv.values.end(), d.begin(), d.end());
  }
  return fv;
}

// ----------------------------------------------------------------------------
// Descriptor files

bool is_known_backend_id(std::string_view id) {
  return id == "toy" || (id.size() > 4 && id.substr(0, 4) == "ext:");
}

DescriptorFormat format_for(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? DescriptorFormat::csv : DescriptorFormat::binary;
}

std::map<std::string, FeatureVector> DescriptorFile::to_map() const {
  std::map<std::string, FeatureVector> out;
  for (const auto& [id, values] : rows) out[id] = FeatureVector{values, backend_id, base_dim};
  return out;
}

namespace {

constexpr char kMagic[4] = {'F', 'S', 'D', 'F'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_str(std::string& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

class ByteReader {
 public:
  explicit ByteReader(const std::string& data) : data_(data) {}
  std::uint64_t uint(int bytes) {
    need(static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
      v |= std::uint64_t{static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)])} << (8 * i);
    }
    pos_ += static_cast<std::size_t>(bytes);
    return v;
  }
  std::string str() {
    const auto len = static_cast<std::size_t>(uint(4));
    need(len);
    std::string s = data_.substr(pos_, len);
    pos_ += len;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw Error(ErrorCategory::parse, "descriptor file truncated");
  }
  const std::string& data_;
  std::size_t pos_ = 0;
};

void check_header(const DescriptorFile& f) {
  if (!is_known_backend_id(f.backend_id)) {
    throw Error(ErrorCategory::validation, "unknown descriptor backend id '" + f.backend_id + "'");
  }
  if (f.base_dim == 0 || f.total_dim != 6 * f.base_dim) {
    throw Error(ErrorCategory::parse, "descriptor header: total_dim " + std::to_string(f.total_dim) +
                                          " is not 6 x base_dim " + std::to_string(f.base_dim));
  }
}

std::string row_name(std::size_t index, const std::string& id) {
  return "row " + std::to_string(index + 1) + " (face " + id + ")";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorCategory::parse, where + ": bad value '" + s + "'");
  }
  return v;
}

}  // namespace

std::string encode_descriptor_file(const DescriptorFile& file, DescriptorFormat format) {
  check_header(file);
  std::string out;
  if (format == DescriptorFormat::binary) {
    out.append(kMagic, 4);
    put_u32(out, kVersion);
    put_str(out, file.backend_id);
    put_u32(out, static_cast<std::uint32_t>(file.base_dim));
    put_u32(out, static_cast<std::uint32_t>(file.total_dim));
    put_u64(out, file.rows.size());
    for (std::size_t r = 0; r < file.rows.size(); ++r) {
      const auto& [id, values] = file.rows[r];
      if (values.size() != file.total_dim) {
        throw Error(ErrorCategory::validation, row_name(r, id) + " has the wrong dimension");
      }
      put_str(out, id);
      for (double v : values) put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
    return out;
  }
  std::ostringstream os;
  os << "backend_id,base_dim,total_dim\n" << file.backend_id << ',' << file.base_dim << ',' << file.total_dim << '\n';
  char buf[40];
  for (std::size_t r = 0; r < file.rows.size(); ++r) {
    const auto& [id, values] = file.rows[r];
    if (values.size() != file.total_dim) {
      throw Error(ErrorCategory::validation, row_name(r, id) + " has the wrong dimension");
    }
    os << id;
    for (double v : values) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << ',' << buf;
    }
    os << '\n';
  }
  return os.str();
}

DescriptorFile decode_descriptor_file(const std::string& bytes, DescriptorFormat format) {
  DescriptorFile f;
  if (format == DescriptorFormat::binary) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
      throw Error(ErrorCategory::parse, "not a binary descriptor file");
    }
    ByteReader in(bytes);
    in.uint(4);
    if (in.uint(4) != kVersion) throw Error(ErrorCategory::parse, "unsupported descriptor file version");
    f.backend_id = in.str();
    f.base_dim = static_cast<std::size_t>(in.uint(4));
    f.total_dim = static_cast<std::size_t>(in.uint(4));
    check_header(f);
    const auto rows = in.uint(8);
    for (std::uint64_t r = 0; r < rows; ++r) {
      std::string id = in.str();
      std::vector<double> values(f.total_dim);
      for (auto& v : values) v = std::bit_cast<double>(in.uint(8));
      f.rows.emplace_back(std::move(id), std::move(values));
    }
    if (!in.done()) throw Error(ErrorCategory::parse, "trailing bytes after the last descriptor row");
    return f;
  }

  std::istringstream is(bytes);
  std::string line;
  if (!std::getline(is, line) || line != "backend_id,base_dim,total_dim") {
    throw Error(ErrorCategory::parse, "descriptor CSV: missing header");
  }
  if (!std::getline(is, line)) throw Error(ErrorCategory::parse, "descriptor CSV: missing header values");
  const auto head = split_csv(line);
  if (head.size() != 3) throw Error(ErrorCategory::parse, "descriptor CSV: malformed header values");
  f.backend_id = head[0];
  try {
    f.base_dim = std::stoul(head[1]);
    f.total_dim = std::stoul(head[2]);
  } catch (const std::exception&) {
    throw Error(ErrorCategory::parse, "descriptor CSV: non-numeric dimensions");
  }
  check_header(f);
  std::size_t r = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    const std::string where = row_name(r, cells.empty() ? "" : cells[0]);
    if (cells.size() != f.total_dim + 1) {
      throw Error(ErrorCategory::parse, "dimension mismatch at " + where + ": expected " +
                                            std::to_string(f.total_dim) + " values, got " +
                                            std::to_string(cells.size() - 1));
    }
    std::vector<double> values;
    values.reserve(f.total_dim);
    for (std::size_t c = 1; c < cells.size(); ++c) values.push_back(parse_double(cells[c], where));
    f.rows.emplace_back(cells[0], std::move(values));
    ++r;
  }
  return f;
}

DescriptorFile read_descriptor_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::io, "cannot open descriptor file " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_descriptor_file(bytes, format_for(path));
}

void write_descriptor_file(const std::filesystem::path& path, const DescriptorFile& file) {
  const auto bytes = encode_descriptor_file(file, format_for(path));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCategory::io, "cannot write descriptor file " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCategory::io, "write failed for " + path.string());
}

std::map<std::string, FeatureVector> load_precomputed(const std::filesystem::path& path) {
  return read_descriptor_file(path).to_map();
}

}  // namespace fatiguescope::roi
