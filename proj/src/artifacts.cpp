#include "fatiguescope/artifacts.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iterator>
#include <sstream>

#include "fatiguescope/error.hpp"
#include "fatiguescope/format.hpp"

namespace fatiguescope {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::io, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCategory::io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCategory::io, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCategory::io, "cannot rename into " + path.string() + ": " + ec.message());
  }
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCategory::internal, "sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

Manifest::Manifest(std::string subcommand, json config)
    : subcommand_(std::move(subcommand)), config_(std::move(config)) {}

Manifest::Entry Manifest::describe(const std::string& role, const fs::path& path) {
  Entry e;
  e.role = role;
  e.path = path.generic_string();
  if (fs::is_regular_file(path)) {
    const auto bytes = read_file(path);
    e.sha256 = sha256_hex(bytes);
    e.bytes = bytes.size();
  } else if (fs::is_directory(path)) {
    // directory inputs hash the sorted (name, file hash) listing
    std::vector<fs::path> files;
    for (const auto& f : fs::recursive_directory_iterator(path)) {
      if (f.is_regular_file()) files.push_back(f.path());
    }
    std::sort(files.begin(), files.end());
    std::string listing;
    for (const auto& f : files) {
      listing += fs::relative(f, path).generic_string() + " " + sha256_file(f) + "\n";
      e.bytes += fs::file_size(f);
    }
    e.sha256 = sha256_hex(listing);
  } else {
    throw Error(ErrorCategory::io, "cannot hash missing path " + path.string());
  }
  return e;
}

void Manifest::add_input(const std::string& role, const fs::path& path) { inputs_.push_back(describe(role, path)); }
void Manifest::add_output(const std::string& role, const fs::path& path, const std::optional<std::string>& recorded_as) {
  auto e = describe(role, path);
  if (recorded_as) e.path = *recorded_as;
  outputs_.push_back(std::move(e));
}

json Manifest::to_json(std::int64_t created_at) const {
  auto list = [](const std::vector<Entry>& entries) {
    json a = json::array();
    for (const auto& e : entries) {
      a.push_back({{"role", e.role}, {"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    }
    return a;
  };
  json j{{"tool", "fatiguescope"},
         {"version", kVersion},
         {"subcommand", subcommand_},
         {"hash", "sha256"},
         {"config", config_},
         {"inputs", list(inputs_)},
         {"outputs", list(outputs_)},
         {"created_at", created_at}};
  if (seed_) j["seed"] = *seed_;
  return j;
}

void Manifest::write(const fs::path& path) const {
  const auto now = std::chrono::duration_cast<std::chrono::seconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  write_atomic(path, to_json(now).dump(2) + "\n");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

double parse_number(const std::string& text, const fs::path& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCategory::parse, path.string() + " line " + std::to_string(line) + ": bad number '" + text + "'");
  }
}

std::map<std::string, double> read_keyed_column(const fs::path& path, const std::string& column) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCategory::parse, path.string() + ": empty file");
  const auto header = split_csv_line(line);
  const auto find = [&header](const std::string& name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  };
  const auto id_col = find("face_id");
  const auto val_col = find(column);
  if (id_col == header.size() || val_col == header.size()) {
    throw Error(ErrorCategory::parse, path.string() + ": header needs face_id and " + column);
  }
  std::map<std::string, double> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCategory::parse, path.string() + " line " + std::to_string(line_no) + ": wrong column count");
    }
    if (!out.emplace(cells[id_col], parse_number(cells[val_col], path, line_no)).second) {
      throw Error(ErrorCategory::parse, path.string() + ": duplicate face_id " + cells[id_col]);
    }
  }
  return out;
}

}  // namespace

std::map<std::string, double> read_labels_csv(const fs::path& path) {
  return read_keyed_column(path, "fatigue_label");
}

std::string predictions_csv(const std::vector<std::pair<std::string, double>>& rows) {
  std::string out = "face_id,fatigue_rate\n";
  for (const auto& [id, v] : rows) out += id + "," + shortest(v) + "\n";
  return out;
}

std::map<std::string, double> read_predictions_csv(const fs::path& path) {
  return read_keyed_column(path, "fatigue_rate");
}

}  // namespace fatiguescope
