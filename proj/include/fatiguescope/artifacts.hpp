#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace fatiguescope {

inline constexpr std::string_view kVersion = "0.3.1";

std::string read_file(const std::filesystem::path& path);  // Error(io)

// Writes to a sibling temp file and renames over `path`. Parent directories
// are created.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// Hex SHA-256.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

// manifest.json written next to a stage's outputs. Only `created_at` varies
// between identical runs.
class Manifest {
 public:
  Manifest(std::string subcommand, nlohmann::json config);

  void add_input(const std::string& role, const std::filesystem::path& path);
  // `recorded_as` replaces the stored path, e.g. a name relative to the
  // manifest's own directory.
  void add_output(const std::string& role, const std::filesystem::path& path,
                  const std::optional<std::string>& recorded_as = std::nullopt);
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  nlohmann::json to_json(std::int64_t created_at) const;
  void write(const std::filesystem::path& path) const;  // stamps the current time

 private:
  struct Entry {
    std::string role;
    std::string path;
    std::string sha256;
    std::uintmax_t bytes = 0;
  };
  static Entry describe(const std::string& role, const std::filesystem::path& path);

  std::string subcommand_;
  nlohmann::json config_;
  std::optional<std::uint64_t> seed_;
  std::vector<Entry> inputs_;
  std::vector<Entry> outputs_;
};

// face_id -> fatigue_label from a labels CSV (needs face_id and fatigue_label
// columns).
std::map<std::string, double> read_labels_csv(const std::filesystem::path& path);

// "face_id,fatigue_rate" rows in the given order, round-trip precision.
std::string predictions_csv(const std::vector<std::pair<std::string, double>>& rows);
std::map<std::string, double> read_predictions_csv(const std::filesystem::path& path);

}  // namespace fatiguescope
