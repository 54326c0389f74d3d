#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "fatiguescope/core.hpp"

// Canonical JSON encoding of the core types. Field names follow the type
// definitions; landmarks are an ordered array of [x, y] pairs.
namespace fatiguescope {

void to_json(nlohmann::json& j, const Point2& p);
void from_json(const nlohmann::json& j, Point2& p);
void to_json(nlohmann::json& j, const LandmarkSet& l);
void from_json(const nlohmann::json& j, LandmarkSet& l);
void to_json(nlohmann::json& j, const EyeStatus& s);
void from_json(const nlohmann::json& j, EyeStatus& s);
void to_json(nlohmann::json& j, const Demographics& d);
void from_json(const nlohmann::json& j, Demographics& d);
void to_json(nlohmann::json& j, const QualityReport& q);
void from_json(const nlohmann::json& j, QualityReport& q);
void to_json(nlohmann::json& j, const BBox& b);
void from_json(const nlohmann::json& j, BBox& b);
void to_json(nlohmann::json& j, const DetectionRecord& r);
void from_json(const nlohmann::json& j, DetectionRecord& r);
void to_json(nlohmann::json& j, const CueRatings& c);
void from_json(const nlohmann::json& j, CueRatings& c);

// One JSONL line; throws Error(parse) with the underlying reason.
DetectionRecord decode_record(std::string_view line);
std::string encode_record(const DetectionRecord& record);

}  // namespace fatiguescope
