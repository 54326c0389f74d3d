#include "fatiguescope/rating_http.hpp"

#include <httplib.h>

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "fatiguescope/json_io.hpp"

namespace fatiguescope::rating {

using nlohmann::json;

namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  const auto end = path.find('?');
  for (char c : path.substr(0, end)) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

HttpResponse reply(int status, const json& body) { return {status, body.dump(), "application/json"}; }

HttpResponse error_reply(int status, const std::string& reason, const std::string& message,
                         const std::optional<Cue>& cue = std::nullopt) {
  json err{{"reason", reason}, {"message", message}};
  if (cue) err["cue"] = std::string(to_string(*cue));
  return reply(status, json{{"error", err}});
}

int status_for(const std::string& reason) {
  if (reason == "unknown_session" || reason == "unknown_face") return 404;
  if (reason == "out_of_order" || reason == "conflict" || reason == "complete" || reason == "duplicate_rater") {
    return 409;
  }
  if (reason == "skip_disabled") return 403;
  if (reason == "empty_face_set") return 422;
  return 400;
}

json parse_body(const std::string& body) {
  try {
    auto j = json::parse(body);
    if (!j.is_object()) throw RatingError("bad_request", "request body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw RatingError("bad_request", std::string("malformed JSON body: ") + e.what());
  }
}

std::string required_string(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw RatingError("bad_request", std::string(key) + " must be a string");
  return it->get<std::string>();
}

CueRatings parse_cues(const json& j) {
  const auto it = j.find("cues");
  if (it == j.end() || !it->is_object()) throw RatingError("bad_request", "cues must be an object");
  CueRatings r;
  r.scale = CueScale::rater_0_4;
  for (auto cue : kCues) {
    const auto name = std::string(to_string(cue));
    const auto v = it->find(name);
    if (v == it->end()) throw RatingError("missing_cue", name + " is missing", cue);
    if (!v->is_number()) throw RatingError("not_integer", name + " must be an integer from 0 to 4", cue);
    r[cue] = v->get<double>();
  }
  return r;
}

std::string content_type_for(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".pgm") return "image/x-portable-graymap";
  if (ext == ".ppm") return "image/x-portable-pixmap";
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  return "application/octet-stream";
}

json bundle_json(const FaceBundle& b) {
  return {{"status", "pending"},
          {"face_id", b.face_id},
          {"primary", b.primary_ref},
          {"references", b.reference_refs},
          {"insufficient_references", b.insufficient_references},
          {"cursor", b.cursor},
          {"total", b.total}};
}

json ack_json(const Ack& a) { return {{"ok", true}, {"duplicate", a.duplicate}, {"cursor", a.cursor}}; }

}  // namespace

HttpResponse RatingApi::handle(const std::string& method, const std::string& path, const std::string& body) {
  const auto parts = split_path(path);
  try {
    if (parts.size() == 1 && parts[0] == "sessions") {
      if (method != "POST") return error_reply(405, "bad_request", "method not allowed");
      const auto j = parse_body(body);
      const auto rater = required_string(j, "rater_id");
      std::uint64_t seed = 0;
      if (const auto it = j.find("seed"); it != j.end()) {
        if (!it->is_number_unsigned()) throw RatingError("bad_request", "seed must be a non-negative integer");
        seed = it->get<std::uint64_t>();
      }
      const auto id = service_.open(rater, seed);
      const auto p = service_.progress(id);
      return reply(201, json{{"session_id", id}, {"total", p.total}});
    }
    if (parts.size() == 3 && parts[0] == "sessions") {
      const auto& id = parts[1];
      const auto& action = parts[2];
      if (action == "next" && method == "GET") {
        const auto b = service_.next(id);
        if (!b) {
          const auto p = service_.progress(id);
          return reply(200, json{{"status", "complete"}, {"cursor", p.cursor}, {"total", p.total}});
        }
        return reply(200, bundle_json(*b));
      }
      if (action == "progress" && method == "GET") {
        const auto p = service_.progress(id);
        return reply(200, json{{"cursor", p.cursor}, {"total", p.total}, {"complete", p.cursor == p.total}});
      }
      if (action == "ratings" && method == "POST") {
        const auto j = parse_body(body);
        const auto face = required_string(j, "face_id");
        const auto cues = parse_cues(j);
        return reply(200, ack_json(service_.submit(id, face, cues)));
      }
      if (action == "skip" && method == "POST") {
        const auto j = parse_body(body);
        return reply(200, ack_json(service_.skip(id, required_string(j, "face_id"))));
      }
    }
    if (parts.size() == 3 && parts[0] == "images" && method == "GET") {
      const auto* entry = service_.store().find(parts[1]);
      if (!entry) return error_reply(404, "unknown_face", "no face " + parts[1]);
      std::size_t n = 0;
      try {
        std::size_t used = 0;
        n = std::stoul(parts[2], &used);
        if (used != parts[2].size()) throw std::invalid_argument("index");
      } catch (const std::exception&) {
        return error_reply(400, "bad_request", "image index must be a non-negative integer");
      }
      if (n > entry->references.size()) return error_reply(404, "unknown_face", "no image " + parts[2]);
      const auto& file = n == 0 ? entry->primary : entry->references[n - 1];
      std::ifstream in(file, std::ios::binary);
      if (!in) return error_reply(404, "unknown_face", "image file missing for " + parts[1]);
      std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      return {200, std::move(bytes), content_type_for(file)};
    }
    return error_reply(404, "bad_request", "no route " + method + " " + path);
  } catch (const RatingError& e) {
    return error_reply(status_for(e.reason()), e.reason(), e.what(), e.cue());
  } catch (const Error& e) {
    return error_reply(500, std::string(category_name(e.category())), e.what());
  }
}

void mount(httplib::Server& server, RatingApi& api) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  auto forward = [&api](const httplib::Request& req, httplib::Response& res) {
    const auto r = api.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type.c_str());
  };
  server.Get(R"(/.*)", forward);
  server.Post(R"(/.*)", forward);
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

void serve(RatingApi& api, const std::string& host, int port) {
  httplib::Server server;
  mount(server, api);
  if (!server.listen(host, port)) {
    throw Error(ErrorCategory::io, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

}  // namespace fatiguescope::rating
