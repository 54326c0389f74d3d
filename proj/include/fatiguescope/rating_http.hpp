#pragma once

#include <string>

#include "fatiguescope/rating.hpp"

namespace httplib {
class Server;
}

namespace fatiguescope::rating {

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Transport-independent router for the rating JSON API:
//   POST /sessions                 {rater_id, seed} -> {session_id}
//   GET  /sessions/{id}/next       face bundle or {status: "complete"}
//   POST /sessions/{id}/ratings    {face_id, cues: {...}} -> ack | {error: {cue, reason}}
//   POST /sessions/{id}/skip       {face_id} (only with allow_skip)
//   GET  /sessions/{id}/progress   {cursor, total}
//   GET  /images/{face_id}/{n}     image bytes (0 = primary)
class RatingApi {
 public:
  explicit RatingApi(RatingService& service) : service_(service) {}
  HttpResponse handle(const std::string& method, const std::string& path, const std::string& body);

 private:
  RatingService& service_;
};

// Routes every API path of `api` on `server`.
void mount(httplib::Server& server, RatingApi& api);

// Blocks serving on host:port until the process is interrupted.
void serve(RatingApi& api, const std::string& host, int port);

}  // namespace fatiguescope::rating
