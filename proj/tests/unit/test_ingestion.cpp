#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "fatiguescope/error.hpp"
#include "fatiguescope/ingestion.hpp"
#include "fatiguescope/json_io.hpp"
#include "fatiguescope/rng.hpp"
#include "helpers.hpp"

using namespace fatiguescope;
using namespace fatiguescope::ingestion;

namespace {

std::string jsonl(const std::vector<DetectionRecord>& recs) {
  std::string s;
  for (const auto& r : recs) s += encode_record(r) + "\n";
  return s;
}

std::vector<DetectionRecord> user_posts(const std::string& user, int n, int age = 30) {
  std::vector<DetectionRecord> out;
  for (int i = 0; i < n; ++i) {
    auto r = testutil::make_record(user + "_" + std::to_string(i), user, 1489363200 + 3600 * i);
    r.demographics.age = age;
    out.push_back(r);
  }
  return out;
}

IngestResult run(const std::string& text, const FilterPolicy& p) {
  std::istringstream in(text);
  return ingest_stream(in, p);
}

void check_accounting(const IngestStats& s) { CHECK(s.kept + s.rejected_total() == s.records_read); }

}  // namespace

TEST_CASE("quality_filter examples") {
  const FilterPolicy p;
  auto r = testutil::make_record("a", "u");
  r.quality = {5.0, 50.0, 80.0, 70.0};
  CHECK(quality_filter(r, p).keep);

  auto dark = r;
  dark.left_eye_status = testutil::eye(EyeStatusKind::dark_glasses);
  CHECK(quality_filter(dark, p) == FilterDecision::rejected(RejectReason::eye_status));

  auto blur = r;
  blur.quality.blur_value = 50.0;
  CHECK(quality_filter(blur, p) == FilterDecision::rejected(RejectReason::blur));

  auto fq = r;
  fq.quality.face_quality_value = 70.0;
  CHECK(quality_filter(fq, p) == FilterDecision::rejected(RejectReason::face_quality));
}

TEST_CASE("relaxing the policy never turns keep into reject") {
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    auto r = testutil::make_record("a", "u");
    r.left_eye_status = testutil::eye(kEyeStatusKinds[rng.below(5)]);
    r.right_eye_status = testutil::eye(kEyeStatusKinds[rng.below(2)]);
    r.quality = {rng.uniform() * 10, 5.0, rng.uniform() * 10, 5.0};
    FilterPolicy strict;
    FilterPolicy loose = strict;
    loose.enforce_blur = rng.below(2);
    loose.enforce_face_quality = false;
    if (quality_filter(r, strict).keep) CHECK(quality_filter(r, loose).keep);
  }
}

TEST_CASE("ingest drops users under min_posts") {
  std::vector<DetectionRecord> recs;
  for (const auto& [u, n] : std::vector<std::pair<std::string, int>>{{"a", 25}, {"b", 19}, {"c", 30}}) {
    auto p = user_posts(u, n);
    recs.insert(recs.end(), p.begin(), p.end());
  }
  const auto res = run(jsonl(recs), FilterPolicy{});
  CHECK(res.corpus.users.size() == 2);
  CHECK(res.corpus.users.count("b") == 0);
  CHECK(res.stats.rejected.at(RejectReason::min_posts) == 19);
  CHECK(res.stats.users_seen == 3);
  check_accounting(res.stats);
}

TEST_CASE("ingest of empty input") {
  const auto res = run("", FilterPolicy{});
  CHECK(res.corpus.users.empty());
  CHECK(res.stats.records_read == 0);
  CHECK(res.stats.kept == 0);
  CHECK(res.stats.rejected_total() == 0);
}

TEST_CASE("malformed line is counted and skipped") {
  FilterPolicy p;
  p.min_posts = 1;
  auto recs = user_posts("a", 9);
  auto text = jsonl(std::vector<DetectionRecord>(recs.begin(), recs.begin() + 4));
  text += "{\"face_id\": \"broken\"\n";
  text += jsonl(std::vector<DetectionRecord>(recs.begin() + 4, recs.end()));
  const auto res = run(text, p);
  CHECK(res.stats.records_read == 10);
  CHECK(res.stats.kept == 9);
  CHECK(res.stats.rejected.at(RejectReason::malformed) == 1);
  REQUIRE(res.stats.malformed.size() == 1);
  CHECK(res.stats.malformed[0].line == 5);
  check_accounting(res.stats);
}

TEST_CASE("invalid records are rejected as invalid") {
  FilterPolicy p;
  p.min_posts = 1;
  auto recs = user_posts("a", 3);
  recs[1].bbox.width = 0;
  const auto res = run(jsonl(recs), p);
  CHECK(res.stats.rejected.at(RejectReason::invalid) == 1);
  CHECK(res.stats.kept == 2);
}

TEST_CASE("min_posts counts distinct posts") {
  FilterPolicy p;
  p.min_posts = 3;
  auto recs = user_posts("a", 2);
  auto dup = recs[0];
  dup.face_id = "a_second_face";
  recs.push_back(dup);  // same post as a_0
  const auto res = run(jsonl(recs), p);
  CHECK(res.corpus.users.empty());
}

TEST_CASE("ingest is invariant to record order") {
  std::vector<DetectionRecord> recs;
  Rng rng(5);
  for (int u = 0; u < 6; ++u) {
    auto posts = user_posts("user" + std::to_string(u), 18 + u);
    for (auto& r : posts) {
      if (rng.below(4) == 0) r.quality.blur_value = 60;
      if (rng.below(6) == 0) r.right_eye_status = testutil::eye(EyeStatusKind::no_glasses_eye_close);
    }
    recs.insert(recs.end(), posts.begin(), posts.end());
  }
  FilterPolicy p;
  p.min_posts = 15;
  const auto a = run(jsonl(recs), p);
  fisher_yates_shuffle(std::span<DetectionRecord>(recs), rng);
  const auto b = run(jsonl(recs), p);
  CHECK(a.corpus.users == b.corpus.users);
  CHECK(a.stats.rejected == b.stats.rejected);
  CHECK(a.stats.kept == b.stats.kept);
  check_accounting(a.stats);
}

TEST_CASE("corpus write and read round trip") {
  FilterPolicy p;
  p.min_posts = 1;
  const auto res = run(jsonl(user_posts("a", 3)), p);
  std::ostringstream os;
  write_corpus(os, res.corpus);
  const auto back = run(os.str(), p);
  CHECK(back.corpus.users == res.corpus.users);
}

TEST_CASE("collection tags are stored") {
  CHECK(kCollectionTags.size() == 10);
  TimelineCorpus c;
  CHECK(c.collected_tags == kCollectionTags);
}

TEST_CASE("filter policy validation") {
  FilterPolicy p;
  p.min_posts = 0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("demographic histogram") {
  SUBCASE("ages 15 and 34") {
    TimelineCorpus c;
    c.users["a"] = user_posts("a", 2, 15);
    c.users["b"] = user_posts("b", 2, 34);
    const auto h = demographic_histogram(c);
    CHECK(h.age_buckets.at(1) == 1);
    CHECK(h.age_buckets.at(3) == 1);
    CHECK(h.users == 2);
  }
  SUBCASE("majority gender") {
    TimelineCorpus c;
    auto posts = user_posts("a", 3);
    posts[0].demographics.gender = Gender::male;
    posts[1].demographics.gender = Gender::male;
    posts[2].demographics.gender = Gender::female;
    c.users["a"] = posts;
    const auto h = demographic_histogram(c);
    CHECK(h.gender.at(Gender::male).count == 1);
    CHECK(h.gender.count(Gender::female) == 0);
  }
  SUBCASE("scaled gender proportions") {
    TimelineCorpus c;
    for (int i = 0; i < 95; ++i) {
      auto posts = user_posts("u" + std::to_string(i), 1);
      posts[0].demographics.gender = i < 30 ? Gender::male : Gender::female;
      c.users[posts[0].user_id] = posts;
    }
    const auto h = demographic_histogram(c);
    CHECK(h.gender.at(Gender::male).count == 30);
    CHECK(h.gender.at(Gender::female).count == 65);
  }
  SUBCASE("mean confidences") {
    TimelineCorpus c;
    auto posts = user_posts("a", 2);
    posts[0].demographics.gender_confidence = 80;
    posts[1].demographics.gender_confidence = 90;
    c.users["a"] = posts;
    CHECK(demographic_histogram(c).gender.at(Gender::female).mean_confidence == doctest::Approx(85));
  }
  SUBCASE("twenty-year view") {
    TimelineCorpus c;
    c.users["a"] = user_posts("a", 1, 15);
    c.users["b"] = user_posts("b", 1, 39);
    const auto h = demographic_histogram(c, 20);
    CHECK(h.age_buckets.at(0) == 1);
    CHECK(h.age_buckets.at(1) == 1);
  }
  SUBCASE("empty corpus") {
    CHECK_THROWS_AS(demographic_histogram(TimelineCorpus{}), Error);
  }
}
