// fatiguescope command line.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "fatiguescope/artifacts.hpp"
#include "fatiguescope/cohort.hpp"
#include "fatiguescope/ensemble.hpp"
#include "fatiguescope/error.hpp"
#include "fatiguescope/ingestion.hpp"
#include "fatiguescope/json_io.hpp"
#include "fatiguescope/pipeline.hpp"
#include "fatiguescope/rating.hpp"
#include "fatiguescope/rating_http.hpp"
#include "fatiguescope/roi.hpp"
#include "fatiguescope/tuner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fatiguescope;

namespace {

// Config document plus flag overrides; a set flag always wins.
struct Settings {
  json doc = json::object();

  const json* at(const std::string& pointer) const {
    const json::json_pointer p(pointer);
    return doc.contains(p) ? &doc.at(p) : nullptr;
  }

  template <typename T>
  T get(const std::optional<T>& flag, const std::string& pointer, T fallback) const {
    if (flag) return *flag;
    if (const auto* v = at(pointer)) {
      try {
        return v->get<T>();
      } catch (const json::exception& e) {
        throw Error(ErrorCategory::invalid_config, "config " + pointer + ": " + e.what());
      }
    }
    return fallback;
  }

  std::string path(const std::optional<std::string>& flag, const std::string& key, const char* what) const {
    auto p = get<std::string>(flag, "/paths/" + key, "");
    if (p.empty()) throw Error(ErrorCategory::usage, std::string("missing ") + what + " (flag or paths." + key + ")");
    return p;
  }
};

Settings load_settings(const std::optional<std::string>& config_path) {
  Settings s;
  if (!config_path) return s;
  try {
    s.doc = json::parse(read_file(*config_path));
  } catch (const json::exception& e) {
    throw Error(ErrorCategory::parse, "config " + *config_path + ": " + e.what());
  }
  if (!s.doc.is_object()) throw Error(ErrorCategory::invalid_config, "config must be a JSON object");
  return s;
}

void require_file(const std::string& path, const char* what) {
  if (!fs::exists(path)) throw Error(ErrorCategory::io, std::string(what) + " not found: " + path);
}

fs::path manifest_for(const fs::path& output) {
  fs::path m = output;
  m += ".manifest.json";
  return m;
}

// Stages a directory output next to its final location and swaps it in.
class StagedDir {
 public:
  explicit StagedDir(fs::path final_dir) : final_(std::move(final_dir)) {
    tmp_ = final_;
    tmp_ += ".partial";
    fs::remove_all(tmp_);
    fs::create_directories(tmp_);
  }
  ~StagedDir() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(tmp_, ec);
    }
  }
  const fs::path& path() const { return tmp_; }
  void commit() {
    fs::remove_all(final_);
    fs::rename(tmp_, final_);
    committed_ = true;
  }

 private:
  fs::path final_;
  fs::path tmp_;
  bool committed_ = false;
};

// ---------------------------------------------------------------------------
// option bundles

struct FilterFlags {
  std::optional<int> min_posts;
  bool no_blur = false;
  bool no_quality = false;

  void add(CLI::App* app) {
    app->add_option("--min-posts", min_posts, "Keep users with at least this many distinct kept posts");
    app->add_flag("--no-blur-check", no_blur, "Do not reject blurry faces");
    app->add_flag("--no-quality-check", no_quality, "Do not reject low face-quality scores");
  }

  ingestion::FilterPolicy resolve(const Settings& s) const {
    ingestion::FilterPolicy p;
    p.min_posts = s.get(min_posts, "/filter/min_posts", p.min_posts);
    if (const auto* v = s.at("/filter/require_eye_status")) {
      const auto parsed = parse_eye_status(v->get<std::string>());
      if (!parsed) throw Error(ErrorCategory::invalid_config, "unknown eye status " + v->dump());
      p.require_eye_status = *parsed;
    }
    p.enforce_blur = no_blur ? false : s.get<bool>(std::nullopt, "/filter/enforce_blur", true);
    p.enforce_face_quality = no_quality ? false : s.get<bool>(std::nullopt, "/filter/enforce_face_quality", true);
    p.validate();
    return p;
  }
};

roi::MarginConfig resolve_margins(const Settings& s) {
  roi::MarginConfig m;
  m.eye_margin = s.get<double>(std::nullopt, "/margins/eye_margin", m.eye_margin);
  m.eye_bottom_height = s.get<double>(std::nullopt, "/margins/eye_bottom_height", m.eye_bottom_height);
  m.mouth_margin = s.get<double>(std::nullopt, "/margins/mouth_margin", m.mouth_margin);
  const auto side = s.get<std::string>(std::nullopt, "/margins/cheek_side", "left");
  if (side == "left") {
    m.cheek_side = roi::CheekSide::left;
  } else if (side == "right") {
    m.cheek_side = roi::CheekSide::right;
  } else if (side == "full") {
    m.cheek_side = roi::CheekSide::full;
  } else {
    throw Error(ErrorCategory::invalid_config, "cheek_side must be left, right or full");
  }
  if (m.eye_margin < 0 || m.eye_bottom_height <= 0 || m.mouth_margin < 0) {
    throw Error(ErrorCategory::invalid_config, "margins must be non-negative and eye_bottom_height positive");
  }
  return m;
}

roi::DescriptorFile run_backend(const std::string& backend, const ingestion::TimelineCorpus& corpus,
                                const std::optional<std::string>& images, const roi::MarginConfig& margins) {
  if (backend == "toy") {
    if (!images) throw Error(ErrorCategory::usage, "the toy backend needs --images");
    if (!fs::is_directory(*images)) throw Error(ErrorCategory::io, "image directory not found: " + *images);
    return pipeline::extract_corpus(corpus, *images, roi::ToyBackend{}, margins);
  }
  if (backend.rfind("file:", 0) == 0) {
    const auto path = backend.substr(5);
    require_file(path, "descriptor file");
    return pipeline::select_precomputed(corpus, roi::read_descriptor_file(path));
  }
  throw Error(ErrorCategory::invalid_config, "backend must be toy or file:PATH, got " + backend);
}

cohort::GroupingSpec resolve_grouping(const Settings& s, const std::optional<std::string>& group_by,
                                      bool weekday_flag, const std::optional<std::size_t>& min_group,
                                      const std::optional<double>& alpha) {
  cohort::GroupingSpec spec;
  std::vector<std::string> dims;
  if (group_by) {
    std::stringstream ss(*group_by);
    std::string d;
    while (std::getline(ss, d, ',')) {
      if (!d.empty()) dims.push_back(d);
    }
  } else if (const auto* v = s.at("/analytics/group_by")) {
    dims = v->get<std::vector<std::string>>();
  } else {
    dims = {"age"};
  }
  spec.by_age = spec.by_gender = spec.by_race = false;
  for (const auto& d : dims) {
    if (d == "age") {
      spec.by_age = true;
    } else if (d == "gender") {
      spec.by_gender = true;
    } else if (d == "race") {
      spec.by_race = true;
    } else if (d == "weekday") {
      spec.by_weekday = true;
    } else {
      throw Error(ErrorCategory::usage, "unknown grouping dimension " + d);
    }
  }
  spec.by_weekday = spec.by_weekday || weekday_flag || s.get<bool>(std::nullopt, "/analytics/weekday", false);
  spec.min_group_size = s.get(min_group, "/analytics/min_group_size", spec.min_group_size);
  spec.alpha = s.get(alpha, "/analytics/alpha", spec.alpha);
  if (spec.min_group_size < 2) throw Error(ErrorCategory::invalid_config, "min_group_size must be >= 2");
  if (!(spec.alpha > 0 && spec.alpha < 1)) throw Error(ErrorCategory::invalid_config, "alpha must be in (0,1)");
  return spec;
}

json grouping_json(const cohort::GroupingSpec& g) {
  json dims = json::array();
  if (g.by_age) dims.push_back("age");
  if (g.by_gender) dims.push_back("gender");
  if (g.by_race) dims.push_back("race");
  return {{"group_by", dims}, {"weekday", g.by_weekday}, {"min_group_size", g.min_group_size}, {"alpha", g.alpha}};
}

json filter_json(const ingestion::FilterPolicy& p) {
  return {{"min_posts", p.min_posts},
          {"require_eye_status", std::string(to_string(p.require_eye_status))},
          {"enforce_blur", p.enforce_blur},
          {"enforce_face_quality", p.enforce_face_quality}};
}

json margins_json(const roi::MarginConfig& m) {
  const char* side = m.cheek_side == roi::CheekSide::left ? "left" : m.cheek_side == roi::CheekSide::right ? "right" : "full";
  return {{"eye_margin", m.eye_margin},
          {"eye_bottom_height", m.eye_bottom_height},
          {"mouth_margin", m.mouth_margin},
          {"cheek_side", side}};
}

std::string corpus_text(const ingestion::TimelineCorpus& corpus) {
  std::ostringstream os;
  ingestion::write_corpus(os, corpus);
  return os.str();
}

void write_descriptors(const fs::path& path, const roi::DescriptorFile& file) {
  write_atomic(path, roi::encode_descriptor_file(file, roi::format_for(path)));
}

std::map<std::string, double> predictions_map(const std::vector<std::pair<std::string, double>>& rows) {
  std::map<std::string, double> m;
  for (const auto& [id, v] : rows) m[id] = v;
  return m;
}

model::BoostConfig boost_from(const Settings& s) {
  const json* section = s.at("/boost");
  json j = section ? *section : s.doc;
  try {
    return j.get<model::BoostConfig>();
  } catch (const Error&) {
    throw;
  } catch (const json::exception& e) {
    throw Error(ErrorCategory::invalid_config, std::string("boost config: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fatigue-rate estimation from face records: ingestion, features, training, analytics.",
               "fatiguescope"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::optional<std::string> config_path;
  auto add_config = [&config_path](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config document; flags override it")->check(CLI::ExistingFile);
  };

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Filter raw detection records into a timeline corpus");
  std::optional<std::string> ingest_input, ingest_out, ingest_stats, ingest_demo;
  FilterFlags ingest_filter;
  add_config(ingest);
  ingest->add_option("--input", ingest_input, "Detection records JSONL");
  ingest->add_option("--out", ingest_out, "Filtered corpus JSONL");
  ingest->add_option("--stats", ingest_stats, "Stats JSON (default: <out>.stats.json)");
  ingest->add_option("--demographics", ingest_demo, "Also write the per-user demographic histogram JSON");
  ingest_filter.add(ingest);

  // extract
  auto* extract = app.add_subcommand("extract", "Compute ROI descriptors for every corpus face");
  std::optional<std::string> ex_images, ex_records, ex_backend, ex_out;
  add_config(extract);
  extract->add_option("--images", ex_images, "Directory with <face_id>.pgm|.ppm images");
  extract->add_option("--records", ex_records, "Corpus JSONL");
  extract->add_option("--backend", ex_backend, "toy | file:PATH (precomputed descriptors)");
  extract->add_option("--out", ex_out, "Descriptor file (.bin binary, .csv text)");

  // rate-serve
  auto* serve = app.add_subcommand("rate-serve", "Serve the rating HTTP API until interrupted");
  std::optional<std::string> rs_faces, rs_journal, rs_host;
  std::optional<int> rs_port;
  bool rs_skip = false;
  add_config(serve);
  serve->add_option("--faces", rs_faces, "Face manifest JSON");
  serve->add_option("--journal", rs_journal, "Append-only session journal (JSONL)");
  serve->add_option("--host", rs_host, "Bind address (default 127.0.0.1)");
  serve->add_option("--port", rs_port, "Port (default 8080)");
  serve->add_flag("--allow-skip", rs_skip, "Allow raters to skip faces");

  // labels
  auto* labels = app.add_subcommand("labels", "Aggregate completed rating sessions into training labels");
  std::optional<std::string> lb_faces, lb_journal, lb_out, lb_hist;
  std::optional<double> lb_scale;
  add_config(labels);
  labels->add_option("--faces", lb_faces, "Face manifest JSON");
  labels->add_option("--journal", lb_journal, "Session journal written by rate-serve");
  labels->add_option("--out", lb_out, "labels.csv");
  labels->add_option("--histogram", lb_hist, "Label histogram CSV (default: <out>.histogram.csv)");
  labels->add_option("--scale-factor", lb_scale, "Rater-scale to percent factor (default 25)");

  // train
  auto* train = app.add_subcommand("train", "Fit a boosted or bagged tree ensemble");
  std::optional<std::string> tr_features, tr_labels, tr_out, tr_method;
  std::optional<int> tr_cycles, tr_min_leaf, tr_depth;
  std::optional<double> tr_rate;
  std::optional<std::uint64_t> tr_seed;
  add_config(train);
  train->add_option("--features", tr_features, "Descriptor file");
  train->add_option("--labels", tr_labels, "labels.csv");
  train->add_option("--out", tr_out, "model.json");
  train->add_option("--method", tr_method, "lsboost | bag");
  train->add_option("--cycles", tr_cycles, "Number of trees");
  train->add_option("--learn-rate", tr_rate, "Shrinkage (lsboost)");
  train->add_option("--min-leaf", tr_min_leaf, "Minimum leaf size");
  train->add_option("--max-depth", tr_depth, "Maximum tree depth, 0 = unlimited");
  train->add_option("--seed", tr_seed, "Seed for bootstrap sampling");

  // tune
  auto* tune = app.add_subcommand("tune", "Bayesian hyper-parameter search by k-fold CV RMSE");
  std::optional<std::string> tu_features, tu_labels, tu_out, tu_log;
  std::optional<std::size_t> tu_budget, tu_k;
  std::optional<std::uint64_t> tu_seed;
  add_config(tune);
  tune->add_option("--features", tu_features, "Descriptor file");
  tune->add_option("--labels", tu_labels, "labels.csv");
  tune->add_option("--budget", tu_budget, "Number of trials (default 100)");
  tune->add_option("--k", tu_k, "Cross-validation folds (default 5)");
  tune->add_option("--seed", tu_seed, "Seed for design, pool and folds");
  tune->add_option("--out", tu_out, "best_config.json");
  tune->add_option("--log", tu_log, "Trial log CSV");

  // predict
  auto* predict = app.add_subcommand("predict", "Predict fatigue rates with a trained model");
  std::optional<std::string> pr_model, pr_features, pr_out;
  add_config(predict);
  predict->add_option("--model", pr_model, "model.json");
  predict->add_option("--features", pr_features, "Descriptor file");
  predict->add_option("--out", pr_out, "predictions.csv");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Demographic and weekday cohort report");
  std::optional<std::string> an_corpus, an_pred, an_group, an_out;
  std::optional<std::size_t> an_min_group;
  std::optional<double> an_alpha;
  bool an_weekday = false;
  add_config(analyze);
  analyze->add_option("--corpus", an_corpus, "Corpus JSONL");
  analyze->add_option("--predictions", an_pred, "predictions.csv");
  analyze->add_option("--group-by", an_group, "Comma list of age,gender,race");
  analyze->add_flag("--weekday", an_weekday, "Also group by posting weekday");
  analyze->add_option("--min-group-size", an_min_group, "Groups with fewer users are excluded (default 20)");
  analyze->add_option("--alpha", an_alpha, "Family-wise significance level (default 0.05)");
  analyze->add_option("--out", an_out, "Report directory");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "ingest -> extract -> predict -> analyze with an existing model");
  std::optional<std::string> pp_input, pp_images, pp_backend, pp_model, pp_group, pp_out;
  std::optional<std::size_t> pp_min_group;
  std::optional<double> pp_alpha;
  bool pp_weekday = false;
  FilterFlags pp_filter;
  add_config(pipe);
  pipe->add_option("--input", pp_input, "Detection records JSONL");
  pipe->add_option("--images", pp_images, "Image directory (toy backend)");
  pipe->add_option("--backend", pp_backend, "toy | file:PATH");
  pipe->add_option("--model", pp_model, "model.json");
  pipe->add_option("--group-by", pp_group, "Comma list of age,gender,race");
  pipe->add_flag("--weekday", pp_weekday, "Also group by posting weekday");
  pipe->add_option("--min-group-size", pp_min_group, "Groups with fewer users are excluded");
  pipe->add_option("--alpha", pp_alpha, "Family-wise significance level");
  pipe->add_option("--out", pp_out, "Output directory");
  pp_filter.add(pipe);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: usage: %s\n", e.what());
    return exit_status(ErrorCategory::usage);
  }

  try {
    const Settings s = load_settings(config_path);

    if (*ingest) {
      const auto input = s.path(ingest_input, "input", "--input");
      const auto out = s.path(ingest_out, "corpus", "--out");
      require_file(input, "input");
      const auto policy = ingest_filter.resolve(s);
      auto result = ingestion::ingest(input, policy);
      const fs::path stats_path = ingest_stats ? fs::path(*ingest_stats) : fs::path(out + ".stats.json");
      write_atomic(out, corpus_text(result.corpus));
      write_atomic(stats_path, result.stats.to_json().dump(2) + "\n");
      Manifest m("ingest", {{"filter", filter_json(policy)}});
      m.add_input("records", input);
      m.add_output("corpus", out);
      m.add_output("stats", stats_path);
      if (ingest_demo) {
        write_atomic(*ingest_demo, ingestion::demographic_histogram(result.corpus).to_json().dump(2) + "\n");
        m.add_output("demographics", *ingest_demo);
      }
      m.write(manifest_for(out));
      std::printf("kept %zu of %zu records, %zu users\n", result.stats.kept, result.stats.records_read,
                  result.stats.users_kept);
      return 0;
    }

    if (*extract) {
      const auto records = s.path(ex_records, "corpus", "--records");
      const auto out = s.path(ex_out, "features", "--out");
      const auto backend = s.get<std::string>(ex_backend, "/backend", "toy");
      std::optional<std::string> images = ex_images;
      if (!images) {
        if (const auto* v = s.at("/paths/images")) images = v->get<std::string>();
      }
      require_file(records, "corpus");
      const auto margins = resolve_margins(s);
      const auto corpus = ingestion::read_corpus(records);
      const auto file = run_backend(backend, corpus, images, margins);
      write_descriptors(out, file);
      Manifest m("extract", {{"backend", backend}, {"margins", margins_json(margins)}});
      m.add_input("corpus", records);
      if (backend == "toy") m.add_input("images", *images);
      if (backend.rfind("file:", 0) == 0) m.add_input("descriptors", backend.substr(5));
      m.add_output("features", out);
      m.write(manifest_for(out));
      std::printf("%zu descriptor rows, dimension %zu\n", file.rows.size(), file.total_dim);
      return 0;
    }

    if (*serve) {
      const auto faces = s.path(rs_faces, "faces", "--faces");
      require_file(faces, "face manifest");
      std::optional<fs::path> journal;
      if (rs_journal) {
        journal = *rs_journal;
      } else if (const auto* v = s.at("/paths/journal")) {
        journal = v->get<std::string>();
      }
      const bool allow_skip = rs_skip || s.get<bool>(std::nullopt, "/serve/allow_skip", false);
      rating::RatingService service(rating::FaceStore::load(faces), journal, allow_skip);
      rating::RatingApi api(service);
      const auto host = s.get<std::string>(rs_host, "/serve/host", "127.0.0.1");
      const int port = s.get<int>(rs_port, "/serve/port", 8080);
      std::fprintf(stderr, "serving %zu faces on http://%s:%d\n", service.store().size(), host.c_str(), port);
      rating::serve(api, host, port);
      return 0;
    }

    if (*labels) {
      const auto faces = s.path(lb_faces, "faces", "--faces");
      const auto journal = s.path(lb_journal, "journal", "--journal");
      const auto out = s.path(lb_out, "labels", "--out");
      require_file(faces, "face manifest");
      const double factor = s.get(lb_scale, "/labels/scale_factor", 25.0);
      std::optional<fs::path> journal_path;
      if (fs::exists(journal)) journal_path = journal;
      const rating::RatingService service(rating::FaceStore::load(faces), journal_path);
      const auto set = rating::aggregate_labels(service.completed_sessions(), {}, factor);
      const fs::path hist = lb_hist ? fs::path(*lb_hist) : fs::path(out + ".histogram.csv");
      write_atomic(out, set.to_csv());
      write_atomic(hist, set.histogram_csv());
      Manifest m("labels", {{"scale_factor", factor}});
      m.add_input("faces", faces);
      if (journal_path) m.add_input("journal", *journal_path);
      m.add_output("labels", out);
      m.add_output("histogram", hist);
      m.write(manifest_for(out));
      std::printf("%zu faces labeled, %zu unrated\n", set.faces.size(), set.unrated.size());
      return 0;
    }

    if (*train) {
      const auto features = s.path(tr_features, "features", "--features");
      const auto labels_path = s.path(tr_labels, "labels", "--labels");
      const auto out = s.path(tr_out, "model", "--out");
      require_file(features, "features");
      require_file(labels_path, "labels");
      auto cfg = boost_from(s);
      if (tr_method) cfg.method = model::parse_method(*tr_method);
      if (tr_cycles) cfg.cycles = *tr_cycles;
      if (tr_rate) cfg.learn_rate = *tr_rate;
      if (tr_min_leaf) cfg.min_leaf_size = *tr_min_leaf;
      if (tr_depth) cfg.max_depth = *tr_depth;
      cfg.seed = s.get(tr_seed, "/seed", cfg.seed);
      cfg.validate();
      const auto set = pipeline::join_training_set(roi::read_descriptor_file(features), read_labels_csv(labels_path));
      const auto fitted = model::fit_ensemble(set.x, set.y, cfg);
      write_atomic(out, fitted.to_json().dump() + "\n");
      Manifest m("train", json(cfg));
      m.set_seed(cfg.seed);
      m.add_input("features", features);
      m.add_input("labels", labels_path);
      m.add_output("model", out);
      m.write(manifest_for(out));
      std::printf("trained %s with %zu trees on %zu faces\n", std::string(model::to_string(cfg.method)).c_str(),
                  fitted.trees().size(), set.y.size());
      return 0;
    }

    if (*tune) {
      const auto features = s.path(tu_features, "features", "--features");
      const auto labels_path = s.path(tu_labels, "labels", "--labels");
      const auto out = s.path(tu_out, "best_config", "--out");
      require_file(features, "features");
      require_file(labels_path, "labels");
      const auto budget = s.get(tu_budget, "/tune/budget", std::size_t{100});
      const auto k = s.get(tu_k, "/tune/k", std::size_t{5});
      const auto seed = s.get(tu_seed, "/seed", std::uint64_t{0});
      tuner::SearchSpace space;
      if (const auto* v = s.at("/tune/space")) space = v->get<tuner::SearchSpace>();
      space.validate();
      tuner::OptimizerOptions opts;
      if (const auto* v = s.at("/boost")) opts.base = v->get<model::BoostConfig>();
      const auto set = pipeline::join_training_set(roi::read_descriptor_file(features), read_labels_csv(labels_path));
      const auto result = tuner::tune_ensemble(set.x, set.y, space, budget, k, seed, opts);
      write_atomic(out, json(result.best).dump(2) + "\n");
      Manifest m("tune", {{"budget", budget}, {"k", k}, {"space", space}});
      m.set_seed(seed);
      m.add_input("features", features);
      m.add_input("labels", labels_path);
      m.add_output("best_config", out);
      std::optional<std::string> log = tu_log;
      if (!log) {
        if (const auto* v = s.at("/paths/trials")) log = v->get<std::string>();
      }
      if (log) {
        write_atomic(*log, result.log.to_csv());
        m.add_output("trials", *log);
      }
      m.write(manifest_for(out));
      std::printf("best cv rmse %.6f after %zu trials\n", result.log.best().objective, result.log.trials.size());
      return 0;
    }

    if (*predict) {
      const auto model_path = s.path(pr_model, "model", "--model");
      const auto features = s.path(pr_features, "features", "--features");
      const auto out = s.path(pr_out, "predictions", "--out");
      require_file(model_path, "model");
      require_file(features, "features");
      json mj;
      try {
        mj = json::parse(read_file(model_path));
      } catch (const json::exception& e) {
        throw Error(ErrorCategory::parse, "model " + model_path + ": " + e.what());
      }
      const auto fitted = model::EnsembleModel::from_json(mj);
      const auto rows = pipeline::predict_all(fitted, roi::read_descriptor_file(features));
      write_atomic(out, predictions_csv(rows));
      Manifest m("predict", json::object());
      m.add_input("model", model_path);
      m.add_input("features", features);
      m.add_output("predictions", out);
      m.write(manifest_for(out));
      std::printf("%zu predictions\n", rows.size());
      return 0;
    }

    if (*analyze) {
      const auto corpus_path = s.path(an_corpus, "corpus", "--corpus");
      const auto pred_path = s.path(an_pred, "predictions", "--predictions");
      const auto out = s.path(an_out, "reports", "--out");
      require_file(corpus_path, "corpus");
      require_file(pred_path, "predictions");
      const auto spec = resolve_grouping(s, an_group, an_weekday, an_min_group, an_alpha);
      const auto report = cohort::cohort_report(ingestion::read_corpus(corpus_path), read_predictions_csv(pred_path), spec);
      StagedDir dir(out);
      const auto files = pipeline::write_report(dir.path(), report);
      Manifest m("analyze", grouping_json(spec));
      m.add_input("corpus", corpus_path);
      m.add_input("predictions", pred_path);
      dir.commit();
      for (const auto& f : files) {
        m.add_output(f.filename().string(), fs::path(out) / f.filename(), f.filename().string());
      }
      m.write(fs::path(out) / "manifest.json");
      std::printf("%zu groups, %zu excluded, %zu comparisons\n", report.groups.size(), report.excluded.size(),
                  report.comparisons.comparisons.size());
      return 0;
    }

    if (*pipe) {
      const auto input = s.path(pp_input, "input", "--input");
      const auto model_path = s.path(pp_model, "model", "--model");
      const auto out = s.path(pp_out, "reports", "--out");
      const auto backend = s.get<std::string>(pp_backend, "/backend", "toy");
      std::optional<std::string> images = pp_images;
      if (!images) {
        if (const auto* v = s.at("/paths/images")) images = v->get<std::string>();
      }
      require_file(input, "input");
      require_file(model_path, "model");
      const auto policy = pp_filter.resolve(s);
      const auto margins = resolve_margins(s);
      const auto spec = resolve_grouping(s, pp_group, pp_weekday, pp_min_group, pp_alpha);

      auto ingested = ingestion::ingest(input, policy);
      const auto features = run_backend(backend, ingested.corpus, images, margins);
      const auto fitted = model::EnsembleModel::from_json(json::parse(read_file(model_path)));
      const auto predictions = pipeline::predict_all(fitted, features);
      const auto report = cohort::cohort_report(ingested.corpus, predictions_map(predictions), spec);

      StagedDir dir(out);
      write_atomic(dir.path() / "corpus.jsonl", corpus_text(ingested.corpus));
      write_atomic(dir.path() / "ingest_stats.json", ingested.stats.to_json().dump(2) + "\n");
      write_descriptors(dir.path() / "features.bin", features);
      write_atomic(dir.path() / "predictions.csv", predictions_csv(predictions));
      const auto files = pipeline::write_report(dir.path(), report);

      Manifest m("pipeline", {{"filter", filter_json(policy)},
                              {"margins", margins_json(margins)},
                              {"backend", backend},
                              {"analytics", grouping_json(spec)}});
      m.add_input("records", input);
      m.add_input("model", model_path);
      if (backend == "toy") m.add_input("images", *images);
      if (backend.rfind("file:", 0) == 0) m.add_input("descriptors", backend.substr(5));
      dir.commit();
      for (const char* name : {"corpus.jsonl", "ingest_stats.json", "features.bin", "predictions.csv"}) {
        m.add_output(name, fs::path(out) / name, name);
      }
      for (const auto& f : files) {
        m.add_output(f.filename().string(), fs::path(out) / f.filename(), f.filename().string());
      }
      m.write(fs::path(out) / "manifest.json");
      std::printf("%zu faces scored, %zu groups reported\n", predictions.size(), report.groups.size());
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", std::string(category_name(e.category())).c_str(), e.what());
    return exit_status(e.category());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return exit_status(ErrorCategory::internal);
  }
  return 0;
}
