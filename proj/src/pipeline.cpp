#include "fatiguescope/pipeline.hpp"

#include "fatiguescope/artifacts.hpp"
#include "fatiguescope/image.hpp"

namespace fatiguescope::pipeline {

namespace fs = std::filesystem;

fs::path find_face_image(const fs::path& images_dir, const std::string& face_id) {
  for (const char* ext : {".pgm", ".ppm"}) {
    auto p = images_dir / (face_id + ext);
    if (fs::is_regular_file(p)) return p;
  }
  throw Error(ErrorCategory::io, "no image for face " + face_id + " under " + images_dir.string());
}

roi::DescriptorFile extract_corpus(const ingestion::TimelineCorpus& corpus, const fs::path& images_dir,
                                   const roi::DescriptorBackend& backend, const roi::MarginConfig& margins) {
  roi::DescriptorFile out;
  out.backend_id = backend.id();
  out.base_dim = backend.dimension();
  out.total_dim = 6 * backend.dimension();
  for (const auto& rec : corpus.records()) {
    try {
      const auto image = roi::load_netpbm(find_face_image(images_dir, rec.face_id));
      auto fv = roi::extract_features(image, roi::locate_rois(rec.landmarks, margins), backend);
      out.rows.emplace_back(rec.face_id, std::move(fv.values));
    } catch (const Error& e) {
      throw Error(e.category(), "face " + rec.face_id + ": " + e.what());
    }
  }
  return out;
}

roi::DescriptorFile select_precomputed(const ingestion::TimelineCorpus& corpus, const roi::DescriptorFile& file) {
  std::map<std::string, const std::vector<double>*> index;
  for (const auto& [id, v] : file.rows) index[id] = &v;
  roi::DescriptorFile out;
  out.backend_id = file.backend_id;
  out.base_dim = file.base_dim;
  out.total_dim = file.total_dim;
  for (const auto& rec : corpus.records()) {
    const auto it = index.find(rec.face_id);
    if (it == index.end()) {
      throw Error(ErrorCategory::input_mismatch, "precomputed descriptors have no row for face " + rec.face_id);
    }
    out.rows.emplace_back(rec.face_id, *it->second);
  }
  return out;
}

TrainingSet join_training_set(const roi::DescriptorFile& features, const std::map<std::string, double>& labels) {
  if (features.rows.size() != labels.size()) {
    throw Error(ErrorCategory::input_mismatch, std::to_string(features.rows.size()) + " feature rows but " +
                                                   std::to_string(labels.size()) + " labels");
  }
  TrainingSet set;
  std::vector<double> data;
  data.reserve(features.rows.size() * features.total_dim);
  for (const auto& [id, v] : features.rows) {
    const auto it = labels.find(id);
    if (it == labels.end()) throw Error(ErrorCategory::input_mismatch, "no label for face " + id);
    set.face_ids.push_back(id);
    set.y.push_back(it->second);
    data.insert(data.end(), v.begin(), v.end());
  }
  set.x = FeatureMatrix(features.rows.size(), features.total_dim, std::move(data));
  return set;
}

std::vector<std::pair<std::string, double>> predict_all(const model::EnsembleModel& model,
                                                        const roi::DescriptorFile& features) {
  if (features.total_dim != model.feature_dimension()) {
    throw Error(ErrorCategory::input_mismatch,
                "model expects " + std::to_string(model.feature_dimension()) + " features, file has " +
                    std::to_string(features.total_dim));
  }
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [id, v] : features.rows) out.emplace_back(id, model.predict(v).value());
  return out;
}

std::vector<fs::path> write_report(const fs::path& dir, const cohort::CohortReport& report) {
  const std::vector<std::pair<std::string, std::string>> files = {
      {"means.csv", report.means_csv()},
      {"comparisons.csv", report.comparisons_csv()},
      {"histogram.csv", report.histogram_csv()},
      {"excluded_groups.csv", report.excluded_csv()}};
  std::vector<fs::path> written;
  for (const auto& [name, content] : files) {
    write_atomic(dir / name, content);
    written.push_back(dir / name);
  }
  return written;
}

}  // namespace fatiguescope::pipeline
