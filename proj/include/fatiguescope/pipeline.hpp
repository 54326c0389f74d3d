#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fatiguescope/cohort.hpp"
#include "fatiguescope/ensemble.hpp"
#include "fatiguescope/ingestion.hpp"
#include "fatiguescope/matrix.hpp"
#include "fatiguescope/roi.hpp"

namespace fatiguescope::pipeline {

// DIR/<face_id>.pgm, then .ppm. Throws Error(io) when neither exists.
std::filesystem::path find_face_image(const std::filesystem::path& images_dir, const std::string& face_id);

// One descriptor row per corpus record, corpus order.
roi::DescriptorFile extract_corpus(const ingestion::TimelineCorpus& corpus, const std::filesystem::path& images_dir,
                                   const roi::DescriptorBackend& backend, const roi::MarginConfig& margins = {});

// Rows of a precomputed descriptor file for the corpus records, corpus order.
// Throws Error(input_mismatch) when a record has no row.
roi::DescriptorFile select_precomputed(const ingestion::TimelineCorpus& corpus, const roi::DescriptorFile& file);

struct TrainingSet {
  std::vector<std::string> face_ids;
  FeatureMatrix x;
  std::vector<double> y;
};

// Pairs descriptor rows with labels by face_id in descriptor-file order.
// Throws Error(input_mismatch) unless both sides cover the same faces.
TrainingSet join_training_set(const roi::DescriptorFile& features, const std::map<std::string, double>& labels);

// Clamped predictions in descriptor-file order.
std::vector<std::pair<std::string, double>> predict_all(const model::EnsembleModel& model,
                                                        const roi::DescriptorFile& features);

// means.csv, comparisons.csv, histogram.csv, excluded_groups.csv.
std::vector<std::filesystem::path> write_report(const std::filesystem::path& dir, const cohort::CohortReport& report);

}  // namespace fatiguescope::pipeline
