#pragma once

#include "adrift/checkpoint.hpp"
#include "adrift/config.hpp"
#include "adrift/drift.hpp"
#include "adrift/eval.hpp"
#include "adrift/features.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace adrift::pipeline {

struct TrainOutcome {
    checkpoint::Checkpoint ckpt;
    Index train_rows = 0;
    Index validation_rows = 0;
    double validation_mse = 0.0;
    /// Absent when the validation split cannot form triplets (fewer than two
    /// families with two or more samples).
    std::optional<double> validation_triplet;
};

/// ISO-8601 UTC timestamp; SOURCE_DATE_EPOCH overrides the clock so builds
/// can pin provenance.
std::string provenance_timestamp();

/// Fit preprocess on the labeled data, split it, train on the training
/// part, model clusters over the training embeddings, and report validation
/// losses. All randomness derives from cfg.seed.
TrainOutcome run_training(const config::RunConfig& cfg, const features::FeatureMatrix& data,
                          const std::string& data_fingerprint);

/// Detector over the checkpoint's model and clusters. When raw training
/// data is supplied the retrain trigger is armed with a context rebuilt
/// from the checkpoint's settings.
drift::DetectorState make_detector(const checkpoint::Checkpoint& ckpt,
                                   const config::RunConfig& cfg,
                                   std::optional<features::FeatureMatrix> train_data);

/// Pure per-row assignment against a fixed cluster set: embed, assign,
/// verdict. No buffering, promotion, or retraining, so the verdict of row i
/// never depends on rows before it. This is the evaluation path; streaming
/// goes through drift::observe.
std::vector<drift::Verdict> assign_all(const net::AutoencoderModel& model,
                                       const std::vector<cluster::Cluster>& clusters,
                                       const Matrix& raw);

/// Per-family tally of verdicts against truth labels. Correctness of a row,
/// drifted or not, is judged by its nearest cluster's family.
eval::GroupedDriftCounts tally_verdicts(const std::vector<cluster::Cluster>& clusters,
                                        const std::vector<std::string>& truth,
                                        const std::vector<drift::Verdict>& verdicts);

/// prf1 inputs: classified verdicts predict their family, drifted rows
/// predict nothing.
std::vector<eval::Prediction> to_predictions(const std::vector<std::string>& truth,
                                             const std::vector<drift::Verdict>& verdicts);

/// Preprocess (when fitted) and encode raw rows.
Matrix embed(const net::AutoencoderModel& model, const Matrix& raw);

/// Latent embeddings grouped by family label; requires labels.
std::map<std::string, Matrix> embeddings_by_family(const net::AutoencoderModel& model,
                                                   const features::FeatureMatrix& data);

}  // namespace adrift::pipeline
