#pragma once

#include "adrift/adapt.hpp"
#include "adrift/cluster.hpp"
#include "adrift/features.hpp"
#include "adrift/net.hpp"
#include "adrift/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace adrift::drift {

struct Verdict {
    enum class Kind { classified, drifted };
    Kind kind = Kind::drifted;
    std::optional<std::string> family;  ///< present iff classified
    std::size_t nearest_cluster = 0;
    double distance = 0.0;  ///< squared distance to the nearest centroid
};

/// A rejected sample awaiting prototype discovery. Raw features are kept so
/// the entry can be re-embedded after retraining replaces the encoder.
struct BufferEntry {
    std::string id;
    Vector raw;
    Vector latent;
    std::optional<std::string> provided_label;
    Index stream_pos = 0;
};

/// Everything needed to rerun the training pipeline when the retrain
/// trigger fires: the raw training split and the fitted-pipeline settings.
struct RetrainContext {
    features::FeatureMatrix train_data;  ///< raw features, labeled
    net::TrainConfig train_config;
    std::vector<net::LayerSpec> encoder_arch;
    std::vector<net::LayerSpec> decoder_arch;
    double variance_floor = 0.0;
    Index quantile_resolution = 1000;
    cluster::ClusterBuildOptions cluster_options;
    Index retrain_count = 0;
};

/// Per-family store of samples accepted by a novel prototype, replayed into
/// the next retraining.
struct Accumulator {
    std::vector<std::string> ids;
    std::vector<Vector> raw;

    Index size() const { return static_cast<Index>(raw.size()); }
};

struct DetectorState {
    net::AutoencoderModel model;
    std::vector<cluster::Cluster> clusters;
    std::vector<BufferEntry> buffer;
    std::vector<adapt::Prototype> prototypes;
    std::map<std::string, Accumulator> accumulators;
    adapt::AdaptConfig config;
    /// Absent in read-only settings; without it the retrain trigger reports
    /// an error instead of retraining.
    std::optional<RetrainContext> retrain;
    Index stream_pos = 0;     ///< 1-based position of the last observed sample
    Index novel_counter = 0;  ///< next synthetic novel-family suffix
};

/// Validates dimensions and returns a state with an empty buffer and no
/// accumulators.
DetectorState init_detector(net::AutoencoderModel model, std::vector<cluster::Cluster> clusters,
                            adapt::AdaptConfig config);

/// Preprocess + encode + assign one sample. Accepted samples classified into
/// a prototype-origin cluster of a novel family feed that family's
/// accumulator (possibly triggering retraining); rejected samples join the
/// buffer and run the adaptation hook. The optional stream label is recorded
/// for buffered samples and may name later promotions.
std::pair<Verdict, std::vector<adapt::AdaptEvent>> observe(
    DetectorState& state, const std::string& sample_id, const Vector& raw,
    const std::optional<std::string>& provided_label = std::nullopt);

/// Sequential observe over the rows of a raw matrix. With read_only the
/// verdicts come from a state copy and the caller's state is untouched.
std::vector<Verdict> classify_batch(DetectorState& state, const Matrix& raw, bool read_only);

/// Width of raw vectors observe expects (preprocess input width when a
/// fitted state is present, the encoder width otherwise).
Index expected_raw_width(const DetectorState& state);

}  // namespace adrift::drift
