#pragma once

#include "adrift/cluster.hpp"
#include "adrift/net.hpp"
#include "adrift/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace adrift::drift {
struct DetectorState;
}

namespace adrift::adapt {

enum class LabelMode { label_drift, covariate_drift };

struct AdaptConfig {
    Index buffer_min_cluster = 10;
    Index retrain_trigger = 100;
    LabelMode label_mode = LabelMode::label_drift;
    /// Operator-supplied support label -> known family name.
    std::map<std::string, std::string> known_family_link;
    /// Prefix for synthetic novel family names ("novel" -> "novel-0", ...).
    std::string naming_scheme = "novel";
    /// When set, a promotion whose founding members carry stream labels uses
    /// the majority label as the operator label.
    bool adopt_stream_labels = false;
    cluster::ThresholdPolicy threshold_policy;
    double epsilon_floor = 1e-6;
    /// Retraining re-initializes parameters unless this is set.
    bool retrain_warm_start = false;

    void validate() const;
};

struct Prototype {
    std::string family;
    Vector vector;  ///< mean of the founding latents
    std::vector<std::string> support_ids;
    Index created_at = 0;  ///< stream position at promotion time
    /// Founding raw features, kept so the prototype can be re-embedded after
    /// a retrain replaces the encoder.
    Matrix support_raw;
};

enum class AdaptEventKind { prototype_promoted, retrain_triggered, retrain_completed };

struct AdaptEvent {
    AdaptEventKind kind;
    std::string family;
    Index stream_pos = 0;
    Index sample_count = 0;
    std::string detail;
};

std::string to_string(AdaptEventKind kind);

/// Reclusters the drift buffer and promotes the largest qualifying cluster
/// into a prototype-origin Cluster, removing its founding members from the
/// buffer. At most one promotion per call; quiet when nothing qualifies.
std::vector<AdaptEvent> on_buffer_update(drift::DetectorState& state);

/// Builds a Prototype from founding buffer members (indices into the buffer)
/// and registers it in state.clusters with a threshold computed under the
/// active policy. label_drift names it from the naming scheme unless an
/// operator label is given; covariate_drift requires a label resolving to a
/// known family. The founding members stay in the buffer; on_buffer_update
/// removes them after a successful promotion.
Prototype promote(drift::DetectorState& state, const std::vector<Index>& buffer_members,
                  LabelMode label_mode, const std::optional<std::string>& operator_label);

/// Nearest-prototype classification in latent space; ties break to the
/// lowest prototype index. No thresholds apply.
std::string classify_fewshot(const std::vector<Prototype>& prototypes, const Vector& latent);

/// Convenience overload for raw queries: preprocesses (when the model holds
/// a fitted state) and encodes, then classifies by nearest prototype.
std::string classify_fewshot(const net::AutoencoderModel& model,
                             const std::vector<Prototype>& prototypes, const Vector& raw_query);

/// Checks novel-family accumulators against the retrain trigger and runs the
/// full retraining transition when one fires. State is swapped atomically;
/// on failure the old state is untouched.
std::vector<AdaptEvent> maybe_retrain(drift::DetectorState& state);

}  // namespace adrift::adapt
