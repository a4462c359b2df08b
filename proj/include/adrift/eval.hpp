#pragma once

#include "adrift/drift.hpp"
#include "adrift/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace adrift::eval {

/// One family's verdict tally, split by drift decision and correctness.
struct DriftCounts {
    Index correct_not_drifted = 0;
    Index wrong_not_drifted = 0;
    Index correct_drifted = 0;
    Index wrong_drifted = 0;

    Index total() const {
        return correct_not_drifted + wrong_not_drifted + correct_drifted + wrong_drifted;
    }
    void validate() const;
};

using GroupedDriftCounts = std::map<std::string, DriftCounts>;

struct DriftRates {
    double drift_rate = 0.0;
    double error_rate = 0.0;
    double accuracy = 0.0;
};

struct GroupedDriftReport {
    std::map<std::string, DriftRates> per_family;
    DriftCounts total_counts;
    DriftRates totals;
};

/// drift_rate = drifted/total; error_rate = wrong/(classified), 0 when
/// nothing was classified; accuracy counts correct verdicts over everything.
DriftRates grouped_drift_metrics(const DriftCounts& counts);
GroupedDriftReport grouped_drift_metrics(const GroupedDriftCounts& counts);

/// One evaluated sample: its true family and the predicted family, or
/// nullopt when the detector called it drifted.
struct Prediction {
    std::string truth;
    std::optional<std::string> predicted;
};

struct PrF1 {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    Index support = 0;
};

struct PrF1Report {
    std::map<std::string, PrF1> per_family;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
};

/// One-vs-rest precision/recall/F1 with an unweighted macro average. A
/// drifted verdict is a non-prediction: a false negative for its true family
/// and a false positive for none. Zero denominators yield zero metrics.
PrF1Report prf1(const std::vector<Prediction>& predictions);

struct LabelDriftRow {
    Index total = 0;
    Index inliers = 0;
    Index drifted = 0;
    double drift_rate = 0.0;
};

struct LabelDriftTable {
    std::map<std::string, LabelDriftRow> rows;
    LabelDriftRow total;
};

/// Per unseen family: how many streamed samples were flagged as drifted.
LabelDriftTable label_drift_table(
    const std::map<std::string, std::vector<drift::Verdict>>& verdicts_by_family);

struct EpisodeSpec {
    Index n_way = 5;
    Index k_shot = 5;
    Index query_per_class = 15;
    Index episodes = 600;
    Seed seed = 0;

    void validate() const;
};

struct EpisodeResult {
    double mean_accuracy = 0.0;
    double ci95_halfwidth = 0.0;
    std::vector<double> per_episode_accuracies;
};

/// N-way K-shot episodes over per-family embedding rows: each episode draws
/// n_way families, k_shot supports and query_per_class disjoint queries per
/// family, and classifies queries by nearest support-mean prototype. Episode
/// seeds are derived from spec.seed by episode index, and family selection is
/// keyed by sorted family name, so results do not depend on evaluation order.
/// ci95_halfwidth = 1.96 * sample std (n-1) / sqrt(episodes).
EpisodeResult run_episodes(const std::map<std::string, Matrix>& embeddings_by_family,
                           const EpisodeSpec& spec);

}  // namespace adrift::eval
