#pragma once

#include "adrift/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace adrift::cluster {

struct DbscanParams {
    double epsilon = 0.0;
    Index min_pts = 0;

    void validate() const;
};

/// Per-sample labels: -1 for noise, otherwise contiguous cluster ids from 0.
struct ClusterAssignment {
    std::vector<int> labels;
    int cluster_count = 0;
};

/// Classical DBSCAN. Core point iff at least min_pts neighbors (self
/// included) lie within Euclidean distance epsilon. Points are scanned in
/// index order with FIFO expansion, so border points are claimed by the
/// first core cluster that reaches them.
ClusterAssignment dbscan(const Matrix& points, const DbscanParams& params);

/// Knee of the sorted k-distance curve: each point's distance to its k-th
/// nearest neighbor (self excluded), sorted ascending; returns the curve
/// value at maximum perpendicular distance to the endpoint chord. Flat or
/// degenerate curves fall back to the curve value, floored at epsilon_floor.
double select_epsilon(const Matrix& points, Index k, double epsilon_floor = 1e-6);

enum class ThresholdKind { max_distance, mean_plus_std };

struct ThresholdPolicy {
    ThresholdKind kind = ThresholdKind::mean_plus_std;
    double std_multiplier = 3.0;

    void validate() const;
};

/// Threshold over squared distances to a centroid: the maximum, or their
/// mean plus a multiple of the population standard deviation.
double threshold_from_squared_distances(const Vector& squared, const ThresholdPolicy& policy);

enum class ClusterOrigin { trained, prototype };

struct Cluster {
    std::string family;
    Vector centroid;
    double threshold = 0.0;  // bound on squared distance to the centroid
    Index member_count = 0;
    ClusterOrigin origin = ClusterOrigin::trained;
};

struct ClusterBuildOptions {
    ThresholdPolicy policy;
    /// Per-family DBSCAN overrides; families not listed use select_epsilon
    /// and min_pts = 2 * latent_dim.
    std::map<std::string, DbscanParams> family_overrides;
    double epsilon_floor = 1e-6;
    std::optional<Index> min_pts_override;
};

/// Per-family DBSCAN over embeddings: noise discarded, one Cluster per
/// discovered cluster (centroid = member mean, threshold by policy over
/// squared member distances). Output ordered by family name, then discovery
/// order. A family whose clustering yields only noise is an error.
std::vector<Cluster> build_cluster_model(const Matrix& embeddings,
                                         const std::vector<std::string>& labels,
                                         const ClusterBuildOptions& options = {});

struct Assignment {
    bool accepted = false;
    std::string family;        // set when accepted
    std::size_t nearest = 0;   // index into the cluster list
    double distance = 0.0;     // squared distance to the nearest centroid
};

/// Nearest centroid by squared distance; accepted iff the distance is within
/// that cluster's threshold (inclusive). Ties go to the lowest index.
Assignment assign(const Vector& z, const std::vector<Cluster>& clusters);

}  // namespace adrift::cluster
