#include "adrift/cluster.hpp"

#include "adrift/distance.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>

namespace adrift::cluster {

void DbscanParams::validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw std::invalid_argument("dbscan epsilon must be finite and positive");
    if (min_pts <= 0) throw std::invalid_argument("dbscan min_pts must be positive");
}

void ThresholdPolicy::validate() const {
    if (kind == ThresholdKind::mean_plus_std &&
        (!(std_multiplier > 0.0) || !std::isfinite(std_multiplier)))
        throw std::invalid_argument("threshold std_multiplier must be finite and positive");
}

namespace {

std::vector<Index> neighbors_within(const Matrix& points, Index center, double epsilon_sq) {
    std::vector<Index> out;
    Vector d = squared_distances_to(points, points.row(center).transpose());
    for (Index j = 0; j < points.rows(); ++j)
        if (d(j) <= epsilon_sq) out.push_back(j);
    return out;
}

}  // namespace

ClusterAssignment dbscan(const Matrix& points, const DbscanParams& params) {
    params.validate();
    const Index n = points.rows();
    if (n == 0) throw std::invalid_argument("dbscan: empty input");
    const double eps_sq = params.epsilon * params.epsilon;

    constexpr int kUnvisited = -2;
    ClusterAssignment result;
    result.labels.assign(static_cast<std::size_t>(n), kUnvisited);

    int next_cluster = 0;
    for (Index i = 0; i < n; ++i) {
        if (result.labels[static_cast<std::size_t>(i)] != kUnvisited) continue;
        std::vector<Index> seeds = neighbors_within(points, i, eps_sq);
        if (static_cast<Index>(seeds.size()) < params.min_pts) {
            result.labels[static_cast<std::size_t>(i)] = -1;
            continue;
        }
        const int cluster = next_cluster++;
        result.labels[static_cast<std::size_t>(i)] = cluster;
        std::deque<Index> frontier(seeds.begin(), seeds.end());
        while (!frontier.empty()) {
            const Index q = frontier.front();
            frontier.pop_front();
            int& label = result.labels[static_cast<std::size_t>(q)];
            if (label == -1) label = cluster;  // noise becomes a border point
            if (label != kUnvisited) continue;
            label = cluster;
            std::vector<Index> reach = neighbors_within(points, q, eps_sq);
            if (static_cast<Index>(reach.size()) >= params.min_pts)
                frontier.insert(frontier.end(), reach.begin(), reach.end());
        }
    }
    result.cluster_count = next_cluster;
    return result;
}

double select_epsilon(const Matrix& points, Index k, double epsilon_floor) {
    const Index n = points.rows();
    if (k < 1) throw std::invalid_argument("select_epsilon: k must be at least 1");
    if (n <= k) throw std::invalid_argument("select_epsilon: needs more points than k");

    std::vector<double> kth(static_cast<std::size_t>(n));
    std::vector<double> row(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        Vector d = squared_distances_to(points, points.row(i).transpose());
        for (Index j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = d(j);
        // Self sits at distance 0, so the k-th neighbor excluding self is
        // the element at rank k of the full row.
        std::nth_element(row.begin(), row.begin() + k, row.end());
        kth[static_cast<std::size_t>(i)] = std::sqrt(row[static_cast<std::size_t>(k)]);
    }
    std::sort(kth.begin(), kth.end());

    const double x0 = 0.0;
    const double y0 = kth.front();
    const double x1 = static_cast<double>(n - 1);
    const double y1 = kth.back();
    const double dx = x1 - x0;
    const double dy = y1 - y0;
    const double chord = std::hypot(dx, dy);

    double best = y0;
    if (chord > 0.0 && dy != 0.0) {
        double best_dist = -1.0;
        for (Index i = 0; i < n; ++i) {
            const double x = static_cast<double>(i);
            const double y = kth[static_cast<std::size_t>(i)];
            const double dist = std::abs(dy * (x - x0) - dx * (y - y0)) / chord;
            if (dist > best_dist) {
                best_dist = dist;
                best = y;
            }
        }
    }
    return std::max(best, epsilon_floor);
}

double threshold_from_squared_distances(const Vector& squared, const ThresholdPolicy& policy) {
    policy.validate();
    if (squared.size() == 0)
        throw std::invalid_argument("threshold needs at least one distance");
    if (policy.kind == ThresholdKind::max_distance) return squared.maxCoeff();
    const double mean = squared.mean();
    const double var = (squared.array() - mean).square().mean();
    return mean + policy.std_multiplier * std::sqrt(var);
}

std::vector<Cluster> build_cluster_model(const Matrix& embeddings,
                                         const std::vector<std::string>& labels,
                                         const ClusterBuildOptions& options) {
    if (embeddings.rows() == 0) throw std::invalid_argument("build_cluster_model: empty input");
    if (static_cast<Index>(labels.size()) != embeddings.rows())
        throw std::invalid_argument("build_cluster_model: one label per row required");
    options.policy.validate();

    std::map<std::string, std::vector<Index>> families;
    for (Index i = 0; i < embeddings.rows(); ++i) families[labels[static_cast<std::size_t>(i)]].push_back(i);

    const Index latent_dim = embeddings.cols();
    const Index default_min_pts =
        options.min_pts_override ? *options.min_pts_override : 2 * latent_dim;

    std::vector<Cluster> model;
    for (const auto& [family, rows] : families) {
        Matrix pts(static_cast<Index>(rows.size()), latent_dim);
        for (std::size_t r = 0; r < rows.size(); ++r)
            pts.row(static_cast<Index>(r)) = embeddings.row(rows[r]);

        DbscanParams params;
        if (auto it = options.family_overrides.find(family); it != options.family_overrides.end()) {
            params = it->second;
        } else {
            params.min_pts = default_min_pts;
            if (pts.rows() <= params.min_pts)
                throw std::invalid_argument("family '" + family + "' has " +
                                            std::to_string(pts.rows()) +
                                            " samples but min_pts is " +
                                            std::to_string(params.min_pts));
            params.epsilon = select_epsilon(pts, params.min_pts, options.epsilon_floor);
        }

        ClusterAssignment assignment = dbscan(pts, params);
        if (assignment.cluster_count == 0)
            throw std::runtime_error("family '" + family +
                                     "' clustered to pure noise; epsilon or min_pts need tuning");

        for (int c = 0; c < assignment.cluster_count; ++c) {
            std::vector<Index> members;
            for (Index r = 0; r < pts.rows(); ++r)
                if (assignment.labels[static_cast<std::size_t>(r)] == c) members.push_back(r);
            Vector centroid = Vector::Zero(latent_dim);
            for (Index r : members) centroid += pts.row(r).transpose();
            centroid /= static_cast<double>(members.size());
            Vector sq(static_cast<Index>(members.size()));
            for (std::size_t m = 0; m < members.size(); ++m)
                sq(static_cast<Index>(m)) =
                    squared_distance(pts.row(members[m]).transpose(), centroid);
            Cluster cluster;
            cluster.family = family;
            cluster.centroid = std::move(centroid);
            cluster.threshold = threshold_from_squared_distances(sq, options.policy);
            cluster.member_count = static_cast<Index>(members.size());
            cluster.origin = ClusterOrigin::trained;
            model.push_back(std::move(cluster));
        }
    }
    return model;
}

Assignment assign(const Vector& z, const std::vector<Cluster>& clusters) {
    if (clusters.empty()) throw std::invalid_argument("assign: empty cluster list");
    Assignment out;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        if (clusters[i].centroid.size() != z.size())
            throw std::invalid_argument("assign: latent width mismatch");
        const double d = squared_distance(z, clusters[i].centroid);
        if (d < best) {
            best = d;
            out.nearest = i;
        }
    }
    out.distance = best;
    const Cluster& nearest = clusters[out.nearest];
    if (best <= nearest.threshold) {
        out.accepted = true;
        out.family = nearest.family;
    }
    return out;
}

}  // namespace adrift::cluster
