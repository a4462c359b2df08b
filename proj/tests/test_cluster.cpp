#include "adrift/cluster.hpp"

#include "adrift/features.hpp"
#include "adrift/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <vector>

using namespace adrift;
using namespace adrift::cluster;

namespace {

/// Brute-force reference DBSCAN, written against the textbook description:
/// naive O(n^2) region queries, index-ordered scan, BFS expansion. Kept
/// independent of the production implementation on purpose.
struct OracleDbscan {
    std::vector<int> labels;
    int count = 0;
};

OracleDbscan oracle_dbscan(const Matrix& pts, double epsilon, Index min_pts) {
    const Index n = pts.rows();
    std::vector<std::vector<Index>> hood(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            double acc = 0.0;
            for (Index c = 0; c < pts.cols(); ++c) {
                const double d = pts(i, c) - pts(j, c);
                acc += d * d;
            }
            if (std::sqrt(acc) <= epsilon) hood[static_cast<std::size_t>(i)].push_back(j);
        }

    OracleDbscan out;
    out.labels.assign(static_cast<std::size_t>(n), -3);  // -3 = untouched
    for (Index i = 0; i < n; ++i) {
        if (out.labels[static_cast<std::size_t>(i)] != -3) continue;
        if (static_cast<Index>(hood[static_cast<std::size_t>(i)].size()) < min_pts) {
            out.labels[static_cast<std::size_t>(i)] = -1;
            continue;
        }
        const int cid = out.count++;
        out.labels[static_cast<std::size_t>(i)] = cid;
        std::queue<Index> work;
        for (Index s : hood[static_cast<std::size_t>(i)]) work.push(s);
        while (!work.empty()) {
            const Index q = work.front();
            work.pop();
            int& lab = out.labels[static_cast<std::size_t>(q)];
            if (lab == -1) lab = cid;
            if (lab != -3) continue;
            lab = cid;
            if (static_cast<Index>(hood[static_cast<std::size_t>(q)].size()) >= min_pts)
                for (Index s : hood[static_cast<std::size_t>(q)]) work.push(s);
        }
    }
    return out;
}

bool same_up_to_permutation(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    std::map<int, int> fwd;
    std::map<int, int> rev;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a[i] == -1) != (b[i] == -1)) return false;
        if (a[i] == -1) continue;
        auto [fit, fnew] = fwd.emplace(a[i], b[i]);
        if (!fnew && fit->second != b[i]) return false;
        auto [rit, rnew] = rev.emplace(b[i], a[i]);
        if (!rnew && rit->second != a[i]) return false;
    }
    return true;
}

Matrix coincident(Index n, const Vector& at) {
    Matrix m(n, at.size());
    for (Index i = 0; i < n; ++i) m.row(i) = at.transpose();
    return m;
}

}  // namespace

TEST_CASE("coincident points form one cluster without noise") {
    Vector at(2);
    at << 3.0, -1.0;
    ClusterAssignment r = dbscan(coincident(10, at), {0.5, 5});
    CHECK(r.cluster_count == 1);
    for (int label : r.labels) CHECK(label == 0);
}

TEST_CASE("two separated groups form two clusters") {
    Matrix pts(10, 1);
    for (Index i = 0; i < 5; ++i) pts(i, 0) = 0.0;
    for (Index i = 5; i < 10; ++i) pts(i, 0) = 10.0;
    ClusterAssignment r = dbscan(pts, {1.0, 3});
    CHECK(r.cluster_count == 2);
    for (Index i = 0; i < 5; ++i) CHECK(r.labels[static_cast<std::size_t>(i)] == 0);
    for (Index i = 5; i < 10; ++i) CHECK(r.labels[static_cast<std::size_t>(i)] == 1);
}

TEST_CASE("dbscan matches the brute-force oracle on random instances") {
    Rng rng(31337);
    for (int trial = 0; trial < 25; ++trial) {
        const Index n = 40 + static_cast<Index>(rng.uniform_index(160));
        const Index dim = 2 + static_cast<Index>(rng.uniform_index(4));
        Matrix pts(n, dim);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < dim; ++j) pts(i, j) = rng.uniform(0.0, 4.0);
        DbscanParams params{rng.uniform(0.2, 1.5), 2 + static_cast<Index>(rng.uniform_index(8))};

        ClusterAssignment mine = dbscan(pts, params);
        OracleDbscan ref = oracle_dbscan(pts, params.epsilon, params.min_pts);
        REQUIRE(mine.cluster_count == ref.count);
        CHECK(same_up_to_permutation(mine.labels, ref.labels));
    }
}

TEST_CASE("dbscan clusters are permutation-invariant as point sets") {
    // Tie-free by construction: tight blobs far apart, so no point can be a
    // border of two clusters.
    Rng rng(7);
    Matrix pts(30, 2);
    for (Index i = 0; i < 30; ++i) {
        const double cx = (i < 10) ? 0.0 : (i < 20) ? 50.0 : 100.0;
        pts(i, 0) = cx + rng.uniform(-0.5, 0.5);
        pts(i, 1) = rng.uniform(-0.5, 0.5);
    }
    DbscanParams params{2.0, 4};
    ClusterAssignment base = dbscan(pts, params);

    std::vector<Index> perm(30);
    for (Index i = 0; i < 30; ++i) perm[static_cast<std::size_t>(i)] = i;
    rng.shuffle(perm);
    Matrix shuffled(30, 2);
    for (Index i = 0; i < 30; ++i) shuffled.row(i) = pts.row(perm[static_cast<std::size_t>(i)]);
    ClusterAssignment moved = dbscan(shuffled, params);

    REQUIRE(base.cluster_count == moved.cluster_count);
    std::set<std::set<Index>> sets_a;
    std::set<std::set<Index>> sets_b;
    for (int c = 0; c < base.cluster_count; ++c) {
        std::set<Index> sa;
        std::set<Index> sb;
        for (Index i = 0; i < 30; ++i) {
            if (base.labels[static_cast<std::size_t>(i)] == c) sa.insert(i);
            if (moved.labels[static_cast<std::size_t>(i)] == c)
                sb.insert(perm[static_cast<std::size_t>(i)]);
        }
        sets_a.insert(sa);
        sets_b.insert(sb);
    }
    CHECK(sets_a == sets_b);
}

TEST_CASE("select_epsilon finds the junction of a two-segment curve") {
    // Chain 0..4 with unit gaps then 6, 9, 13: sorted 1-NN distances are
    // [1,1,1,1,1,2,3,4], exactly two segments meeting at index 4, value 1.
    Matrix pts(8, 1);
    pts << 0, 1, 2, 3, 4, 6, 9, 13;
    CHECK(select_epsilon(pts, 1) == doctest::Approx(1.0));
}

TEST_CASE("select_epsilon degenerate cases") {
    SUBCASE("coincident points floor at the configured minimum") {
        Vector at(2);
        at << 1.0, 1.0;
        CHECK(select_epsilon(coincident(6, at), 2) == doctest::Approx(1e-6));
        CHECK(select_epsilon(coincident(6, at), 2, 0.125) == doctest::Approx(0.125));
    }
    SUBCASE("flat positive curve returns the common distance") {
        Matrix pts(4, 1);
        pts << 0.0, 1.0, 10.0, 11.0;  // each point's 1-NN distance is 1
        CHECK(select_epsilon(pts, 1) == doctest::Approx(1.0));
    }
    SUBCASE("preconditions") {
        Matrix pts(3, 1);
        pts << 0, 1, 2;
        CHECK_THROWS(select_epsilon(pts, 0));
        CHECK_THROWS(select_epsilon(pts, 3));
    }
}

TEST_CASE("select_epsilon output lies within the k-distance range") {
    Rng rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const Index n = 20 + static_cast<Index>(rng.uniform_index(60));
        Matrix pts(n, 3);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < 3; ++j) pts(i, j) = rng.uniform(-2.0, 2.0);
        const Index k = 1 + static_cast<Index>(rng.uniform_index(5));
        const double eps = select_epsilon(pts, k);

        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (Index i = 0; i < n; ++i) {
            std::vector<double> d;
            for (Index j = 0; j < n; ++j)
                if (j != i) d.push_back((pts.row(i) - pts.row(j)).norm());
            std::sort(d.begin(), d.end());
            lo = std::min(lo, d[static_cast<std::size_t>(k - 1)]);
            hi = std::max(hi, d[static_cast<std::size_t>(k - 1)]);
        }
        CHECK(eps >= lo - 1e-12);
        CHECK(eps <= hi + 1e-12);
    }
}

TEST_CASE("select_epsilon separates three synthetic blobs") {
    features::SyntheticScenario spec =
        features::make_separated_scenario(3, 0, 3, 40, 6.0, 0.0, 505);
    features::ScenarioData data = features::generate_scenario(spec);
    const double eps = select_epsilon(data.train.data, 8);
    ClusterAssignment r = dbscan(data.train.data, {eps, 8});
    CHECK(r.cluster_count == 3);
}

TEST_CASE("threshold policies reproduce hand arithmetic") {
    Vector sq(4);
    sq << 1.0, 1.0, 4.0, 4.0;
    CHECK(threshold_from_squared_distances(sq, {ThresholdKind::max_distance, 1.0}) ==
          doctest::Approx(4.0));
    // mean 2.5, population std 1.5
    CHECK(threshold_from_squared_distances(sq, {ThresholdKind::mean_plus_std, 1.0}) ==
          doctest::Approx(4.0));
    CHECK(threshold_from_squared_distances(sq, {ThresholdKind::mean_plus_std, 3.0}) ==
          doctest::Approx(7.0));
    Vector one(1);
    one << 0.0;
    CHECK(threshold_from_squared_distances(one, {ThresholdKind::max_distance, 1.0}) == 0.0);
}

TEST_CASE("build_cluster_model on coincident samples") {
    Vector z(2);
    z << 0.25, -0.75;
    std::vector<std::string> labels(10, "fam");
    ClusterBuildOptions options;
    options.policy = {ThresholdKind::max_distance, 1.0};
    std::vector<Cluster> model = build_cluster_model(coincident(10, z), labels, options);
    REQUIRE(model.size() == 1);
    CHECK(model[0].family == "fam");
    CHECK((model[0].centroid - z).norm() == 0.0);
    CHECK(model[0].threshold == 0.0);
    CHECK(model[0].member_count == 10);
    CHECK(model[0].origin == ClusterOrigin::trained);
}

TEST_CASE("build_cluster_model per family with max policy keeps members inside") {
    features::SyntheticScenario spec =
        features::make_separated_scenario(3, 0, 3, 60, 8.0, 0.0, 606);
    features::ScenarioData data = features::generate_scenario(spec);
    ClusterBuildOptions options;
    options.policy = {ThresholdKind::max_distance, 1.0};
    // A generous epsilon makes every sample a cluster member, so the
    // max-distance construction guarantees acceptance for all of them.
    for (const char* fam : {"family-0", "family-1", "family-2"})
        options.family_overrides[fam] = {10.0, 6};
    std::vector<Cluster> model =
        build_cluster_model(data.train.data, data.train.labels, options);
    REQUIRE(model.size() == 3);

    // Family tags are unique per cluster and sorted by name.
    for (std::size_t i = 1; i < model.size(); ++i)
        CHECK(model[i - 1].family < model[i].family);

    for (Index i = 0; i < data.train.rows(); ++i) {
        Assignment a = assign(Vector(data.train.data.row(i).transpose()), model);
        CHECK(a.accepted);
        CHECK(a.family == data.train.labels[static_cast<std::size_t>(i)]);
    }

    SUBCASE("the default epsilon heuristic keeps most samples in-family") {
        std::vector<Cluster> heuristic =
            build_cluster_model(data.train.data, data.train.labels, {});
        Index good = 0;
        for (Index i = 0; i < data.train.rows(); ++i) {
            Assignment a = assign(Vector(data.train.data.row(i).transpose()), heuristic);
            if (a.accepted && a.family == data.train.labels[static_cast<std::size_t>(i)])
                good += 1;
        }
        CHECK(good >= (data.train.rows() * 9) / 10);
    }
}

TEST_CASE("build_cluster_model honors per-family overrides and reports pure noise") {
    Rng rng(404);
    Matrix pts(12, 2);
    for (Index i = 0; i < 12; ++i) {
        pts(i, 0) = 100.0 * static_cast<double>(i);
        pts(i, 1) = rng.uniform(-0.1, 0.1);
    }
    std::vector<std::string> labels(12, "sparse");
    ClusterBuildOptions options;
    options.family_overrides["sparse"] = {1e-9, 5};
    CHECK_THROWS_WITH_AS(build_cluster_model(pts, labels, options),
                         doctest::Contains("sparse"), std::runtime_error);

    options.family_overrides["sparse"] = {1000.0, 5};
    std::vector<Cluster> model = build_cluster_model(pts, labels, options);
    REQUIRE(model.size() == 1);
    CHECK(model[0].member_count == 12);
}

TEST_CASE("assign accepts inclusively and breaks ties by index") {
    Vector c0(2);
    c0 << 0.0, 0.0;
    Vector c1(2);
    c1 << 4.0, 0.0;
    std::vector<Cluster> clusters = {
        {"alpha", c0, 4.0, 5, ClusterOrigin::trained},
        {"beta", c1, 4.0, 5, ClusterOrigin::trained},
    };

    Vector at_centroid = c0;
    Assignment a = assign(at_centroid, clusters);
    CHECK(a.accepted);
    CHECK(a.family == "alpha");
    CHECK(a.distance == 0.0);

    Vector boundary(2);
    boundary << 2.0, 0.0;  // squared distance 4 to both centroids
    Assignment b = assign(boundary, clusters);
    CHECK(b.accepted);
    CHECK(b.family == "alpha");  // tie goes to the lowest index
    CHECK(b.nearest == 0);

    Vector far(2);
    far << 100.0, 100.0;
    Assignment d = assign(far, clusters);
    CHECK_FALSE(d.accepted);
    CHECK(d.family.empty());
    CHECK(d.nearest == 1);

    CHECK_THROWS(assign(at_centroid, {}));
}

TEST_CASE("assign decisions are scale-consistent") {
    Rng rng(2718);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Cluster> clusters;
        for (int c = 0; c < 4; ++c) {
            Vector center(3);
            for (Index j = 0; j < 3; ++j) center(j) = rng.uniform(-5.0, 5.0);
            clusters.push_back({"f" + std::to_string(c), center, rng.uniform(0.0, 9.0), 1,
                                ClusterOrigin::trained});
        }
        Vector z(3);
        for (Index j = 0; j < 3; ++j) z(j) = rng.uniform(-8.0, 8.0);
        const double s = rng.uniform(0.1, 10.0);

        Assignment before = assign(z, clusters);
        std::vector<Cluster> scaled = clusters;
        for (Cluster& c : scaled) {
            c.centroid *= s;
            c.threshold *= s * s;
        }
        Assignment after = assign(Vector(s * z), scaled);
        CHECK(before.accepted == after.accepted);
        CHECK(before.nearest == after.nearest);
        CHECK(before.family == after.family);
    }
}
