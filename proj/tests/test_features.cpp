#include "adrift/features.hpp"

#include "adrift/rng.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

using namespace adrift;
using namespace adrift::features;

namespace {

FeatureMatrix tiny_labeled(Index rows_per_class = 25) {
    FeatureMatrix m;
    m.data.resize(2 * rows_per_class, 3);
    Rng rng(11);
    for (Index i = 0; i < m.data.rows(); ++i) {
        for (Index j = 0; j < 3; ++j) m.data(i, j) = rng.uniform(-1.0, 1.0);
        m.labels.push_back(i < rows_per_class ? "a" : "b");
        m.ids.push_back("s" + std::to_string(i));
    }
    return m;
}

std::filesystem::path temp_csv(const std::string& stem) {
    return std::filesystem::temp_directory_path() / (stem + ".csv");
}

}  // namespace

TEST_CASE("quantile map knots for {1,2,3,4} at resolution 5") {
    FeatureMatrix m;
    m.data.resize(4, 1);
    m.data << 1, 2, 3, 4;
    PreprocessState state = fit_preprocess(m, 0.0, 5);
    REQUIRE(state.retained_width() == 1);
    REQUIRE(state.quantile_maps.rows() == 5);
    // Frozen by hand: linear interpolation of the sorted column at
    // positions q * (n - 1) for q in {0, .25, .5, .75, 1}.
    CHECK(state.quantile_maps(0, 0) == doctest::Approx(1.0));
    CHECK(state.quantile_maps(1, 0) == doctest::Approx(1.75));
    CHECK(state.quantile_maps(2, 0) == doctest::Approx(2.5));
    CHECK(state.quantile_maps(3, 0) == doctest::Approx(3.25));
    CHECK(state.quantile_maps(4, 0) == doctest::Approx(4.0));

    Matrix probe(5, 1);
    probe << 2.5, 1.0, 4.0, 2.0, 0.0;
    Matrix mapped = apply_preprocess(state, probe);
    CHECK(mapped(0, 0) == doctest::Approx(0.5));
    CHECK(mapped(1, 0) == doctest::Approx(0.0));
    CHECK(mapped(2, 0) == doctest::Approx(1.0));
    CHECK(mapped(3, 0) == doctest::Approx(1.0 / 3.0));  // frozen: (1 + 1/3) / 4
    CHECK(mapped(4, 0) == doctest::Approx(0.0));        // clamps below training min
}

TEST_CASE("repeated values map to the plateau midpoint") {
    FeatureMatrix m;
    m.data.resize(5, 1);
    m.data << 1, 1, 1, 1, 2;
    PreprocessState state = fit_preprocess(m, 0.0, 5);
    Matrix probe(2, 1);
    probe << 1.0, 1.5;
    Matrix mapped = apply_preprocess(state, probe);
    CHECK(mapped(0, 0) == doctest::Approx(0.375));  // knots [1,1,1,1,2], midpoint of [0,3]
    CHECK(mapped(1, 0) == doctest::Approx(0.875));
}

TEST_CASE("variance thresholding drops constant features") {
    FeatureMatrix m;
    m.data.resize(4, 3);
    m.data << 1, 5, 0.0,
              2, 5, 0.1,
              3, 5, 0.2,
              4, 5, 0.3;
    PreprocessState state = fit_preprocess(m, 0.0, 11);
    REQUIRE(state.retained_indices.size() == 2);
    CHECK(state.retained_indices[0] == 0);
    CHECK(state.retained_indices[1] == 2);
    CHECK(state.original_width == 3);

    SUBCASE("a floor above every variance is an error") {
        CHECK_THROWS(fit_preprocess(m, 100.0, 11));
    }
    SUBCASE("apply rejects width mismatch") {
        Matrix bad(1, 2);
        bad << 0.0, 0.0;
        CHECK_THROWS(apply_preprocess(state, bad));
    }
}

TEST_CASE("preprocess maps training data into the unit interval") {
    FeatureMatrix m = tiny_labeled();
    PreprocessState state = fit_preprocess(m, 0.0, 101);
    Matrix mapped = apply_preprocess(state, m.data);
    CHECK(mapped.minCoeff() >= 0.0);
    CHECK(mapped.maxCoeff() <= 1.0);
    // Every training column spans the full interval.
    for (Index j = 0; j < mapped.cols(); ++j) {
        CHECK(mapped.col(j).minCoeff() == doctest::Approx(0.0));
        CHECK(mapped.col(j).maxCoeff() == doctest::Approx(1.0));
    }
    Vector row = apply_preprocess_row(state, Vector(m.data.row(3).transpose()));
    CHECK((row - mapped.row(3).transpose()).norm() == doctest::Approx(0.0));
}

TEST_CASE("stratified split keeps per-family proportions") {
    FeatureMatrix m = tiny_labeled(25);
    auto [train, test] = split(m, 0.8, 99);
    CHECK(train.rows() == 40);
    CHECK(test.rows() == 10);
    auto train_groups = train.rows_by_label();
    auto test_groups = test.rows_by_label();
    CHECK(train_groups.at("a").size() == 20);
    CHECK(train_groups.at("b").size() == 20);
    CHECK(test_groups.at("a").size() == 5);
    CHECK(test_groups.at("b").size() == 5);

    // No id lost or duplicated.
    std::set<std::string> ids(train.ids.begin(), train.ids.end());
    ids.insert(test.ids.begin(), test.ids.end());
    CHECK(ids.size() == static_cast<std::size_t>(m.rows()));

    auto [train2, test2] = split(m, 0.8, 99);
    CHECK(train.ids == train2.ids);
    CHECK(test.ids == test2.ids);

    SUBCASE("extreme fractions still leave both parts non-empty") {
        auto [t1, t2] = split(m, 0.999, 1);
        CHECK(t1.rows() == 48);
        CHECK(t2.rows() == 2);
    }
    SUBCASE("a singleton family cannot be split") {
        FeatureMatrix bad = tiny_labeled(2);
        bad.labels.back() = "lonely";
        CHECK_THROWS(split(bad, 0.8, 1));
    }
}

TEST_CASE("csv round-trip preserves values, ids, and labels") {
    FeatureMatrix m = tiny_labeled(4);
    m.data(0, 0) = 0.1;  // not exactly representable; round-trip must still match
    m.data(1, 1) = -1e-17;
    m.data(2, 2) = 12345.6789;
    auto path = temp_csv("adrift-roundtrip");
    write_csv(m, path);
    FeatureMatrix back = load_csv(path, std::string("label"), std::string("id"));
    REQUIRE(back.rows() == m.rows());
    REQUIRE(back.cols() == m.cols());
    CHECK((back.data - m.data).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.labels == m.labels);
    CHECK(back.ids == m.ids);
    std::filesystem::remove(path);
}

TEST_CASE("csv loader rejects malformed input") {
    auto path = temp_csv("adrift-malformed");
    SUBCASE("non-numeric cell") {
        std::ofstream(path) << "f0,f1\n1.0,oops\n";
        CHECK_THROWS(load_csv(path));
    }
    SUBCASE("ragged row") {
        std::ofstream(path) << "f0,f1\n1.0\n";
        CHECK_THROWS(load_csv(path));
    }
    SUBCASE("non-finite value") {
        std::ofstream(path) << "f0,f1\n1.0,nan\n";
        CHECK_THROWS(load_csv(path));
    }
    SUBCASE("missing label column") {
        std::ofstream(path) << "f0,f1\n1.0,2.0\n";
        CHECK_THROWS(load_csv(path, std::string("label")));
    }
    std::filesystem::remove(path);
}

TEST_CASE("scenario generation is deterministic and well-formed") {
    SyntheticScenario spec =
        make_separated_scenario(3, 2, 4, 50, 6.0, 3.0, 2024);
    spec.validate();
    ScenarioData a = generate_scenario(spec);
    ScenarioData b = generate_scenario(spec);
    CHECK((a.train.data - b.train.data).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.evolved.data - b.evolved.data).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.unseen.data - b.unseen.data).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.train.rows() == 150);
    CHECK(a.evolved.rows() == 150);
    CHECK(a.unseen.rows() == 100);
    CHECK(a.train.cols() == 4);
    auto groups = a.train.rows_by_label();
    CHECK(groups.size() == 3);
    for (const auto& [name, rows] : groups) CHECK(rows.size() == 50);
    CHECK(a.unseen.rows_by_label().count("unseen-0") == 1);

    // Center geometry: every pair of distinct family centers, unseen ones
    // included, sits at least `separation` standard deviations apart.
    std::vector<Vector> centers;
    for (const auto& blob : spec.known_families) centers.push_back(blob.center);
    for (const auto& blob : spec.unseen_families) centers.push_back(blob.center);
    for (std::size_t i = 0; i < centers.size(); ++i)
        for (std::size_t j = i + 1; j < centers.size(); ++j)
            CHECK((centers[i] - centers[j]).norm() >= 6.0 - 1e-9);

    // Unseen coordinates stay within the span of known-family values, so the
    // family differs by a combination of features rather than one
    // out-of-range feature.
    for (const auto& blob : spec.unseen_families)
        CHECK(blob.center.maxCoeff() <
              spec.known_families[0].center.maxCoeff() + 3.0);

    // The evolved shift moves each family by the requested sigma count.
    for (const auto& [name, shift] : spec.evolved_shift)
        CHECK(shift.displacement.norm() == doctest::Approx(3.0));
}

TEST_CASE("scenario sampling matches blob moments loosely") {
    SyntheticScenario spec = make_separated_scenario(2, 0, 3, 4000, 8.0, 0.0, 7);
    ScenarioData data = generate_scenario(spec);
    auto groups = data.train.rows_by_label();
    for (const auto& blob : spec.known_families) {
        const auto& rows = groups.at(blob.name);
        Vector mean = Vector::Zero(3);
        for (Index r : rows) mean += data.train.data.row(r).transpose();
        mean /= static_cast<double>(rows.size());
        CHECK((mean - blob.center).norm() < 0.1);
    }
}
