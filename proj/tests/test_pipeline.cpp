#include "adrift/pipeline.hpp"

#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace adrift;
namespace fs = std::filesystem;

namespace {

struct EpochGuard {
    explicit EpochGuard(const char* value) { setenv("SOURCE_DATE_EPOCH", value, 1); }
    ~EpochGuard() { unsetenv("SOURCE_DATE_EPOCH"); }
};

config::RunConfig small_config(Seed seed) {
    config::RunConfig cfg = config::parse(R"({
        "data": {"quantile_resolution": 100},
        "net": {
            "encoder": [{"width": 8, "batchnorm": false}, {"width": 3, "activation": "none"}],
            "decoder_hidden": [{"width": 8, "batchnorm": false}],
            "train": {"epochs": 60, "batch_triplets": 16, "learning_rate": 0.005}
        },
        "scenario": {"known_families": 3, "unseen_families": 0, "ambient_dim": 3,
                     "samples_per_family": 30}
    })");
    cfg.seed = seed;
    return cfg;
}

features::FeatureMatrix scenario_train(const config::RunConfig& cfg) {
    features::SyntheticScenario spec = features::make_separated_scenario(
        cfg.scenario.known_families, cfg.scenario.unseen_families, cfg.scenario.ambient_dim,
        cfg.scenario.samples_per_family, cfg.scenario.separation,
        cfg.scenario.evolved_shift_sigmas, cfg.seed);
    return features::generate_scenario(spec).train;
}

net::AutoencoderModel identity_model() {
    std::vector<net::LayerSpec> enc{{2, false, net::Activation::none, 0.0}};
    std::vector<net::LayerSpec> dec{{2, false, net::Activation::none, 0.0}};
    net::AutoencoderModel model = net::init_model(enc, dec, 2, 0);
    const std::vector<double> params{1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0};
    net::import_parameters(model, params);
    return model;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("run_training produces a complete, dated checkpoint") {
    EpochGuard guard("1700000000");
    config::RunConfig cfg = small_config(21);
    features::FeatureMatrix data = scenario_train(cfg);
    pipeline::TrainOutcome out = pipeline::run_training(cfg, data, "deadbeef00000000");

    CHECK(out.train_rows + out.validation_rows == data.rows());
    CHECK(out.train_rows == 72);  // 80% of 90, stratified
    CHECK(out.ckpt.model.latent_dim == 3);
    CHECK(out.ckpt.model.preprocess.original_width == 3);
    CHECK(out.ckpt.model.preprocess.quantile_maps.rows() == 100);
    CHECK(out.ckpt.clusters.size() >= 3);
    CHECK(std::isfinite(out.validation_mse));
    REQUIRE(out.validation_triplet.has_value());
    CHECK(std::isfinite(*out.validation_triplet));
    CHECK(out.ckpt.provenance.created_at == "2023-11-14T22:13:20Z");
    CHECK(out.ckpt.provenance.seed == 21);
    CHECK(out.ckpt.provenance.data_fingerprint == "deadbeef00000000");
    CHECK(out.ckpt.train_config.seed != cfg.seed);  // derived, not copied

    // The decoder's reconstruction layer tracks the preprocessed width.
    CHECK(out.ckpt.model.decoder.back().spec.width == 3);

    features::FeatureMatrix unlabeled = data;
    unlabeled.labels.clear();
    CHECK_THROWS_WITH_AS(pipeline::run_training(cfg, unlabeled, "x"),
                         doctest::Contains("labels"), std::runtime_error);
}

TEST_CASE("identical config and data give byte-identical checkpoints") {
    EpochGuard guard("1700000000");
    config::RunConfig cfg = small_config(33);
    features::FeatureMatrix data = scenario_train(cfg);

    const fs::path p1 = fs::temp_directory_path() / "adrift-pipe-a.bin";
    const fs::path p2 = fs::temp_directory_path() / "adrift-pipe-b.bin";
    checkpoint::save_checkpoint(pipeline::run_training(cfg, data, "f").ckpt, p1);
    checkpoint::save_checkpoint(pipeline::run_training(cfg, data, "f").ckpt, p2);
    CHECK(slurp(p1) == slurp(p2));

    config::RunConfig other = small_config(34);
    checkpoint::save_checkpoint(pipeline::run_training(other, scenario_train(other), "f").ckpt,
                                p2);
    CHECK(slurp(p1) != slurp(p2));
    fs::remove(p1);
    fs::remove(p2);
}

TEST_CASE("make_detector arms the retrain context from the checkpoint") {
    config::RunConfig cfg = small_config(55);
    features::FeatureMatrix data = scenario_train(cfg);
    pipeline::TrainOutcome out = pipeline::run_training(cfg, data, "f");

    drift::DetectorState bare = pipeline::make_detector(out.ckpt, cfg, std::nullopt);
    CHECK(!bare.retrain.has_value());

    drift::DetectorState armed = pipeline::make_detector(out.ckpt, cfg, data);
    REQUIRE(armed.retrain.has_value());
    CHECK(armed.retrain->train_data.rows() == data.rows());
    CHECK(armed.retrain->quantile_resolution == 100);
    CHECK(armed.retrain->train_config.seed == out.ckpt.train_config.seed);
    REQUIRE(armed.retrain->encoder_arch.size() == out.ckpt.model.encoder.size());
    CHECK(armed.retrain->encoder_arch[0].width == 8);
    CHECK(armed.retrain->decoder_arch.back().width == 3);

    features::FeatureMatrix unlabeled = data;
    unlabeled.labels.clear();
    CHECK_THROWS_AS(pipeline::make_detector(out.ckpt, cfg, unlabeled), std::runtime_error);
}

TEST_CASE("tally_verdicts splits counts by drift and nearest-family truth") {
    std::vector<cluster::Cluster> clusters(2);
    clusters[0].family = "alpha";
    clusters[0].centroid = Vector::Zero(2);
    clusters[0].threshold = 1.0;
    clusters[1].family = "beta";
    clusters[1].centroid = Vector::Zero(2);
    clusters[1].centroid(0) = 10.0;
    clusters[1].threshold = 1.0;

    drift::DetectorState state = drift::init_detector(identity_model(), clusters, {});
    Matrix rows(4, 2);
    rows << 0.0, 0.0,   // classified alpha, truth alpha
        0.5, 0.0,       // classified alpha, truth beta
        5.0, 5.0,       // drifted, tie -> nearest alpha, truth alpha
        15.0, 0.0;      // drifted, nearest beta, truth alpha
    std::vector<drift::Verdict> verdicts = drift::classify_batch(state, rows, true);
    std::vector<std::string> truth{"alpha", "beta", "alpha", "alpha"};

    eval::GroupedDriftCounts counts = pipeline::tally_verdicts(state.clusters, truth, verdicts);
    CHECK(counts.at("alpha").correct_not_drifted == 1);
    CHECK(counts.at("alpha").correct_drifted == 1);
    CHECK(counts.at("alpha").wrong_drifted == 1);
    CHECK(counts.at("alpha").wrong_not_drifted == 0);
    CHECK(counts.at("beta").wrong_not_drifted == 1);
    CHECK(counts.at("beta").total() == 1);

    std::vector<eval::Prediction> preds = pipeline::to_predictions(truth, verdicts);
    REQUIRE(preds.size() == 4);
    CHECK(preds[0].predicted == std::optional<std::string>("alpha"));
    CHECK(preds[1].predicted == std::optional<std::string>("alpha"));
    CHECK(!preds[2].predicted.has_value());
    CHECK(preds[1].truth == "beta");

    truth.pop_back();
    CHECK_THROWS_AS(pipeline::tally_verdicts(state.clusters, truth, verdicts),
                    std::invalid_argument);
}

TEST_CASE("embed and embeddings_by_family") {
    net::AutoencoderModel model = identity_model();
    Matrix raw(2, 2);
    raw << 1.0, 2.0, 3.0, 4.0;
    Matrix z = pipeline::embed(model, raw);  // unfitted preprocess: plain encode
    CHECK((z.array() == raw.array()).all());

    features::FeatureMatrix data;
    data.data = raw;
    data.labels = {"b", "a"};
    std::map<std::string, Matrix> groups = pipeline::embeddings_by_family(model, data);
    REQUIRE(groups.size() == 2);
    CHECK(groups.at("a").rows() == 1);
    CHECK(groups.at("a")(0, 0) == 3.0);
    CHECK(groups.at("b")(0, 1) == 2.0);

    data.labels.clear();
    CHECK_THROWS_AS(pipeline::embeddings_by_family(model, data), std::invalid_argument);
}
