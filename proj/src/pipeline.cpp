#include "adrift/pipeline.hpp"

#include "adrift/rng.hpp"

#include <cstdlib>
#include <ctime>
#include <stdexcept>
#include <utility>

namespace adrift::pipeline {

namespace {

// Stream tags for deriving stage seeds from the run seed. Values are part
// of the reproducibility contract: changing them changes every artifact.
constexpr Seed kSplitTag = 1;
constexpr Seed kTrainTag = 2;
constexpr Seed kValTripletTag = 3;

// Validation rows restricted to families that can form triplets.
features::FeatureMatrix triplet_pool(const features::FeatureMatrix& val) {
    std::vector<Index> keep;
    for (const auto& [family, rows] : val.rows_by_label())
        if (rows.size() >= 2) keep.insert(keep.end(), rows.begin(), rows.end());

    features::FeatureMatrix pool;
    pool.data = Matrix(static_cast<Index>(keep.size()), val.cols());
    Index out = 0;
    for (Index row : keep) {
        pool.data.row(out++) = val.data.row(row);
        pool.labels.push_back(val.labels[static_cast<std::size_t>(row)]);
    }
    return pool;
}

bool can_form_triplets(const features::FeatureMatrix& pool) {
    return pool.rows() >= 4 && pool.rows_by_label().size() >= 2;
}

}  // namespace

std::string provenance_timestamp() {
    std::time_t now;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
        char* end = nullptr;
        const long long epoch = std::strtoll(env, &end, 10);
        if (end == env || *end != '\0')
            throw std::runtime_error("SOURCE_DATE_EPOCH is not an integer: '" +
                                     std::string(env) + "'");
        now = static_cast<std::time_t>(epoch);
    } else {
        now = std::time(nullptr);
    }
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

TrainOutcome run_training(const config::RunConfig& cfg, const features::FeatureMatrix& data,
                          const std::string& data_fingerprint) {
    cfg.validate();
    data.validate();
    if (!data.has_labels())
        throw std::runtime_error("training data must carry family labels");

    features::PreprocessState pp =
        features::fit_preprocess(data, cfg.data.variance_floor, cfg.data.quantile_resolution);
    features::FeatureMatrix transformed = features::apply_preprocess(pp, data);
    auto [train_part, val_part] =
        features::split(transformed, cfg.data.train_fraction, derive_seed(cfg.seed, kSplitTag));

    net::TrainConfig tc = cfg.net.train;
    tc.seed = derive_seed(cfg.seed, kTrainTag);

    std::vector<net::LayerSpec> decoder = cfg.net.decoder_hidden;
    decoder.push_back({pp.retained_width(), false, net::Activation::none, 0.0});

    net::TrainResult trained = net::train(train_part, cfg.net.encoder, decoder, tc);

    TrainOutcome out;
    out.ckpt.model = std::move(trained.model);
    out.ckpt.model.preprocess = pp;

    Matrix embeddings = net::encode(out.ckpt.model, train_part.data);
    out.ckpt.clusters =
        cluster::build_cluster_model(embeddings, train_part.labels, cfg.cluster_options());
    out.ckpt.threshold_policy = cfg.clustering.policy;
    out.ckpt.train_config = tc;
    out.ckpt.provenance = {provenance_timestamp(), cfg.seed, data_fingerprint};

    out.train_rows = train_part.rows();
    out.validation_rows = val_part.rows();
    out.validation_mse = net::mse_loss(out.ckpt.model, val_part.data);
    features::FeatureMatrix pool = triplet_pool(val_part);
    if (can_form_triplets(pool)) {
        net::TripletBatch batch = net::sample_triplets(pool, pool.rows(), tc.margin,
                                                       derive_seed(cfg.seed, kValTripletTag));
        out.validation_triplet = net::triplet_loss(out.ckpt.model, batch);
    }
    return out;
}

drift::DetectorState make_detector(const checkpoint::Checkpoint& ckpt,
                                   const config::RunConfig& cfg,
                                   std::optional<features::FeatureMatrix> train_data) {
    drift::DetectorState state =
        drift::init_detector(ckpt.model, ckpt.clusters, cfg.adapt);
    if (train_data) {
        train_data->validate();
        if (!train_data->has_labels())
            throw std::runtime_error("retrain data must carry family labels");
        drift::RetrainContext ctx;
        ctx.train_config = ckpt.train_config;
        for (const net::DenseLayer& layer : ckpt.model.encoder)
            ctx.encoder_arch.push_back(layer.spec);
        for (const net::DenseLayer& layer : ckpt.model.decoder)
            ctx.decoder_arch.push_back(layer.spec);
        ctx.variance_floor = ckpt.model.preprocess.variance_floor;
        ctx.quantile_resolution = ckpt.model.preprocess.quantile_maps.rows() >= 2
                                      ? ckpt.model.preprocess.quantile_maps.rows()
                                      : cfg.data.quantile_resolution;
        ctx.cluster_options = cfg.cluster_options();
        ctx.train_data = std::move(*train_data);
        state.retrain = std::move(ctx);
    }
    return state;
}

std::vector<drift::Verdict> assign_all(const net::AutoencoderModel& model,
                                       const std::vector<cluster::Cluster>& clusters,
                                       const Matrix& raw) {
    Matrix z = embed(model, raw);
    std::vector<drift::Verdict> out;
    out.reserve(static_cast<std::size_t>(z.rows()));
    for (Index i = 0; i < z.rows(); ++i) {
        cluster::Assignment a = cluster::assign(z.row(i).transpose(), clusters);
        drift::Verdict v;
        v.kind = a.accepted ? drift::Verdict::Kind::classified : drift::Verdict::Kind::drifted;
        if (a.accepted) v.family = a.family;
        v.nearest_cluster = a.nearest;
        v.distance = a.distance;
        out.push_back(std::move(v));
    }
    return out;
}

eval::GroupedDriftCounts tally_verdicts(const std::vector<cluster::Cluster>& clusters,
                                        const std::vector<std::string>& truth,
                                        const std::vector<drift::Verdict>& verdicts) {
    if (truth.size() != verdicts.size())
        throw std::invalid_argument("tally_verdicts: truth and verdict counts differ");
    eval::GroupedDriftCounts counts;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        const drift::Verdict& v = verdicts[i];
        const std::string& nearest = clusters.at(v.nearest_cluster).family;
        const bool correct = nearest == truth[i];
        eval::DriftCounts& c = counts[truth[i]];
        if (v.kind == drift::Verdict::Kind::drifted)
            (correct ? c.correct_drifted : c.wrong_drifted) += 1;
        else
            (correct ? c.correct_not_drifted : c.wrong_not_drifted) += 1;
    }
    return counts;
}

std::vector<eval::Prediction> to_predictions(const std::vector<std::string>& truth,
                                             const std::vector<drift::Verdict>& verdicts) {
    if (truth.size() != verdicts.size())
        throw std::invalid_argument("to_predictions: truth and verdict counts differ");
    std::vector<eval::Prediction> out;
    out.reserve(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i)
        out.push_back({truth[i], verdicts[i].family});
    return out;
}

Matrix embed(const net::AutoencoderModel& model, const Matrix& raw) {
    if (model.preprocess.original_width > 0)
        return net::encode(model, features::apply_preprocess(model.preprocess, raw));
    return net::encode(model, raw);
}

std::map<std::string, Matrix> embeddings_by_family(const net::AutoencoderModel& model,
                                                   const features::FeatureMatrix& data) {
    if (!data.has_labels())
        throw std::invalid_argument("embeddings_by_family requires labeled data");
    Matrix all = embed(model, data.data);
    std::map<std::string, Matrix> out;
    for (const auto& [family, rows] : data.rows_by_label()) {
        Matrix block(static_cast<Index>(rows.size()), all.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) block.row(static_cast<Index>(i)) = all.row(rows[i]);
        out.emplace(family, std::move(block));
    }
    return out;
}

}  // namespace adrift::pipeline
