#include "adrift/checkpoint.hpp"

#include "adrift/adapt.hpp"

#include "json.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <utility>

namespace adrift::checkpoint {

namespace {

using nlohmann::json;

constexpr char kCheckpointMagic[9] = "ADRIFTCK";
constexpr char kSnapshotMagic[9] = "ADRIFTSS";

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in.at(pos++))) << (8 * i);
    return v;
}

std::uint64_t get_u64(const std::string& in, std::size_t& pos) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in.at(pos++))) << (8 * i);
    return v;
}

/// JSON header plus named f64 blocks; the block map is keyed by name, so the
/// manifest and the byte layout are independent of assembly order.
struct Container {
    json header;
    std::map<std::string, std::vector<double>> blocks;
};

void write_container(const Container& c, const std::filesystem::path& path,
                     const char* magic) {
    json header = c.header;
    json manifest = json::array();
    for (const auto& [name, data] : c.blocks)
        manifest.push_back({{"name", name}, {"count", data.size()}});
    header["blocks"] = std::move(manifest);

    std::string bytes;
    bytes.append(magic, 8);
    put_u32(bytes, static_cast<std::uint32_t>(kFormatVersion));
    const std::string header_text = header.dump();
    put_u64(bytes, header_text.size());
    bytes += header_text;
    for (const auto& [name, data] : c.blocks)
        for (double v : data) put_u64(bytes, std::bit_cast<std::uint64_t>(v));

    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            out.close();
            std::filesystem::remove(tmp);
            throw std::runtime_error("short write to '" + tmp.string() + "'");
        }
    }
    std::filesystem::rename(tmp, path);
}

Container read_container(const std::filesystem::path& path, const char* magic) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::size_t pos = 0;
    if (bytes.size() < 20 || bytes.compare(0, 8, magic, 8) != 0)
        throw std::runtime_error("'" + path.string() + "' is not a " +
                                 std::string(magic, 8) + " file");
    pos = 8;
    const std::uint32_t version = get_u32(bytes, pos);
    if (version != static_cast<std::uint32_t>(kFormatVersion))
        throw std::runtime_error("'" + path.string() + "' has format version " +
                                 std::to_string(version) + ", expected " +
                                 std::to_string(kFormatVersion));
    const std::uint64_t header_len = get_u64(bytes, pos);
    if (pos + header_len > bytes.size())
        throw std::runtime_error("'" + path.string() + "' is truncated");

    Container c;
    c.header = json::parse(bytes.substr(pos, header_len));
    pos += header_len;
    for (const json& entry : c.header.at("blocks")) {
        const std::string name = entry.at("name").get<std::string>();
        const std::size_t count = entry.at("count").get<std::size_t>();
        std::vector<double> data(count);
        for (std::size_t i = 0; i < count; ++i)
            data[i] = std::bit_cast<double>(get_u64(bytes, pos));
        c.blocks.emplace(name, std::move(data));
    }
    return c;
}

std::vector<double> flatten(const Matrix& m) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(m.size()));
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
    return out;
}

Matrix unflatten(const std::vector<double>& data, std::size_t& pos, Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) m(r, c) = data.at(pos++);
    return m;
}

json layer_to_json(const net::LayerSpec& spec) {
    return {{"width", spec.width},
            {"batchnorm", spec.has_batchnorm},
            {"activation", spec.activation == net::Activation::relu ? "relu" : "none"},
            {"dropout", spec.dropout_rate}};
}

net::LayerSpec layer_from_json(const json& j) {
    net::LayerSpec spec;
    spec.width = j.at("width").get<Index>();
    spec.has_batchnorm = j.at("batchnorm").get<bool>();
    const std::string act = j.at("activation").get<std::string>();
    if (act == "relu")
        spec.activation = net::Activation::relu;
    else if (act == "none")
        spec.activation = net::Activation::none;
    else
        throw std::runtime_error("unknown activation '" + act + "'");
    spec.dropout_rate = j.at("dropout").get<double>();
    return spec;
}

json arch_to_json(const std::vector<net::DenseLayer>& layers) {
    json out = json::array();
    for (const net::DenseLayer& layer : layers) out.push_back(layer_to_json(layer.spec));
    return out;
}

std::vector<net::LayerSpec> arch_from_json(const json& j) {
    std::vector<net::LayerSpec> out;
    for (const json& entry : j) out.push_back(layer_from_json(entry));
    return out;
}

json policy_to_json(const cluster::ThresholdPolicy& p) {
    return {{"kind", p.kind == cluster::ThresholdKind::max_distance ? "max_distance"
                                                                    : "mean_plus_std"},
            {"std_multiplier", p.std_multiplier}};
}

cluster::ThresholdPolicy policy_from_json(const json& j) {
    cluster::ThresholdPolicy p;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "max_distance")
        p.kind = cluster::ThresholdKind::max_distance;
    else if (kind == "mean_plus_std")
        p.kind = cluster::ThresholdKind::mean_plus_std;
    else
        throw std::runtime_error("unknown threshold kind '" + kind + "'");
    p.std_multiplier = j.at("std_multiplier").get<double>();
    return p;
}

json train_config_to_json(const net::TrainConfig& cfg) {
    json j{{"epochs", cfg.epochs},
           {"batch_triplets", cfg.batch_triplets},
           {"learning_rate", cfg.learning_rate},
           {"margin", cfg.margin},
           {"lambda_mse", cfg.loss_weights.lambda_mse},
           {"seed", cfg.seed},
           {"adam_beta1", cfg.adam_beta1},
           {"adam_beta2", cfg.adam_beta2},
           {"adam_epsilon", cfg.adam_epsilon},
           {"batchnorm_momentum", cfg.batchnorm_momentum}};
    if (cfg.early_stop_patience)
        j["early_stop_patience"] = *cfg.early_stop_patience;
    else
        j["early_stop_patience"] = nullptr;
    return j;
}

net::TrainConfig train_config_from_json(const json& j) {
    net::TrainConfig cfg;
    cfg.epochs = j.at("epochs").get<Index>();
    cfg.batch_triplets = j.at("batch_triplets").get<Index>();
    cfg.learning_rate = j.at("learning_rate").get<double>();
    cfg.margin = j.at("margin").get<double>();
    cfg.loss_weights.lambda_mse = j.at("lambda_mse").get<double>();
    cfg.seed = j.at("seed").get<Seed>();
    if (!j.at("early_stop_patience").is_null())
        cfg.early_stop_patience = j.at("early_stop_patience").get<Index>();
    cfg.adam_beta1 = j.at("adam_beta1").get<double>();
    cfg.adam_beta2 = j.at("adam_beta2").get<double>();
    cfg.adam_epsilon = j.at("adam_epsilon").get<double>();
    cfg.batchnorm_momentum = j.at("batchnorm_momentum").get<double>();
    return cfg;
}

json preprocess_meta(const features::PreprocessState& pp) {
    return {{"retained_indices", pp.retained_indices},
            {"variance_floor", pp.variance_floor},
            {"original_width", pp.original_width},
            {"resolution", pp.quantile_maps.rows()}};
}

features::PreprocessState preprocess_from(const json& meta,
                                          const std::vector<double>& maps_block) {
    features::PreprocessState pp;
    pp.retained_indices = meta.at("retained_indices").get<std::vector<Index>>();
    pp.variance_floor = meta.at("variance_floor").get<double>();
    pp.original_width = meta.at("original_width").get<Index>();
    const Index resolution = meta.at("resolution").get<Index>();
    std::size_t pos = 0;
    pp.quantile_maps =
        unflatten(maps_block, pos, resolution, static_cast<Index>(pp.retained_indices.size()));
    return pp;
}

json clusters_meta(const std::vector<cluster::Cluster>& clusters) {
    json out = json::array();
    for (const cluster::Cluster& c : clusters)
        out.push_back(
            {{"family", c.family},
             {"threshold", c.threshold},
             {"member_count", c.member_count},
             {"origin",
              c.origin == cluster::ClusterOrigin::trained ? "trained" : "prototype"}});
    return out;
}

std::vector<cluster::Cluster> clusters_from(const json& meta,
                                            const std::vector<double>& centroid_block,
                                            Index latent_dim) {
    std::vector<cluster::Cluster> out;
    std::size_t pos = 0;
    for (const json& entry : meta) {
        cluster::Cluster c;
        c.family = entry.at("family").get<std::string>();
        c.threshold = entry.at("threshold").get<double>();
        c.member_count = entry.at("member_count").get<Index>();
        const std::string origin = entry.at("origin").get<std::string>();
        if (origin == "trained")
            c.origin = cluster::ClusterOrigin::trained;
        else if (origin == "prototype")
            c.origin = cluster::ClusterOrigin::prototype;
        else
            throw std::runtime_error("unknown cluster origin '" + origin + "'");
        c.centroid = unflatten(centroid_block, pos, latent_dim, 1);
        out.push_back(std::move(c));
    }
    return out;
}

json model_meta(const net::AutoencoderModel& model) {
    return {{"encoder", arch_to_json(model.encoder)},
            {"decoder", arch_to_json(model.decoder)},
            {"input_dim", model.input_dim},
            {"latent_dim", model.latent_dim}};
}

net::AutoencoderModel model_from(const json& arch, const json& pp_meta,
                                 const std::vector<double>& params,
                                 const std::vector<double>& maps_block) {
    net::AutoencoderModel model =
        net::init_model(arch_from_json(arch.at("encoder")), arch_from_json(arch.at("decoder")),
                        arch.at("input_dim").get<Index>(), 0);
    net::import_parameters(model, params);
    model.preprocess = preprocess_from(pp_meta, maps_block);
    return model;
}

std::vector<double> centroid_block(const std::vector<cluster::Cluster>& clusters) {
    std::vector<double> out;
    for (const cluster::Cluster& c : clusters)
        for (Index i = 0; i < c.centroid.size(); ++i) out.push_back(c.centroid(i));
    return out;
}

json adapt_config_to_json(const adapt::AdaptConfig& cfg) {
    return {{"buffer_min_cluster", cfg.buffer_min_cluster},
            {"retrain_trigger", cfg.retrain_trigger},
            {"label_mode",
             cfg.label_mode == adapt::LabelMode::label_drift ? "label_drift"
                                                             : "covariate_drift"},
            {"known_family_link", cfg.known_family_link},
            {"naming_scheme", cfg.naming_scheme},
            {"adopt_stream_labels", cfg.adopt_stream_labels},
            {"threshold_policy", policy_to_json(cfg.threshold_policy)},
            {"epsilon_floor", cfg.epsilon_floor},
            {"retrain_warm_start", cfg.retrain_warm_start}};
}

adapt::AdaptConfig adapt_config_from_json(const json& j) {
    adapt::AdaptConfig cfg;
    cfg.buffer_min_cluster = j.at("buffer_min_cluster").get<Index>();
    cfg.retrain_trigger = j.at("retrain_trigger").get<Index>();
    const std::string mode = j.at("label_mode").get<std::string>();
    if (mode == "label_drift")
        cfg.label_mode = adapt::LabelMode::label_drift;
    else if (mode == "covariate_drift")
        cfg.label_mode = adapt::LabelMode::covariate_drift;
    else
        throw std::runtime_error("unknown label mode '" + mode + "'");
    cfg.known_family_link =
        j.at("known_family_link").get<std::map<std::string, std::string>>();
    cfg.naming_scheme = j.at("naming_scheme").get<std::string>();
    cfg.adopt_stream_labels = j.at("adopt_stream_labels").get<bool>();
    cfg.threshold_policy = policy_from_json(j.at("threshold_policy"));
    cfg.epsilon_floor = j.at("epsilon_floor").get<double>();
    cfg.retrain_warm_start = j.at("retrain_warm_start").get<bool>();
    return cfg;
}

json dbscan_params_to_json(const cluster::DbscanParams& p) {
    return {{"epsilon", p.epsilon}, {"min_pts", p.min_pts}};
}

cluster::DbscanParams dbscan_params_from_json(const json& j) {
    return {j.at("epsilon").get<double>(), j.at("min_pts").get<Index>()};
}

json build_options_to_json(const cluster::ClusterBuildOptions& opt) {
    json overrides = json::object();
    for (const auto& [family, params] : opt.family_overrides)
        overrides[family] = dbscan_params_to_json(params);
    json j{{"policy", policy_to_json(opt.policy)},
           {"family_overrides", std::move(overrides)},
           {"epsilon_floor", opt.epsilon_floor}};
    if (opt.min_pts_override)
        j["min_pts_override"] = *opt.min_pts_override;
    else
        j["min_pts_override"] = nullptr;
    return j;
}

cluster::ClusterBuildOptions build_options_from_json(const json& j) {
    cluster::ClusterBuildOptions opt;
    opt.policy = policy_from_json(j.at("policy"));
    for (const auto& [family, params] : j.at("family_overrides").items())
        opt.family_overrides[family] = dbscan_params_from_json(params);
    opt.epsilon_floor = j.at("epsilon_floor").get<double>();
    if (!j.at("min_pts_override").is_null())
        opt.min_pts_override = j.at("min_pts_override").get<Index>();
    return opt;
}

}  // namespace

std::string fingerprint_bytes(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = 14695981039346656037ULL;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string fingerprint_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fingerprint_bytes(bytes.data(), bytes.size());
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    Container c;
    c.header["arch"] = model_meta(ckpt.model);
    c.header["preprocess"] = preprocess_meta(ckpt.model.preprocess);
    c.header["clusters"] = clusters_meta(ckpt.clusters);
    c.header["threshold_policy"] = policy_to_json(ckpt.threshold_policy);
    c.header["train_config"] = train_config_to_json(ckpt.train_config);
    c.header["provenance"] = {{"created_at", ckpt.provenance.created_at},
                              {"seed", ckpt.provenance.seed},
                              {"data_fingerprint", ckpt.provenance.data_fingerprint}};
    c.blocks["parameters"] = net::export_parameters(ckpt.model);
    c.blocks["quantile_maps"] = flatten(ckpt.model.preprocess.quantile_maps);
    c.blocks["centroids"] = centroid_block(ckpt.clusters);
    write_container(c, path, kCheckpointMagic);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    Container c = read_container(path, kCheckpointMagic);
    Checkpoint ckpt;
    ckpt.model = model_from(c.header.at("arch"), c.header.at("preprocess"),
                            c.blocks.at("parameters"), c.blocks.at("quantile_maps"));
    ckpt.clusters = clusters_from(c.header.at("clusters"), c.blocks.at("centroids"),
                                  ckpt.model.latent_dim);
    ckpt.threshold_policy = policy_from_json(c.header.at("threshold_policy"));
    ckpt.train_config = train_config_from_json(c.header.at("train_config"));
    const json& prov = c.header.at("provenance");
    ckpt.provenance.created_at = prov.at("created_at").get<std::string>();
    ckpt.provenance.seed = prov.at("seed").get<Seed>();
    ckpt.provenance.data_fingerprint = prov.at("data_fingerprint").get<std::string>();
    return ckpt;
}

void save_snapshot(const drift::DetectorState& state, const std::filesystem::path& path) {
    Container c;
    c.header["arch"] = model_meta(state.model);
    c.header["preprocess"] = preprocess_meta(state.model.preprocess);
    c.header["clusters"] = clusters_meta(state.clusters);
    c.header["adapt_config"] = adapt_config_to_json(state.config);
    c.header["stream_pos"] = state.stream_pos;
    c.header["novel_counter"] = state.novel_counter;
    c.blocks["parameters"] = net::export_parameters(state.model);
    c.blocks["quantile_maps"] = flatten(state.model.preprocess.quantile_maps);
    c.blocks["centroids"] = centroid_block(state.clusters);

    json buffer_meta = json::array();
    std::vector<double> buffer_raw, buffer_latent;
    for (const drift::BufferEntry& e : state.buffer) {
        json entry{{"id", e.id}, {"stream_pos", e.stream_pos}};
        if (e.provided_label)
            entry["provided_label"] = *e.provided_label;
        else
            entry["provided_label"] = nullptr;
        buffer_meta.push_back(std::move(entry));
        for (Index i = 0; i < e.raw.size(); ++i) buffer_raw.push_back(e.raw(i));
        for (Index i = 0; i < e.latent.size(); ++i) buffer_latent.push_back(e.latent(i));
    }
    c.header["buffer"] = std::move(buffer_meta);
    c.header["raw_width"] = drift::expected_raw_width(state);
    c.blocks["buffer_raw"] = std::move(buffer_raw);
    c.blocks["buffer_latent"] = std::move(buffer_latent);

    json proto_meta = json::array();
    std::vector<double> proto_vectors, proto_support;
    for (const adapt::Prototype& p : state.prototypes) {
        proto_meta.push_back({{"family", p.family},
                              {"support_ids", p.support_ids},
                              {"created_at", p.created_at},
                              {"support_rows", p.support_raw.rows()}});
        for (Index i = 0; i < p.vector.size(); ++i) proto_vectors.push_back(p.vector(i));
        const std::vector<double> rows = flatten(p.support_raw);
        proto_support.insert(proto_support.end(), rows.begin(), rows.end());
    }
    c.header["prototypes"] = std::move(proto_meta);
    c.blocks["prototype_vectors"] = std::move(proto_vectors);
    c.blocks["prototype_support_raw"] = std::move(proto_support);

    json acc_meta = json::array();
    std::vector<double> acc_raw;
    for (const auto& [family, acc] : state.accumulators) {
        acc_meta.push_back({{"family", family}, {"ids", acc.ids}});
        for (const Vector& v : acc.raw)
            for (Index i = 0; i < v.size(); ++i) acc_raw.push_back(v(i));
    }
    c.header["accumulators"] = std::move(acc_meta);
    c.blocks["accumulator_raw"] = std::move(acc_raw);

    if (state.retrain) {
        const drift::RetrainContext& ctx = *state.retrain;
        c.header["retrain"] = {{"train_config", train_config_to_json(ctx.train_config)},
                               {"encoder_arch", json::array()},
                               {"decoder_arch", json::array()},
                               {"variance_floor", ctx.variance_floor},
                               {"quantile_resolution", ctx.quantile_resolution},
                               {"cluster_options", build_options_to_json(ctx.cluster_options)},
                               {"retrain_count", ctx.retrain_count},
                               {"train_labels", ctx.train_data.labels},
                               {"train_ids", ctx.train_data.ids},
                               {"train_cols", ctx.train_data.data.cols()}};
        for (const net::LayerSpec& s : ctx.encoder_arch)
            c.header["retrain"]["encoder_arch"].push_back(layer_to_json(s));
        for (const net::LayerSpec& s : ctx.decoder_arch)
            c.header["retrain"]["decoder_arch"].push_back(layer_to_json(s));
        c.blocks["retrain_train_data"] = flatten(ctx.train_data.data);
    } else {
        c.header["retrain"] = nullptr;
    }

    write_container(c, path, kSnapshotMagic);
}

drift::DetectorState load_snapshot(const std::filesystem::path& path) {
    Container c = read_container(path, kSnapshotMagic);
    net::AutoencoderModel model =
        model_from(c.header.at("arch"), c.header.at("preprocess"),
                   c.blocks.at("parameters"), c.blocks.at("quantile_maps"));
    const Index latent_dim = model.latent_dim;
    std::vector<cluster::Cluster> clusters =
        clusters_from(c.header.at("clusters"), c.blocks.at("centroids"), latent_dim);
    adapt::AdaptConfig config = adapt_config_from_json(c.header.at("adapt_config"));

    drift::DetectorState state =
        drift::init_detector(std::move(model), std::move(clusters), std::move(config));
    state.stream_pos = c.header.at("stream_pos").get<Index>();
    state.novel_counter = c.header.at("novel_counter").get<Index>();

    const Index raw_width = c.header.at("raw_width").get<Index>();
    std::size_t raw_pos = 0, latent_pos = 0;
    for (const json& entry : c.header.at("buffer")) {
        drift::BufferEntry e;
        e.id = entry.at("id").get<std::string>();
        e.stream_pos = entry.at("stream_pos").get<Index>();
        if (!entry.at("provided_label").is_null())
            e.provided_label = entry.at("provided_label").get<std::string>();
        e.raw = unflatten(c.blocks.at("buffer_raw"), raw_pos, raw_width, 1);
        e.latent = unflatten(c.blocks.at("buffer_latent"), latent_pos, latent_dim, 1);
        state.buffer.push_back(std::move(e));
    }

    std::size_t vec_pos = 0, support_pos = 0;
    for (const json& entry : c.header.at("prototypes")) {
        adapt::Prototype p;
        p.family = entry.at("family").get<std::string>();
        p.support_ids = entry.at("support_ids").get<std::vector<std::string>>();
        p.created_at = entry.at("created_at").get<Index>();
        p.vector = unflatten(c.blocks.at("prototype_vectors"), vec_pos, latent_dim, 1);
        const Index rows = entry.at("support_rows").get<Index>();
        p.support_raw =
            unflatten(c.blocks.at("prototype_support_raw"), support_pos, rows, raw_width);
        state.prototypes.push_back(std::move(p));
    }

    std::size_t acc_pos = 0;
    for (const json& entry : c.header.at("accumulators")) {
        drift::Accumulator acc;
        acc.ids = entry.at("ids").get<std::vector<std::string>>();
        for (std::size_t i = 0; i < acc.ids.size(); ++i)
            acc.raw.push_back(unflatten(c.blocks.at("accumulator_raw"), acc_pos, raw_width, 1));
        state.accumulators.emplace(entry.at("family").get<std::string>(), std::move(acc));
    }

    if (!c.header.at("retrain").is_null()) {
        const json& r = c.header.at("retrain");
        drift::RetrainContext ctx;
        ctx.train_config = train_config_from_json(r.at("train_config"));
        ctx.encoder_arch = arch_from_json(r.at("encoder_arch"));
        ctx.decoder_arch = arch_from_json(r.at("decoder_arch"));
        ctx.variance_floor = r.at("variance_floor").get<double>();
        ctx.quantile_resolution = r.at("quantile_resolution").get<Index>();
        ctx.cluster_options = build_options_from_json(r.at("cluster_options"));
        ctx.retrain_count = r.at("retrain_count").get<Index>();
        ctx.train_data.labels = r.at("train_labels").get<std::vector<std::string>>();
        ctx.train_data.ids = r.at("train_ids").get<std::vector<std::string>>();
        const Index cols = r.at("train_cols").get<Index>();
        const Index rows = static_cast<Index>(ctx.train_data.labels.size());
        std::size_t pos = 0;
        ctx.train_data.data = unflatten(c.blocks.at("retrain_train_data"), pos, rows, cols);
        state.retrain = std::move(ctx);
    }
    return state;
}

}  // namespace adrift::checkpoint
