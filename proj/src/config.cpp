#include "adrift/config.hpp"

#include "json.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace adrift::config {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error("config: " + path + ": " + what);
}

// Wraps one JSON object. Handlers pull the keys they know; close() rejects
// whatever is left, so a typo can never silently fall back to a default.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    const json* get(const char* key) {
        auto it = j_.find(key);
        if (it == j_.end()) return nullptr;
        seen_.insert(key);
        return &*it;
    }

    std::string sub(const char* key) const { return path_ + "." + key; }

    void close() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key)) fail(path_ + "." + key, "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

double as_double(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

Index as_index(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<Index>();
}

bool as_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

net::LayerSpec parse_layer(const json& j, const std::string& path) {
    Section s(j, path);
    net::LayerSpec spec{0, false, net::Activation::relu, 0.0};
    const json* v = s.get("width");
    if (!v) fail(path, "layer needs a width");
    spec.width = as_index(*v, s.sub("width"));
    if ((v = s.get("batchnorm"))) spec.has_batchnorm = as_bool(*v, s.sub("batchnorm"));
    if ((v = s.get("activation"))) {
        const std::string act = as_string(*v, s.sub("activation"));
        if (act == "relu")
            spec.activation = net::Activation::relu;
        else if (act == "none")
            spec.activation = net::Activation::none;
        else
            fail(s.sub("activation"), "expected \"relu\" or \"none\"");
    }
    if ((v = s.get("dropout"))) spec.dropout_rate = as_double(*v, s.sub("dropout"));
    s.close();
    return spec;
}

std::vector<net::LayerSpec> parse_layers(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of layers");
    std::vector<net::LayerSpec> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(parse_layer(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

void parse_policy(const json& j, const std::string& path, cluster::ThresholdPolicy& policy) {
    Section s(j, path);
    if (const json* v = s.get("kind")) {
        const std::string kind = as_string(*v, s.sub("kind"));
        if (kind == "max_distance")
            policy.kind = cluster::ThresholdKind::max_distance;
        else if (kind == "mean_plus_std")
            policy.kind = cluster::ThresholdKind::mean_plus_std;
        else
            fail(s.sub("kind"), "expected \"max_distance\" or \"mean_plus_std\"");
    }
    if (const json* v = s.get("std_multiplier"))
        policy.std_multiplier = as_double(*v, s.sub("std_multiplier"));
    s.close();
}

void parse_data(const json& j, const std::string& path, RunConfig::Data& data) {
    Section s(j, path);
    if (const json* v = s.get("variance_floor"))
        data.variance_floor = as_double(*v, s.sub("variance_floor"));
    if (const json* v = s.get("quantile_resolution"))
        data.quantile_resolution = as_index(*v, s.sub("quantile_resolution"));
    if (const json* v = s.get("train_fraction"))
        data.train_fraction = as_double(*v, s.sub("train_fraction"));
    if (const json* v = s.get("label_column"))
        data.label_column = as_string(*v, s.sub("label_column"));
    if (const json* v = s.get("id_column")) data.id_column = as_string(*v, s.sub("id_column"));
    s.close();
}

void parse_train(const json& j, const std::string& path, net::TrainConfig& tc) {
    Section s(j, path);
    if (const json* v = s.get("epochs")) tc.epochs = as_index(*v, s.sub("epochs"));
    if (const json* v = s.get("batch_triplets"))
        tc.batch_triplets = as_index(*v, s.sub("batch_triplets"));
    if (const json* v = s.get("learning_rate"))
        tc.learning_rate = as_double(*v, s.sub("learning_rate"));
    if (const json* v = s.get("margin")) tc.margin = as_double(*v, s.sub("margin"));
    if (const json* v = s.get("lambda_mse"))
        tc.loss_weights.lambda_mse = as_double(*v, s.sub("lambda_mse"));
    if (const json* v = s.get("early_stop_patience")) {
        if (v->is_null())
            tc.early_stop_patience.reset();
        else
            tc.early_stop_patience = as_index(*v, s.sub("early_stop_patience"));
    }
    if (const json* v = s.get("adam_beta1")) tc.adam_beta1 = as_double(*v, s.sub("adam_beta1"));
    if (const json* v = s.get("adam_beta2")) tc.adam_beta2 = as_double(*v, s.sub("adam_beta2"));
    if (const json* v = s.get("adam_epsilon"))
        tc.adam_epsilon = as_double(*v, s.sub("adam_epsilon"));
    if (const json* v = s.get("batchnorm_momentum"))
        tc.batchnorm_momentum = as_double(*v, s.sub("batchnorm_momentum"));
    s.close();
}

void parse_net(const json& j, const std::string& path, RunConfig::Net& net_cfg) {
    Section s(j, path);
    if (const json* v = s.get("encoder")) net_cfg.encoder = parse_layers(*v, s.sub("encoder"));
    if (const json* v = s.get("decoder_hidden"))
        net_cfg.decoder_hidden = parse_layers(*v, s.sub("decoder_hidden"));
    if (const json* v = s.get("train")) parse_train(*v, s.sub("train"), net_cfg.train);
    s.close();
}

void parse_clustering(const json& j, const std::string& path, RunConfig::Clustering& cl) {
    Section s(j, path);
    if (const json* v = s.get("policy")) parse_policy(*v, s.sub("policy"), cl.policy);
    if (const json* v = s.get("epsilon_floor"))
        cl.epsilon_floor = as_double(*v, s.sub("epsilon_floor"));
    if (const json* v = s.get("min_pts_override")) {
        if (v->is_null())
            cl.min_pts_override.reset();
        else
            cl.min_pts_override = as_index(*v, s.sub("min_pts_override"));
    }
    if (const json* v = s.get("family_overrides")) {
        if (!v->is_object()) fail(s.sub("family_overrides"), "expected an object");
        for (const auto& [family, params] : v->items()) {
            const std::string p = s.sub("family_overrides") + "." + family;
            Section ps(params, p);
            cluster::DbscanParams dp;
            const json* e = ps.get("epsilon");
            if (!e) fail(p, "override needs an epsilon");
            dp.epsilon = as_double(*e, ps.sub("epsilon"));
            const json* m = ps.get("min_pts");
            if (!m) fail(p, "override needs a min_pts");
            dp.min_pts = as_index(*m, ps.sub("min_pts"));
            ps.close();
            cl.family_overrides[family] = dp;
        }
    }
    s.close();
}

void parse_adapt(const json& j, const std::string& path, adapt::AdaptConfig& cfg) {
    Section s(j, path);
    if (const json* v = s.get("buffer_min_cluster"))
        cfg.buffer_min_cluster = as_index(*v, s.sub("buffer_min_cluster"));
    if (const json* v = s.get("retrain_trigger"))
        cfg.retrain_trigger = as_index(*v, s.sub("retrain_trigger"));
    if (const json* v = s.get("label_mode")) {
        const std::string mode = as_string(*v, s.sub("label_mode"));
        if (mode == "label_drift")
            cfg.label_mode = adapt::LabelMode::label_drift;
        else if (mode == "covariate_drift")
            cfg.label_mode = adapt::LabelMode::covariate_drift;
        else
            fail(s.sub("label_mode"), "expected \"label_drift\" or \"covariate_drift\"");
    }
    if (const json* v = s.get("known_family_link")) {
        if (!v->is_object()) fail(s.sub("known_family_link"), "expected an object");
        for (const auto& [alias, family] : v->items())
            cfg.known_family_link[alias] =
                as_string(family, s.sub("known_family_link") + "." + alias);
    }
    if (const json* v = s.get("naming_scheme"))
        cfg.naming_scheme = as_string(*v, s.sub("naming_scheme"));
    if (const json* v = s.get("adopt_stream_labels"))
        cfg.adopt_stream_labels = as_bool(*v, s.sub("adopt_stream_labels"));
    if (const json* v = s.get("threshold_policy"))
        parse_policy(*v, s.sub("threshold_policy"), cfg.threshold_policy);
    if (const json* v = s.get("epsilon_floor"))
        cfg.epsilon_floor = as_double(*v, s.sub("epsilon_floor"));
    if (const json* v = s.get("retrain_warm_start"))
        cfg.retrain_warm_start = as_bool(*v, s.sub("retrain_warm_start"));
    s.close();
}

std::vector<Index> parse_index_list(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of integers");
    std::vector<Index> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(as_index(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

void parse_episodes(const json& j, const std::string& path, RunConfig::Episodes& ep) {
    Section s(j, path);
    if (const json* v = s.get("n_way")) ep.n_way = parse_index_list(*v, s.sub("n_way"));
    if (const json* v = s.get("k_shot")) ep.k_shot = parse_index_list(*v, s.sub("k_shot"));
    if (const json* v = s.get("query_per_class"))
        ep.query_per_class = as_index(*v, s.sub("query_per_class"));
    if (const json* v = s.get("episodes")) ep.episodes = as_index(*v, s.sub("episodes"));
    s.close();
}

void parse_scenario(const json& j, const std::string& path, RunConfig::Scenario& sc) {
    Section s(j, path);
    if (const json* v = s.get("known_families"))
        sc.known_families = as_index(*v, s.sub("known_families"));
    if (const json* v = s.get("unseen_families"))
        sc.unseen_families = as_index(*v, s.sub("unseen_families"));
    if (const json* v = s.get("ambient_dim")) sc.ambient_dim = as_index(*v, s.sub("ambient_dim"));
    if (const json* v = s.get("samples_per_family"))
        sc.samples_per_family = as_index(*v, s.sub("samples_per_family"));
    if (const json* v = s.get("separation")) sc.separation = as_double(*v, s.sub("separation"));
    if (const json* v = s.get("evolved_shift_sigmas"))
        sc.evolved_shift_sigmas = as_double(*v, s.sub("evolved_shift_sigmas"));
    s.close();
}

json layer_json(const net::LayerSpec& spec) {
    return {{"width", spec.width},
            {"batchnorm", spec.has_batchnorm},
            {"activation", spec.activation == net::Activation::relu ? "relu" : "none"},
            {"dropout", spec.dropout_rate}};
}

json policy_json(const cluster::ThresholdPolicy& p) {
    return {{"kind", p.kind == cluster::ThresholdKind::max_distance ? "max_distance"
                                                                    : "mean_plus_std"},
            {"std_multiplier", p.std_multiplier}};
}

}  // namespace

void RunConfig::validate() const {
    if (data.variance_floor < 0.0)
        throw std::invalid_argument("config: data.variance_floor must be >= 0");
    if (data.quantile_resolution < 2)
        throw std::invalid_argument("config: data.quantile_resolution must be >= 2");
    if (!(data.train_fraction > 0.0 && data.train_fraction < 1.0))
        throw std::invalid_argument("config: data.train_fraction must lie in (0, 1)");
    if (net.encoder.empty()) throw std::invalid_argument("config: net.encoder must be non-empty");
    net.train.validate();
    clustering.policy.validate();
    if (clustering.epsilon_floor < 0.0)
        throw std::invalid_argument("config: clustering.epsilon_floor must be >= 0");
    if (clustering.min_pts_override && *clustering.min_pts_override < 1)
        throw std::invalid_argument("config: clustering.min_pts_override must be >= 1");
    for (const auto& [family, params] : clustering.family_overrides) {
        try {
            params.validate();
        } catch (const std::exception& e) {
            throw std::invalid_argument("config: clustering.family_overrides." + family + ": " +
                                        e.what());
        }
    }
    adapt.validate();
    for (Index n : episodes.n_way)
        if (n < 2) throw std::invalid_argument("config: episodes.n_way entries must be >= 2");
    for (Index k : episodes.k_shot)
        if (k < 1) throw std::invalid_argument("config: episodes.k_shot entries must be >= 1");
    if (episodes.query_per_class < 1)
        throw std::invalid_argument("config: episodes.query_per_class must be >= 1");
    if (episodes.episodes < 1)
        throw std::invalid_argument("config: episodes.episodes must be >= 1");
    if (scenario.known_families < 2)
        throw std::invalid_argument("config: scenario.known_families must be >= 2");
    if (scenario.unseen_families < 0)
        throw std::invalid_argument("config: scenario.unseen_families must be >= 0");
    if (scenario.ambient_dim < 1)
        throw std::invalid_argument("config: scenario.ambient_dim must be >= 1");
    if (scenario.samples_per_family < 2)
        throw std::invalid_argument("config: scenario.samples_per_family must be >= 2");
    if (scenario.separation <= 0.0)
        throw std::invalid_argument("config: scenario.separation must be > 0");
    if (scenario.evolved_shift_sigmas < 0.0)
        throw std::invalid_argument("config: scenario.evolved_shift_sigmas must be >= 0");
}

cluster::ClusterBuildOptions RunConfig::cluster_options() const {
    cluster::ClusterBuildOptions opt;
    opt.policy = clustering.policy;
    opt.family_overrides = clustering.family_overrides;
    opt.epsilon_floor = clustering.epsilon_floor;
    opt.min_pts_override = clustering.min_pts_override;
    return opt;
}

RunConfig parse(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("config: not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    Section s(doc, "$");
    if (const json* v = s.get("seed")) {
        if (!v->is_number_integer()) fail("$.seed", "expected an integer");
        cfg.seed = v->get<Seed>();
    }
    if (const json* v = s.get("data")) parse_data(*v, "$.data", cfg.data);
    if (const json* v = s.get("net")) parse_net(*v, "$.net", cfg.net);
    if (const json* v = s.get("clustering")) parse_clustering(*v, "$.clustering", cfg.clustering);
    if (const json* v = s.get("adapt")) parse_adapt(*v, "$.adapt", cfg.adapt);
    if (const json* v = s.get("episodes")) parse_episodes(*v, "$.episodes", cfg.episodes);
    if (const json* v = s.get("scenario")) parse_scenario(*v, "$.scenario", cfg.scenario);
    s.close();
    cfg.validate();
    return cfg;
}

RunConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path.string() + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse(text);
}

std::string render(const RunConfig& cfg) {
    json doc;
    doc["seed"] = cfg.seed;
    doc["data"] = {{"variance_floor", cfg.data.variance_floor},
                   {"quantile_resolution", cfg.data.quantile_resolution},
                   {"train_fraction", cfg.data.train_fraction},
                   {"label_column", cfg.data.label_column},
                   {"id_column", cfg.data.id_column}};

    json encoder = json::array(), decoder = json::array();
    for (const net::LayerSpec& spec : cfg.net.encoder) encoder.push_back(layer_json(spec));
    for (const net::LayerSpec& spec : cfg.net.decoder_hidden) decoder.push_back(layer_json(spec));
    json train{{"epochs", cfg.net.train.epochs},
               {"batch_triplets", cfg.net.train.batch_triplets},
               {"learning_rate", cfg.net.train.learning_rate},
               {"margin", cfg.net.train.margin},
               {"lambda_mse", cfg.net.train.loss_weights.lambda_mse},
               {"adam_beta1", cfg.net.train.adam_beta1},
               {"adam_beta2", cfg.net.train.adam_beta2},
               {"adam_epsilon", cfg.net.train.adam_epsilon},
               {"batchnorm_momentum", cfg.net.train.batchnorm_momentum}};
    if (cfg.net.train.early_stop_patience)
        train["early_stop_patience"] = *cfg.net.train.early_stop_patience;
    else
        train["early_stop_patience"] = nullptr;
    doc["net"] = {{"encoder", std::move(encoder)},
                  {"decoder_hidden", std::move(decoder)},
                  {"train", std::move(train)}};

    json overrides = json::object();
    for (const auto& [family, params] : cfg.clustering.family_overrides)
        overrides[family] = {{"epsilon", params.epsilon}, {"min_pts", params.min_pts}};
    json clustering{{"policy", policy_json(cfg.clustering.policy)},
                    {"epsilon_floor", cfg.clustering.epsilon_floor},
                    {"family_overrides", std::move(overrides)}};
    if (cfg.clustering.min_pts_override)
        clustering["min_pts_override"] = *cfg.clustering.min_pts_override;
    else
        clustering["min_pts_override"] = nullptr;
    doc["clustering"] = std::move(clustering);

    doc["adapt"] = {{"buffer_min_cluster", cfg.adapt.buffer_min_cluster},
                    {"retrain_trigger", cfg.adapt.retrain_trigger},
                    {"label_mode", cfg.adapt.label_mode == adapt::LabelMode::label_drift
                                       ? "label_drift"
                                       : "covariate_drift"},
                    {"known_family_link", cfg.adapt.known_family_link},
                    {"naming_scheme", cfg.adapt.naming_scheme},
                    {"adopt_stream_labels", cfg.adapt.adopt_stream_labels},
                    {"threshold_policy", policy_json(cfg.adapt.threshold_policy)},
                    {"epsilon_floor", cfg.adapt.epsilon_floor},
                    {"retrain_warm_start", cfg.adapt.retrain_warm_start}};

    doc["episodes"] = {{"n_way", cfg.episodes.n_way},
                       {"k_shot", cfg.episodes.k_shot},
                       {"query_per_class", cfg.episodes.query_per_class},
                       {"episodes", cfg.episodes.episodes}};

    doc["scenario"] = {{"known_families", cfg.scenario.known_families},
                       {"unseen_families", cfg.scenario.unseen_families},
                       {"ambient_dim", cfg.scenario.ambient_dim},
                       {"samples_per_family", cfg.scenario.samples_per_family},
                       {"separation", cfg.scenario.separation},
                       {"evolved_shift_sigmas", cfg.scenario.evolved_shift_sigmas}};

    return doc.dump(2) + "\n";
}

}  // namespace adrift::config
