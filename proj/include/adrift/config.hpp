#pragma once

#include "adrift/adapt.hpp"
#include "adrift/cluster.hpp"
#include "adrift/net.hpp"
#include "adrift/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace adrift::config {

/// Every tunable in one document. Field initializers are the documented
/// defaults; render() echoes the effective values in the same shape the
/// parser accepts, so a rendered config is always reloadable.
struct RunConfig {
    /// Root of all randomness. Scenario generation, training, splits, and
    /// episodes derive their seeds from it; there is no per-module seed key.
    Seed seed = 0;

    struct Data {
        double variance_floor = 0.0;
        Index quantile_resolution = 1000;
        double train_fraction = 0.8;
        /// CSV columns split out as labels/ids when present in the header.
        std::string label_column = "label";
        std::string id_column = "id";
    } data;

    struct Net {
        /// Hidden stack ending in the latent layer.
        std::vector<net::LayerSpec> encoder{
            {1024, true, net::Activation::relu, 0.2},
            {256, true, net::Activation::relu, 0.2},
            {32, true, net::Activation::relu, 0.2},
        };
        /// Decoder hidden layers; the final reconstruction layer (input
        /// width, linear, no dropout) is appended at training time.
        std::vector<net::LayerSpec> decoder_hidden{
            {256, true, net::Activation::relu, 0.2},
            {1024, true, net::Activation::relu, 0.2},
        };
        net::TrainConfig train;  ///< train.seed is derived, never configured
    } net;

    struct Clustering {
        cluster::ThresholdPolicy policy;
        double epsilon_floor = 1e-6;
        std::optional<Index> min_pts_override;
        std::map<std::string, cluster::DbscanParams> family_overrides;
    } clustering;

    adapt::AdaptConfig adapt;

    struct Episodes {
        std::vector<Index> n_way{3, 5};
        std::vector<Index> k_shot{1, 5};
        Index query_per_class = 15;
        Index episodes = 600;
    } episodes;

    struct Scenario {
        Index known_families = 6;
        Index unseen_families = 2;
        Index ambient_dim = 16;
        Index samples_per_family = 300;
        double separation = 6.0;
        double evolved_shift_sigmas = 0.0;
    } scenario;

    cluster::ClusterBuildOptions cluster_options() const;

    void validate() const;
};

/// Parses a JSON document, overlaying the given values onto the defaults.
/// Any key the schema does not define is rejected, at any nesting depth,
/// with the full dotted path in the error message.
RunConfig parse(const std::string& text);
RunConfig load(const std::filesystem::path& path);

/// Effective configuration as a reloadable pretty-printed document.
std::string render(const RunConfig& cfg);

}  // namespace adrift::config
