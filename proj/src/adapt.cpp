#include "adrift/adapt.hpp"

#include "adrift/distance.hpp"
#include "adrift/drift.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>

namespace adrift::adapt {

void AdaptConfig::validate() const {
    if (buffer_min_cluster < 2)
        throw std::invalid_argument("buffer_min_cluster must be at least 2");
    if (retrain_trigger < buffer_min_cluster)
        throw std::invalid_argument("retrain_trigger must be at least buffer_min_cluster");
    if (naming_scheme.empty()) throw std::invalid_argument("naming_scheme must be non-empty");
    if (epsilon_floor < 0.0) throw std::invalid_argument("epsilon_floor must be non-negative");
    threshold_policy.validate();
}

std::string to_string(AdaptEventKind kind) {
    switch (kind) {
        case AdaptEventKind::prototype_promoted: return "prototype_promoted";
        case AdaptEventKind::retrain_triggered: return "retrain_triggered";
        case AdaptEventKind::retrain_completed: return "retrain_completed";
    }
    return "unknown";
}

namespace {

std::set<std::string> trained_families(const std::vector<cluster::Cluster>& clusters) {
    std::set<std::string> out;
    for (const cluster::Cluster& c : clusters)
        if (c.origin == cluster::ClusterOrigin::trained) out.insert(c.family);
    return out;
}

std::set<std::string> all_family_names(const drift::DetectorState& state) {
    std::set<std::string> out;
    for (const cluster::Cluster& c : state.clusters) out.insert(c.family);
    for (const auto& [family, acc] : state.accumulators) out.insert(family);
    return out;
}

std::string next_novel_name(drift::DetectorState& state) {
    const std::set<std::string> taken = all_family_names(state);
    std::string name;
    do {
        name = state.config.naming_scheme + "-" + std::to_string(state.novel_counter);
        state.novel_counter += 1;
    } while (taken.count(name) > 0);
    return name;
}

std::optional<std::string> majority_label(const drift::DetectorState& state,
                                          const std::vector<Index>& members) {
    std::map<std::string, Index> votes;
    for (Index m : members) {
        const auto& label = state.buffer[static_cast<std::size_t>(m)].provided_label;
        if (label) votes[*label] += 1;
    }
    if (votes.empty()) return std::nullopt;
    // Highest count wins; the map order makes ties lexicographic.
    const auto best = std::max_element(
        votes.begin(), votes.end(),
        [](const auto& a, const auto& b) { return a.second < b.second; });
    return best->first;
}

Vector mean_of_rows(const Matrix& rows) {
    return rows.colwise().mean().transpose();
}

double prototype_threshold(const Matrix& latents, const Vector& center,
                           const cluster::ThresholdPolicy& policy) {
    return cluster::threshold_from_squared_distances(squared_distances_to(latents, center),
                                                     policy);
}

}  // namespace

Prototype promote(drift::DetectorState& state, const std::vector<Index>& buffer_members,
                  LabelMode label_mode, const std::optional<std::string>& operator_label) {
    if (static_cast<Index>(buffer_members.size()) < state.config.buffer_min_cluster)
        throw std::invalid_argument("promote: needs at least " +
                                    std::to_string(state.config.buffer_min_cluster) +
                                    " founding members");

    const Index latent_dim = state.model.latent_dim;
    const Index raw_dim = drift::expected_raw_width(state);
    Matrix latents(static_cast<Index>(buffer_members.size()), latent_dim);
    Matrix raws(static_cast<Index>(buffer_members.size()), raw_dim);
    std::vector<std::string> ids;
    ids.reserve(buffer_members.size());
    for (std::size_t i = 0; i < buffer_members.size(); ++i) {
        const drift::BufferEntry& entry = state.buffer.at(static_cast<std::size_t>(
            buffer_members[i]));
        latents.row(static_cast<Index>(i)) = entry.latent.transpose();
        raws.row(static_cast<Index>(i)) = entry.raw.transpose();
        ids.push_back(entry.id);
    }

    std::string family;
    bool novel = false;
    if (label_mode == LabelMode::covariate_drift) {
        if (!operator_label)
            throw std::runtime_error("covariate promotion needs an operator label");
        std::string resolved = *operator_label;
        if (auto it = state.config.known_family_link.find(resolved);
            it != state.config.known_family_link.end())
            resolved = it->second;
        if (trained_families(state.clusters).count(resolved) == 0)
            throw std::runtime_error("covariate promotion: '" + resolved +
                                     "' is not a known family");
        family = resolved;
    } else if (operator_label) {
        family = *operator_label;
        novel = trained_families(state.clusters).count(family) == 0;
    } else {
        family = next_novel_name(state);
        novel = true;
    }

    Prototype proto;
    proto.family = family;
    proto.vector = mean_of_rows(latents);
    proto.support_ids = std::move(ids);
    proto.created_at = state.stream_pos;
    proto.support_raw = std::move(raws);

    cluster::Cluster c;
    c.family = family;
    c.centroid = proto.vector;
    c.threshold = prototype_threshold(latents, proto.vector, state.config.threshold_policy);
    c.member_count = static_cast<Index>(buffer_members.size());
    c.origin = cluster::ClusterOrigin::prototype;
    state.clusters.push_back(std::move(c));
    state.prototypes.push_back(proto);
    // Only novel families accumulate toward retraining; covariate-linked
    // prototypes refresh a known family and stop there.
    if (novel) state.accumulators.try_emplace(family);
    return proto;
}

std::vector<AdaptEvent> on_buffer_update(drift::DetectorState& state) {
    const Index n = static_cast<Index>(state.buffer.size());
    if (n < state.config.buffer_min_cluster) return {};

    Matrix latents(n, state.model.latent_dim);
    for (Index i = 0; i < n; ++i)
        latents.row(i) = state.buffer[static_cast<std::size_t>(i)].latent.transpose();

    const Index k = std::min(state.config.buffer_min_cluster, n - 1);
    const double eps = cluster::select_epsilon(latents, k, state.config.epsilon_floor);
    const cluster::ClusterAssignment clustering =
        cluster::dbscan(latents, {eps, state.config.buffer_min_cluster});

    std::vector<Index> sizes(static_cast<std::size_t>(clustering.cluster_count), 0);
    for (int label : clustering.labels)
        if (label >= 0) sizes[static_cast<std::size_t>(label)] += 1;

    int best = -1;
    for (int c = 0; c < clustering.cluster_count; ++c)
        if (sizes[static_cast<std::size_t>(c)] >= state.config.buffer_min_cluster &&
            (best < 0 || sizes[static_cast<std::size_t>(c)] > sizes[static_cast<std::size_t>(best)]))
            best = c;
    if (best < 0) return {};

    std::vector<Index> members;
    for (Index i = 0; i < n; ++i)
        if (clustering.labels[static_cast<std::size_t>(i)] == best) members.push_back(i);

    std::optional<std::string> label;
    if (state.config.adopt_stream_labels) label = majority_label(state, members);

    Prototype proto = promote(state, members, state.config.label_mode, label);
    for (auto it = members.rbegin(); it != members.rend(); ++it)
        state.buffer.erase(state.buffer.begin() + static_cast<std::ptrdiff_t>(*it));

    AdaptEvent event;
    event.kind = AdaptEventKind::prototype_promoted;
    event.family = proto.family;
    event.stream_pos = state.stream_pos;
    event.sample_count = static_cast<Index>(members.size());
    event.detail = "buffer_left=" + std::to_string(state.buffer.size());
    return {std::move(event)};
}

std::string classify_fewshot(const std::vector<Prototype>& prototypes, const Vector& latent) {
    if (prototypes.empty()) throw std::invalid_argument("classify_fewshot: no prototypes");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < prototypes.size(); ++i) {
        if (prototypes[i].vector.size() != latent.size())
            throw std::invalid_argument("classify_fewshot: latent width mismatch");
        const double d = squared_distance(latent, prototypes[i].vector);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return prototypes[best].family;
}

std::string classify_fewshot(const net::AutoencoderModel& model,
                             const std::vector<Prototype>& prototypes, const Vector& raw_query) {
    Vector x = model.preprocess.original_width > 0
                   ? features::apply_preprocess_row(model.preprocess, raw_query)
                   : raw_query;
    return classify_fewshot(prototypes, net::encode(model, x));
}

std::vector<AdaptEvent> maybe_retrain(drift::DetectorState& state) {
    std::string family;
    for (const auto& [name, acc] : state.accumulators)
        if (acc.size() >= state.config.retrain_trigger) {
            family = name;
            break;
        }
    if (family.empty()) return {};
    if (!state.retrain)
        throw std::runtime_error("retrain trigger reached for '" + family +
                                 "' but no training data context is attached");

    std::vector<AdaptEvent> events;
    const drift::Accumulator& acc = state.accumulators.at(family);
    AdaptEvent triggered;
    triggered.kind = AdaptEventKind::retrain_triggered;
    triggered.family = family;
    triggered.stream_pos = state.stream_pos;
    triggered.sample_count = acc.size();
    events.push_back(triggered);

    // Assemble the augmented raw training set: original split plus the
    // accumulated samples under the novel family's name.
    drift::RetrainContext ctx = *state.retrain;
    features::FeatureMatrix augmented = ctx.train_data;
    const Index old_rows = augmented.rows();
    augmented.data.conservativeResize(old_rows + acc.size(), Eigen::NoChange);
    for (Index i = 0; i < acc.size(); ++i) {
        augmented.data.row(old_rows + i) = acc.raw[static_cast<std::size_t>(i)].transpose();
        augmented.labels.push_back(family);
        if (augmented.has_ids()) augmented.ids.push_back(acc.ids[static_cast<std::size_t>(i)]);
    }

    features::PreprocessState pp =
        features::fit_preprocess(augmented, ctx.variance_floor, ctx.quantile_resolution);
    features::FeatureMatrix transformed;
    transformed.data = features::apply_preprocess(pp, augmented.data);
    transformed.labels = augmented.labels;

    // The reconstruction layer's width is structural, so it follows the
    // refitted preprocess even if variance thresholding changed the width.
    std::vector<net::LayerSpec> decoder_arch = ctx.decoder_arch;
    decoder_arch.back().width = pp.retained_width();

    const net::AutoencoderModel* warm = nullptr;
    if (state.config.retrain_warm_start && state.model.input_dim == pp.retained_width())
        warm = &state.model;
    net::TrainResult trained =
        net::train(transformed, ctx.encoder_arch, decoder_arch, ctx.train_config, warm);
    net::AutoencoderModel model = std::move(trained.model);
    model.preprocess = pp;

    Matrix embeddings = net::encode(model, transformed.data);
    std::vector<cluster::Cluster> clusters =
        cluster::build_cluster_model(embeddings, transformed.labels, ctx.cluster_options);

    // Surviving prototypes (every family but the retrained one) move into
    // the new latent space via their founding raw features.
    std::vector<Prototype> prototypes;
    for (const Prototype& p : state.prototypes) {
        if (p.family == family) continue;
        Prototype moved = p;
        Matrix latents = net::encode(model, features::apply_preprocess(pp, p.support_raw));
        moved.vector = mean_of_rows(latents);
        prototypes.push_back(moved);
        cluster::Cluster c;
        c.family = moved.family;
        c.centroid = moved.vector;
        c.threshold =
            prototype_threshold(latents, moved.vector, state.config.threshold_policy);
        c.member_count = latents.rows();
        c.origin = cluster::ClusterOrigin::prototype;
        clusters.push_back(std::move(c));
    }

    std::vector<drift::BufferEntry> buffer = state.buffer;
    for (drift::BufferEntry& entry : buffer)
        entry.latent = net::encode(model, features::apply_preprocess_row(pp, entry.raw));

    std::map<std::string, drift::Accumulator> accumulators = state.accumulators;
    accumulators.erase(family);

    ctx.train_data = std::move(augmented);
    ctx.retrain_count += 1;

    // Atomic swap: everything above ran on locals, so a throw anywhere
    // leaves the caller's state exactly as it was.
    state.model = std::move(model);
    state.clusters = std::move(clusters);
    state.prototypes = std::move(prototypes);
    state.buffer = std::move(buffer);
    state.accumulators = std::move(accumulators);
    state.retrain = std::move(ctx);

    AdaptEvent completed;
    completed.kind = AdaptEventKind::retrain_completed;
    completed.family = family;
    completed.stream_pos = state.stream_pos;
    completed.sample_count = triggered.sample_count;
    completed.detail = "clusters=" + std::to_string(state.clusters.size()) +
                       (warm ? " warm-start" : " fresh-init");
    events.push_back(std::move(completed));
    return events;
}

}  // namespace adrift::adapt
