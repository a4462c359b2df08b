#include "adrift/drift.hpp"

#include <stdexcept>
#include <string>

namespace adrift::drift {

DetectorState init_detector(net::AutoencoderModel model, std::vector<cluster::Cluster> clusters,
                            adapt::AdaptConfig config) {
    config.validate();
    if (clusters.empty()) throw std::invalid_argument("init_detector: empty cluster list");
    for (const cluster::Cluster& c : clusters)
        if (c.centroid.size() != model.latent_dim)
            throw std::invalid_argument("init_detector: centroid width " +
                                        std::to_string(c.centroid.size()) +
                                        " does not match latent_dim " +
                                        std::to_string(model.latent_dim));
    DetectorState state;
    state.model = std::move(model);
    state.clusters = std::move(clusters);
    state.config = std::move(config);
    return state;
}

Index expected_raw_width(const DetectorState& state) {
    if (state.model.preprocess.original_width > 0) return state.model.preprocess.original_width;
    return state.model.input_dim;
}

std::pair<Verdict, std::vector<adapt::AdaptEvent>> observe(
    DetectorState& state, const std::string& sample_id, const Vector& raw,
    const std::optional<std::string>& provided_label) {
    if (state.clusters.empty()) throw std::logic_error("observe: detector not initialized");
    if (raw.size() != expected_raw_width(state))
        throw std::invalid_argument("observe: sample width " + std::to_string(raw.size()) +
                                    ", expected " + std::to_string(expected_raw_width(state)));
    state.stream_pos += 1;

    Vector x = state.model.preprocess.original_width > 0
                   ? features::apply_preprocess_row(state.model.preprocess, raw)
                   : raw;
    Vector z = net::encode(state.model, x);
    cluster::Assignment a = cluster::assign(z, state.clusters);

    Verdict verdict;
    verdict.nearest_cluster = a.nearest;
    verdict.distance = a.distance;
    std::vector<adapt::AdaptEvent> events;

    if (a.accepted) {
        verdict.kind = Verdict::Kind::classified;
        verdict.family = a.family;
        const cluster::Cluster& hit = state.clusters[a.nearest];
        // Only novel families (the ones with accumulators) feed retraining.
        if (hit.origin == cluster::ClusterOrigin::prototype) {
            auto acc = state.accumulators.find(hit.family);
            if (acc != state.accumulators.end()) {
                acc->second.ids.push_back(sample_id);
                acc->second.raw.push_back(raw);
                events = adapt::maybe_retrain(state);
            }
        }
    } else {
        verdict.kind = Verdict::Kind::drifted;
        state.buffer.push_back({sample_id, raw, std::move(z), provided_label, state.stream_pos});
        events = adapt::on_buffer_update(state);
    }
    return {std::move(verdict), std::move(events)};
}

std::vector<Verdict> classify_batch(DetectorState& state, const Matrix& raw, bool read_only) {
    std::vector<Verdict> verdicts;
    verdicts.reserve(static_cast<std::size_t>(raw.rows()));
    auto run = [&](DetectorState& target) {
        for (Index i = 0; i < raw.rows(); ++i)
            verdicts.push_back(
                observe(target, "batch-" + std::to_string(i), raw.row(i).transpose()).first);
    };
    if (read_only) {
        DetectorState copy = state;
        run(copy);
    } else {
        run(state);
    }
    return verdicts;
}

}  // namespace adrift::drift
