#include "adrift/eval.hpp"

#include "adrift/adapt.hpp"
#include "adrift/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace adrift::eval {

void DriftCounts::validate() const {
    if (correct_not_drifted < 0 || wrong_not_drifted < 0 || correct_drifted < 0 ||
        wrong_drifted < 0)
        throw std::invalid_argument("drift counts must be non-negative");
}

DriftRates grouped_drift_metrics(const DriftCounts& counts) {
    counts.validate();
    const Index total = counts.total();
    if (total == 0) throw std::invalid_argument("grouped_drift_metrics: zero samples");

    DriftRates rates;
    rates.drift_rate =
        static_cast<double>(counts.correct_drifted + counts.wrong_drifted) / total;
    const Index classified = counts.correct_not_drifted + counts.wrong_not_drifted;
    rates.error_rate = classified == 0
                           ? 0.0
                           : static_cast<double>(counts.wrong_not_drifted) / classified;
    rates.accuracy =
        static_cast<double>(counts.correct_not_drifted + counts.correct_drifted) / total;
    return rates;
}

GroupedDriftReport grouped_drift_metrics(const GroupedDriftCounts& counts) {
    if (counts.empty()) throw std::invalid_argument("grouped_drift_metrics: no families");
    GroupedDriftReport report;
    for (const auto& [family, c] : counts) {
        report.per_family[family] = grouped_drift_metrics(c);
        report.total_counts.correct_not_drifted += c.correct_not_drifted;
        report.total_counts.wrong_not_drifted += c.wrong_not_drifted;
        report.total_counts.correct_drifted += c.correct_drifted;
        report.total_counts.wrong_drifted += c.wrong_drifted;
    }
    report.totals = grouped_drift_metrics(report.total_counts);
    return report;
}

PrF1Report prf1(const std::vector<Prediction>& predictions) {
    if (predictions.empty()) throw std::invalid_argument("prf1: no predictions");

    std::set<std::string> families;
    for (const Prediction& p : predictions) {
        families.insert(p.truth);
        if (p.predicted) families.insert(*p.predicted);
    }

    PrF1Report report;
    for (const std::string& family : families) {
        Index tp = 0, fp = 0, fn = 0, support = 0;
        for (const Prediction& p : predictions) {
            const bool is_truth = p.truth == family;
            const bool is_pred = p.predicted && *p.predicted == family;
            if (is_truth) support += 1;
            if (is_truth && is_pred) tp += 1;
            if (!is_truth && is_pred) fp += 1;
            if (is_truth && !is_pred) fn += 1;
        }
        PrF1 m;
        m.support = support;
        m.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
        m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
        m.f1 = m.precision + m.recall == 0.0
                   ? 0.0
                   : 2.0 * m.precision * m.recall / (m.precision + m.recall);
        report.per_family[family] = m;
    }

    const double n = static_cast<double>(report.per_family.size());
    for (const auto& [family, m] : report.per_family) {
        report.macro_precision += m.precision / n;
        report.macro_recall += m.recall / n;
        report.macro_f1 += m.f1 / n;
    }
    return report;
}

LabelDriftTable label_drift_table(
    const std::map<std::string, std::vector<drift::Verdict>>& verdicts_by_family) {
    LabelDriftTable table;
    for (const auto& [family, verdicts] : verdicts_by_family) {
        if (verdicts.empty())
            throw std::invalid_argument("label_drift_table: family '" + family +
                                        "' has no verdicts");
        LabelDriftRow row;
        row.total = static_cast<Index>(verdicts.size());
        for (const drift::Verdict& v : verdicts) {
            if (v.kind == drift::Verdict::Kind::drifted)
                row.drifted += 1;
            else
                row.inliers += 1;
        }
        row.drift_rate = static_cast<double>(row.drifted) / row.total;
        table.rows[family] = row;
        table.total.total += row.total;
        table.total.inliers += row.inliers;
        table.total.drifted += row.drifted;
    }
    if (table.total.total > 0)
        table.total.drift_rate = static_cast<double>(table.total.drifted) / table.total.total;
    return table;
}

void EpisodeSpec::validate() const {
    if (n_way < 2) throw std::invalid_argument("n_way must be at least 2");
    if (k_shot < 1) throw std::invalid_argument("k_shot must be at least 1");
    if (query_per_class < 1) throw std::invalid_argument("query_per_class must be at least 1");
    if (episodes < 1) throw std::invalid_argument("episodes must be at least 1");
}

namespace {

// First k entries of a seeded partial Fisher-Yates over 0..n-1.
std::vector<Index> draw_without_replacement(Index n, Index k, Rng& rng) {
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    for (Index i = 0; i < k; ++i) {
        const Index j = i + rng.uniform_index(n - i);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(k));
    return idx;
}

}  // namespace

EpisodeResult run_episodes(const std::map<std::string, Matrix>& embeddings_by_family,
                           const EpisodeSpec& spec) {
    spec.validate();
    if (static_cast<Index>(embeddings_by_family.size()) < spec.n_way)
        throw std::invalid_argument("run_episodes: fewer families than n_way");

    const Index needed = spec.k_shot + spec.query_per_class;
    std::vector<std::string> names;
    std::vector<const Matrix*> rows;
    for (const auto& [family, m] : embeddings_by_family) {
        if (m.rows() < needed)
            throw std::invalid_argument("run_episodes: family '" + family + "' has " +
                                        std::to_string(m.rows()) + " samples, needs " +
                                        std::to_string(needed));
        names.push_back(family);
        rows.push_back(&m);
    }

    EpisodeResult result;
    result.per_episode_accuracies.reserve(static_cast<std::size_t>(spec.episodes));
    for (Index e = 0; e < spec.episodes; ++e) {
        Rng rng(derive_seed(spec.seed, static_cast<Seed>(e)));
        const std::vector<Index> picked =
            draw_without_replacement(static_cast<Index>(names.size()), spec.n_way, rng);

        std::vector<adapt::Prototype> prototypes;
        std::vector<std::pair<Vector, std::string>> queries;
        for (Index f : picked) {
            const Matrix& m = *rows[static_cast<std::size_t>(f)];
            const std::vector<Index> chosen = draw_without_replacement(m.rows(), needed, rng);

            adapt::Prototype proto;
            proto.family = names[static_cast<std::size_t>(f)];
            proto.vector = Vector::Zero(m.cols());
            for (Index s = 0; s < spec.k_shot; ++s)
                proto.vector += m.row(chosen[static_cast<std::size_t>(s)]).transpose();
            proto.vector /= static_cast<double>(spec.k_shot);
            prototypes.push_back(std::move(proto));

            for (Index q = spec.k_shot; q < needed; ++q)
                queries.emplace_back(m.row(chosen[static_cast<std::size_t>(q)]).transpose(),
                                     names[static_cast<std::size_t>(f)]);
        }

        Index correct = 0;
        for (const auto& [latent, truth] : queries)
            if (adapt::classify_fewshot(prototypes, latent) == truth) correct += 1;
        result.per_episode_accuracies.push_back(static_cast<double>(correct) /
                                                static_cast<double>(queries.size()));
    }

    const double n = static_cast<double>(spec.episodes);
    result.mean_accuracy = std::accumulate(result.per_episode_accuracies.begin(),
                                           result.per_episode_accuracies.end(), 0.0) /
                           n;
    if (spec.episodes > 1) {
        double ss = 0.0;
        for (double a : result.per_episode_accuracies) {
            const double d = a - result.mean_accuracy;
            ss += d * d;
        }
        result.ci95_halfwidth = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return result;
}

}  // namespace adrift::eval
