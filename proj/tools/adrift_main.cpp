// Command-line front end: train, stream, evaluate, episodes,
// export-embeddings, generate-scenario. Every command prints the effective
// configuration it ran with; machine-readable output goes to --json-out as
// JSON lines; no command leaves a partial artifact behind on failure.

#include "adrift/checkpoint.hpp"
#include "adrift/config.hpp"
#include "adrift/drift.hpp"
#include "adrift/eval.hpp"
#include "adrift/features.hpp"
#include "adrift/pipeline.hpp"
#include "adrift/rng.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace adrift;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::optional<long long> seed;
    bool strict = false;
    bool read_only = false;
    std::string json_out;
};

config::RunConfig effective_config(const GlobalArgs& g) {
    config::RunConfig cfg =
        g.config_path.empty() ? config::RunConfig{} : config::load(g.config_path);
    if (g.seed) cfg.seed = static_cast<Seed>(*g.seed);
    cfg.validate();
    return cfg;
}

void print_config(const config::RunConfig& cfg) {
    std::cout << "effective config:\n" << config::render(cfg) << "\n";
}

/// JSON-lines sink. Writes to <path>.tmp and renames on commit, so an
/// aborted command never leaves a half-written output file.
class JsonlWriter {
public:
    explicit JsonlWriter(std::string path) : path_(std::move(path)) {
        if (path_.empty()) return;
        tmp_ = path_ + ".tmp";
        out_.open(tmp_, std::ios::trunc);
        if (!out_) throw std::runtime_error("cannot write '" + tmp_ + "'");
    }

    ~JsonlWriter() {
        if (!path_.empty() && !committed_) {
            out_.close();
            std::error_code ec;
            fs::remove(tmp_, ec);
        }
    }

    void line(const json& j) {
        if (path_.empty()) return;
        out_ << j.dump() << "\n";
    }

    void commit() {
        if (path_.empty()) return;
        out_.flush();
        if (!out_) throw std::runtime_error("write failed for '" + tmp_ + "'");
        out_.close();
        fs::rename(tmp_, path_);
        committed_ = true;
    }

private:
    std::string path_, tmp_;
    std::ofstream out_;
    bool committed_ = false;
};

features::FeatureMatrix load_data(const std::string& path, const config::RunConfig& cfg) {
    const std::vector<std::string> header = features::csv_header(path);
    auto has = [&](const std::string& name) {
        return std::find(header.begin(), header.end(), name) != header.end();
    };
    const std::optional<std::string> label =
        has(cfg.data.label_column) ? std::optional(cfg.data.label_column) : std::nullopt;
    const std::optional<std::string> id =
        has(cfg.data.id_column) ? std::optional(cfg.data.id_column) : std::nullopt;
    return features::load_csv(path, label, id);
}

void atomic_write_csv(const features::FeatureMatrix& m, const fs::path& path) {
    const fs::path tmp = path.string() + ".tmp";
    try {
        features::write_csv(m, tmp);
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    }
    fs::rename(tmp, path);
}

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string general4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

void print_table(const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    auto emit = [&](const std::vector<std::string>& row) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::cout << row[c] << std::string(width[c] - row[c].size(), ' ');
            std::cout << (c + 1 < row.size() ? "  " : "");
        }
        std::cout << "\n";
    };
    emit(header);
    std::vector<std::string> rule;
    for (std::size_t w : width) rule.push_back(std::string(w, '-'));
    emit(rule);
    for (const auto& row : rows) emit(row);
}

// ---------------------------------------------------------------- train --

void cmd_train(const GlobalArgs& g, const std::string& data_path,
               const std::string& out_path) {
    config::RunConfig cfg = effective_config(g);
    print_config(cfg);

    features::FeatureMatrix data = load_data(data_path, cfg);
    const std::string fingerprint = checkpoint::fingerprint_file(data_path);
    pipeline::TrainOutcome out = pipeline::run_training(cfg, data, fingerprint);
    checkpoint::save_checkpoint(out.ckpt, out_path);

    std::map<std::string, std::vector<double>> taus;
    for (const cluster::Cluster& c : out.ckpt.clusters) taus[c.family].push_back(c.threshold);
    std::vector<std::vector<std::string>> rows;
    for (const auto& [family, thresholds] : taus) {
        std::string joined;
        for (double t : thresholds) joined += (joined.empty() ? "" : ", ") + general4(t);
        rows.push_back({family, std::to_string(thresholds.size()), joined});
    }
    print_table({"family", "clusters", "thresholds"}, rows);

    std::cout << "\ntrain rows: " << out.train_rows
              << "  validation rows: " << out.validation_rows << "\n";
    std::cout << "validation mse: " << out.validation_mse << "\n";
    if (out.validation_triplet)
        std::cout << "validation triplet: " << *out.validation_triplet << "\n";
    else
        std::cout << "validation triplet: n/a (validation split cannot form triplets)\n";
    std::cout << "checkpoint written: " << out_path << "\n";

    JsonlWriter sink(g.json_out);
    json families = json::object();
    for (const auto& [family, thresholds] : taus)
        families[family] = {{"clusters", thresholds.size()}, {"thresholds", thresholds}};
    json summary{{"type", "train_summary"},
                 {"families", std::move(families)},
                 {"train_rows", out.train_rows},
                 {"validation_rows", out.validation_rows},
                 {"validation_mse", out.validation_mse},
                 {"checkpoint", out_path},
                 {"data_fingerprint", fingerprint},
                 {"created_at", out.ckpt.provenance.created_at}};
    if (out.validation_triplet)
        summary["validation_triplet"] = *out.validation_triplet;
    else
        summary["validation_triplet"] = nullptr;
    sink.line(summary);
    sink.commit();
}

// --------------------------------------------------------------- stream --

struct ParsedRow {
    std::string id;
    std::optional<std::string> label;
    Vector raw;
};

// Project CSV dialect: comma-separated, no quoting. Returns an error string
// instead of throwing so the caller can skip-and-log.
std::optional<std::string> parse_stream_row(const std::string& line,
                                            const std::vector<std::string>& header,
                                            Index label_col, Index id_col, Index row_index,
                                            ParsedRow& out) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    if (cells.size() != header.size())
        return "expected " + std::to_string(header.size()) + " cells, got " +
               std::to_string(cells.size());

    out.id = id_col >= 0 ? cells[static_cast<std::size_t>(id_col)]
                         : "row-" + std::to_string(row_index);
    out.label.reset();
    if (label_col >= 0 && !cells[static_cast<std::size_t>(label_col)].empty())
        out.label = cells[static_cast<std::size_t>(label_col)];

    const Index feature_count =
        static_cast<Index>(header.size()) - (label_col >= 0) - (id_col >= 0);
    out.raw = Vector(feature_count);
    Index k = 0;
    for (Index c = 0; c < static_cast<Index>(cells.size()); ++c) {
        if (c == label_col || c == id_col) continue;
        const std::string& text = cells[static_cast<std::size_t>(c)];
        double value = 0.0;
        const char* begin = text.data();
        const char* end = begin + text.size();
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc() || ptr != end)
            return "column '" + header[static_cast<std::size_t>(c)] + "' is not a number: '" +
                   text + "'";
        if (!std::isfinite(value))
            return "column '" + header[static_cast<std::size_t>(c)] + "' is not finite";
        out.raw(k++) = value;
    }
    return std::nullopt;
}

json verdict_json(const drift::Verdict& v, const drift::DetectorState& state,
                  const std::string& id, Index row) {
    json j{{"type", "verdict"},
           {"row", row},
           {"id", id},
           {"stream_pos", state.stream_pos},
           {"kind", v.kind == drift::Verdict::Kind::classified ? "classified" : "drifted"},
           {"nearest_family", state.clusters.at(v.nearest_cluster).family},
           {"distance", v.distance}};
    if (v.family)
        j["family"] = *v.family;
    else
        j["family"] = nullptr;
    return j;
}

json event_json(const adapt::AdaptEvent& e) {
    return {{"type", "event"},        {"kind", adapt::to_string(e.kind)},
            {"family", e.family},     {"stream_pos", e.stream_pos},
            {"sample_count", e.sample_count}, {"detail", e.detail}};
}

void cmd_stream(const GlobalArgs& g, const std::string& ckpt_path,
                const std::string& data_path, const std::string& snapshot_out,
                const std::string& resume_path, const std::string& train_data_path) {
    config::RunConfig cfg = effective_config(g);
    print_config(cfg);
    if (!g.read_only && snapshot_out.empty())
        throw std::runtime_error("stream: --snapshot-out is required unless --read-only");

    drift::DetectorState state = [&] {
        if (!resume_path.empty()) return checkpoint::load_snapshot(resume_path);
        checkpoint::Checkpoint ckpt = checkpoint::load_checkpoint(ckpt_path);
        std::optional<features::FeatureMatrix> train_data;
        if (!train_data_path.empty()) train_data = load_data(train_data_path, cfg);
        return pipeline::make_detector(ckpt, cfg, std::move(train_data));
    }();

    std::ifstream in(data_path);
    if (!in) throw std::runtime_error("stream: cannot open '" + data_path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("stream: '" + data_path + "' is empty");
    std::vector<std::string> header = features::csv_header(data_path);
    auto col_of = [&](const std::string& name) -> Index {
        auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : static_cast<Index>(it - header.begin());
    };
    const Index label_col = col_of(cfg.data.label_column);
    const Index id_col = col_of(cfg.data.id_column);
    const Index feature_count =
        static_cast<Index>(header.size()) - (label_col >= 0) - (id_col >= 0);
    if (feature_count != drift::expected_raw_width(state))
        throw std::runtime_error("stream: '" + data_path + "' has " +
                                 std::to_string(feature_count) + " feature columns, model expects " +
                                 std::to_string(drift::expected_raw_width(state)));

    JsonlWriter sink(g.json_out);
    Index row = 0, classified = 0, drifted = 0, skipped = 0, promotions = 0, retrains = 0;
    ParsedRow parsed;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        row += 1;
        if (auto why = parse_stream_row(line, header, label_col, id_col, row, parsed)) {
            if (g.strict)
                throw std::runtime_error("stream: row " + std::to_string(row) + ": " + *why);
            std::cerr << "stream: skipping row " << row << ": " << *why << "\n";
            sink.line({{"type", "skipped"}, {"row", row}, {"reason", *why}});
            skipped += 1;
            continue;
        }
        auto [verdict, events] = drift::observe(state, parsed.id, parsed.raw, parsed.label);
        (verdict.kind == drift::Verdict::Kind::classified ? classified : drifted) += 1;
        sink.line(verdict_json(verdict, state, parsed.id, row));
        for (const adapt::AdaptEvent& e : events) {
            sink.line(event_json(e));
            std::cout << adapt::to_string(e.kind) << " family=" << e.family
                      << " stream_pos=" << e.stream_pos << " samples=" << e.sample_count
                      << (e.detail.empty() ? "" : " " + e.detail) << "\n";
            if (e.kind == adapt::AdaptEventKind::prototype_promoted) promotions += 1;
            if (e.kind == adapt::AdaptEventKind::retrain_completed) retrains += 1;
        }
    }
    if (in.bad()) throw std::runtime_error("stream: read error on '" + data_path + "'");

    print_table({"rows", "classified", "drifted", "skipped", "promotions", "retrains"},
                {{std::to_string(row), std::to_string(classified),
                  std::to_string(drifted), std::to_string(skipped), std::to_string(promotions),
                  std::to_string(retrains)}});
    sink.line({{"type", "stream_summary"},
               {"rows", row},
               {"classified", classified},
               {"drifted", drifted},
               {"skipped", skipped},
               {"promotions", promotions},
               {"retrains", retrains}});

    if (!g.read_only) {
        checkpoint::save_snapshot(state, snapshot_out);
        std::cout << "snapshot written: " << snapshot_out << "\n";
    }
    sink.commit();
}

// ------------------------------------------------------------- evaluate --

void cmd_evaluate(const GlobalArgs& g, const std::string& ckpt_path,
                  const std::string& data_path, const std::string& mode) {
    config::RunConfig cfg = effective_config(g);
    print_config(cfg);

    checkpoint::Checkpoint ckpt = checkpoint::load_checkpoint(ckpt_path);
    features::FeatureMatrix data = load_data(data_path, cfg);
    if (!data.has_labels())
        throw std::runtime_error("evaluate: '" + data_path + "' has no '" +
                                 cfg.data.label_column + "' column");
    std::vector<drift::Verdict> verdicts =
        pipeline::assign_all(ckpt.model, ckpt.clusters, data.data);

    JsonlWriter sink(g.json_out);
    if (mode == "testing") {
        std::set<std::string> known;
        for (const cluster::Cluster& c : ckpt.clusters) known.insert(c.family);
        for (const std::string& family : data.labels)
            if (!known.count(family))
                throw std::runtime_error("evaluate: family '" + family +
                                         "' is not in the trained model");
        eval::PrF1Report report = eval::prf1(pipeline::to_predictions(data.labels, verdicts));
        std::vector<std::vector<std::string>> rows;
        for (const auto& [family, m] : report.per_family)
            rows.push_back({family, fixed2(m.precision), fixed2(m.recall), fixed2(m.f1),
                            std::to_string(m.support)});
        rows.push_back({"macro", fixed2(report.macro_precision), fixed2(report.macro_recall),
                        fixed2(report.macro_f1), ""});
        print_table({"family", "precision", "recall", "f1", "support"}, rows);

        json per = json::object();
        for (const auto& [family, m] : report.per_family)
            per[family] = {{"precision", m.precision},
                           {"recall", m.recall},
                           {"f1", m.f1},
                           {"support", m.support}};
        sink.line({{"type", "testing_report"},
                   {"per_family", std::move(per)},
                   {"macro_precision", report.macro_precision},
                   {"macro_recall", report.macro_recall},
                   {"macro_f1", report.macro_f1}});
    } else if (mode == "evolved") {
        eval::GroupedDriftCounts counts =
            pipeline::tally_verdicts(ckpt.clusters, data.labels, verdicts);
        eval::GroupedDriftReport report = eval::grouped_drift_metrics(counts);
        std::vector<std::vector<std::string>> rows;
        auto row_of = [&](const std::string& name, const eval::DriftCounts& c,
                          const eval::DriftRates& r) {
            return std::vector<std::string>{name,
                                            std::to_string(c.total()),
                                            std::to_string(c.correct_not_drifted),
                                            std::to_string(c.wrong_not_drifted),
                                            std::to_string(c.correct_drifted),
                                            std::to_string(c.wrong_drifted),
                                            fixed2(r.drift_rate),
                                            fixed2(r.error_rate),
                                            fixed2(r.accuracy)};
        };
        for (const auto& [family, rates] : report.per_family)
            rows.push_back(row_of(family, counts.at(family), rates));
        rows.push_back(row_of("total", report.total_counts, report.totals));
        print_table({"family", "total", "correct", "wrong", "correct-drift", "wrong-drift",
                     "drift-rate", "error-rate", "accuracy"},
                    rows);

        json per = json::object();
        for (const auto& [family, rates] : report.per_family) {
            const eval::DriftCounts& c = counts.at(family);
            per[family] = {{"total", c.total()},
                           {"correct_not_drifted", c.correct_not_drifted},
                           {"wrong_not_drifted", c.wrong_not_drifted},
                           {"correct_drifted", c.correct_drifted},
                           {"wrong_drifted", c.wrong_drifted},
                           {"drift_rate", rates.drift_rate},
                           {"error_rate", rates.error_rate},
                           {"accuracy", rates.accuracy}};
        }
        sink.line({{"type", "evolved_report"},
                   {"per_family", std::move(per)},
                   {"total", {{"drift_rate", report.totals.drift_rate},
                              {"error_rate", report.totals.error_rate},
                              {"accuracy", report.totals.accuracy}}}});
    } else if (mode == "unseen") {
        std::map<std::string, std::vector<drift::Verdict>> grouped;
        for (std::size_t i = 0; i < verdicts.size(); ++i)
            grouped[data.labels[i]].push_back(verdicts[i]);
        eval::LabelDriftTable table = eval::label_drift_table(grouped);
        std::vector<std::vector<std::string>> rows;
        for (const auto& [family, r] : table.rows)
            rows.push_back({family, std::to_string(r.total), std::to_string(r.inliers),
                            std::to_string(r.drifted), fixed2(r.drift_rate)});
        rows.push_back({"total", std::to_string(table.total.total),
                        std::to_string(table.total.inliers), std::to_string(table.total.drifted),
                        fixed2(table.total.drift_rate)});
        print_table({"family", "total", "inliers", "drifted", "drift-rate"}, rows);

        json per = json::object();
        for (const auto& [family, r] : table.rows)
            per[family] = {{"total", r.total},
                           {"inliers", r.inliers},
                           {"drifted", r.drifted},
                           {"drift_rate", r.drift_rate}};
        sink.line({{"type", "unseen_report"},
                   {"per_family", std::move(per)},
                   {"total", {{"total", table.total.total},
                              {"inliers", table.total.inliers},
                              {"drifted", table.total.drifted},
                              {"drift_rate", table.total.drift_rate}}}});
    } else {
        throw std::runtime_error("evaluate: unknown mode '" + mode + "'");
    }
    sink.commit();
}

// ------------------------------------------------------------- episodes --

void cmd_episodes(const GlobalArgs& g, const std::string& ckpt_path,
                  const std::string& data_path) {
    config::RunConfig cfg = effective_config(g);
    print_config(cfg);

    checkpoint::Checkpoint ckpt = checkpoint::load_checkpoint(ckpt_path);
    features::FeatureMatrix data = load_data(data_path, cfg);
    if (!data.has_labels())
        throw std::runtime_error("episodes: '" + data_path + "' has no '" +
                                 cfg.data.label_column + "' column");
    std::map<std::string, Matrix> groups = pipeline::embeddings_by_family(ckpt.model, data);

    if (cfg.episodes.episodes == 1)
        std::cerr << "episodes: warning: a single episode has no spread; CI is 0\n";

    JsonlWriter sink(g.json_out);
    std::vector<std::string> header{"n_way \\ k_shot"};
    for (Index k : cfg.episodes.k_shot) header.push_back(std::to_string(k) + "-shot");
    std::vector<std::vector<std::string>> rows;
    json cells = json::array();
    for (Index n : cfg.episodes.n_way) {
        std::vector<std::string> row{std::to_string(n) + "-way"};
        for (Index k : cfg.episodes.k_shot) {
            eval::EpisodeSpec spec;
            spec.n_way = n;
            spec.k_shot = k;
            spec.query_per_class = cfg.episodes.query_per_class;
            spec.episodes = cfg.episodes.episodes;
            spec.seed = derive_seed(cfg.seed, 0x450000 + n * 1000 + k);
            eval::EpisodeResult result = [&] {
                try {
                    return eval::run_episodes(groups, spec);
                } catch (const std::exception& e) {
                    throw std::runtime_error("episodes: " + std::to_string(n) + "-way " +
                                             std::to_string(k) + "-shot: " + e.what());
                }
            }();
            row.push_back(fixed2(result.mean_accuracy * 100.0) + " +/- " +
                          fixed2(result.ci95_halfwidth * 100.0));
            cells.push_back({{"n_way", n},
                             {"k_shot", k},
                             {"mean_accuracy", result.mean_accuracy},
                             {"ci95_halfwidth", result.ci95_halfwidth},
                             {"episodes", spec.episodes}});
        }
        rows.push_back(std::move(row));
    }
    print_table(header, rows);
    sink.line({{"type", "episode_grid"}, {"cells", std::move(cells)}});
    sink.commit();
}

// ---------------------------------------------------- export-embeddings --

void cmd_export(const GlobalArgs& g, const std::string& ckpt_path,
                const std::string& data_path, const std::string& out_path) {
    config::RunConfig cfg = effective_config(g);
    print_config(cfg);

    checkpoint::Checkpoint ckpt = checkpoint::load_checkpoint(ckpt_path);
    features::FeatureMatrix data = load_data(data_path, cfg);

    features::FeatureMatrix out;
    out.data = pipeline::embed(ckpt.model, data.data);
    out.labels = data.labels;
    out.ids = data.ids;
    if (out.ids.empty())
        for (Index i = 0; i < out.data.rows(); ++i)
            out.ids.push_back("row-" + std::to_string(i + 1));
    atomic_write_csv(out, out_path);
    std::cout << out.data.rows() << " rows x " << out.data.cols()
              << " latent dims written: " << out_path << "\n";

    JsonlWriter sink(g.json_out);
    sink.line({{"type", "export_summary"},
               {"rows", out.data.rows()},
               {"latent_dim", out.data.cols()},
               {"path", out_path}});
    sink.commit();
}

// ---------------------------------------------------- generate-scenario --

void cmd_generate(const GlobalArgs& g, const std::string& out_dir) {
    config::RunConfig cfg = effective_config(g);
    print_config(cfg);

    features::SyntheticScenario spec = features::make_separated_scenario(
        cfg.scenario.known_families, cfg.scenario.unseen_families, cfg.scenario.ambient_dim,
        cfg.scenario.samples_per_family, cfg.scenario.separation,
        cfg.scenario.evolved_shift_sigmas, cfg.seed);
    features::ScenarioData data = features::generate_scenario(spec);

    fs::create_directories(out_dir);
    std::vector<std::vector<std::string>> rows;
    JsonlWriter sink(g.json_out);
    auto emit = [&](const char* name, const features::FeatureMatrix& part) {
        if (part.rows() == 0) return;
        const fs::path path = fs::path(out_dir) / (std::string(name) + ".csv");
        atomic_write_csv(part, path);
        rows.push_back({name, std::to_string(part.rows()),
                        std::to_string(part.rows_by_label().size()), path.string()});
        sink.line({{"type", "scenario_part"},
                   {"part", name},
                   {"rows", part.rows()},
                   {"families", part.rows_by_label().size()},
                   {"path", path.string()}});
    };
    emit("train", data.train);
    emit("evolved", data.evolved);
    emit("unseen", data.unseen);
    print_table({"part", "rows", "families", "path"}, rows);
    sink.commit();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"triplet-embedding malware drift detector"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--config", g.config_path, "configuration file (JSON)")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "override the config seed");
    app.add_flag("--strict", g.strict, "treat recoverable input problems as errors");
    app.add_flag("--read-only", g.read_only, "never write state back");
    app.add_option("--json-out", g.json_out, "write machine-readable JSON lines here");

    std::string data_path, out_path, ckpt_path, snapshot_out, resume_path, train_data_path;
    std::string mode = "testing", out_dir;

    CLI::App* train = app.add_subcommand("train", "fit preprocess, embedding, and clusters");
    train->add_option("--data", data_path, "labeled training CSV")
        ->required()
        ->check(CLI::ExistingFile);
    train->add_option("--out", out_path, "checkpoint output path")->required();
    train->callback([&] { cmd_train(g, data_path, out_path); });

    CLI::App* stream = app.add_subcommand("stream", "run drift detection over a sample stream");
    stream->add_option("--checkpoint", ckpt_path, "trained checkpoint")->check(CLI::ExistingFile);
    stream->add_option("--data", data_path, "stream CSV")->required()->check(CLI::ExistingFile);
    stream->add_option("--snapshot-out", snapshot_out, "final detector snapshot path");
    auto* resume_opt =
        stream->add_option("--resume", resume_path, "resume from a snapshot instead of a checkpoint")
            ->check(CLI::ExistingFile);
    stream->add_option("--train-data", train_data_path,
                       "raw training CSV; arms the retraining trigger")
        ->check(CLI::ExistingFile)
        ->excludes(resume_opt);
    stream->callback([&] {
        if (ckpt_path.empty() == resume_path.empty())
            throw CLI::ValidationError("stream", "pass exactly one of --checkpoint / --resume");
        cmd_stream(g, ckpt_path, data_path, snapshot_out, resume_path, train_data_path);
    });

    CLI::App* evaluate = app.add_subcommand("evaluate", "score labeled data against a checkpoint");
    evaluate->add_option("--checkpoint", ckpt_path, "trained checkpoint")
        ->required()
        ->check(CLI::ExistingFile);
    evaluate->add_option("--data", data_path, "labeled CSV")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--mode", mode, "testing | evolved | unseen")
        ->check(CLI::IsMember({"testing", "evolved", "unseen"}));
    evaluate->callback([&] { cmd_evaluate(g, ckpt_path, data_path, mode); });

    CLI::App* episodes = app.add_subcommand("episodes", "few-shot episode grid evaluation");
    episodes->add_option("--checkpoint", ckpt_path, "trained checkpoint")
        ->required()
        ->check(CLI::ExistingFile);
    episodes->add_option("--data", data_path, "labeled CSV")->required()->check(CLI::ExistingFile);
    episodes->callback([&] { cmd_episodes(g, ckpt_path, data_path); });

    CLI::App* exporter = app.add_subcommand("export-embeddings", "write latent coordinates as CSV");
    exporter->add_option("--checkpoint", ckpt_path, "trained checkpoint")
        ->required()
        ->check(CLI::ExistingFile);
    exporter->add_option("--data", data_path, "input CSV")->required()->check(CLI::ExistingFile);
    exporter->add_option("--out", out_path, "output CSV path")->required();
    exporter->callback([&] { cmd_export(g, ckpt_path, data_path, out_path); });

    CLI::App* generate = app.add_subcommand("generate-scenario", "write a synthetic dataset");
    generate->add_option("--out-dir", out_dir, "output directory")->required();
    generate->callback([&] { cmd_generate(g, out_dir); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
