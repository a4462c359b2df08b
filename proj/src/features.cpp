#include "adrift/features.hpp"

#include "adrift/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string_view>

namespace adrift::features {
namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

bool parse_double(std::string_view sv, double& out) {
    // Rejects empty cells, trailing junk, and nan/inf spellings.
    while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t')) sv.remove_prefix(1);
    while (!sv.empty() && (sv.back() == ' ' || sv.back() == '\t')) sv.remove_suffix(1);
    if (sv.empty()) return false;
    const char* first = sv.data();
    const char* last = sv.data() + sv.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) return false;
    return std::isfinite(out);
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

// Empirical quantile of sorted values at rank q in [0, 1], linearly
// interpolated between order statistics.
double quantile_at(const std::vector<double>& sorted, double q) {
    const auto n = static_cast<Index>(sorted.size());
    if (n == 1) return sorted[0];
    const double pos = q * static_cast<double>(n - 1);
    const auto lo = static_cast<Index>(std::floor(pos));
    if (lo >= n - 1) return sorted[static_cast<std::size_t>(n - 1)];
    const double frac = pos - static_cast<double>(lo);
    return sorted[static_cast<std::size_t>(lo)] * (1.0 - frac) +
           sorted[static_cast<std::size_t>(lo) + 1] * frac;
}

// CDF position of v on a non-decreasing map of `res` knots at ranks
// 0, 1/(res-1), ..., 1. Values at a flat plateau map to its midpoint rank.
double cdf_position(const Eigen::Ref<const Vector>& map, double v) {
    const Index res = map.size();
    if (v < map(0)) return 0.0;
    if (v > map(res - 1)) return 1.0;
    const double* begin = map.data();
    const double* end = begin + res;
    const double* lo = std::lower_bound(begin, end, v);   // first knot >= v
    const double* hi = std::upper_bound(begin, end, v);   // first knot > v
    if (lo != hi) {
        // v coincides with one or more knots; take the plateau midpoint.
        const double first = static_cast<double>(lo - begin);
        const double last = static_cast<double>(hi - begin) - 1.0;
        return 0.5 * (first + last) / static_cast<double>(res - 1);
    }
    // Strictly between knots lo-1 and lo.
    const Index j = static_cast<Index>(lo - begin) - 1;
    const double frac = (v - map(j)) / (map(j + 1) - map(j));
    return (static_cast<double>(j) + frac) / static_cast<double>(res - 1);
}

Vector padded_to(const Vector& v, Index dim) {
    Vector out = Vector::Zero(dim);
    out.head(std::min(dim, v.size())) = v.head(std::min(dim, v.size()));
    return out;
}

void sample_blob(Matrix& data, std::vector<std::string>& labels, std::vector<std::string>& ids,
                 Index& row, const std::string& part, const FamilyBlob& blob, const Vector& center,
                 double scale, Index ambient_dim, Rng& rng) {
    for (Index k = 0; k < blob.count; ++k, ++row) {
        for (Index d = 0; d < ambient_dim; ++d) {
            data(row, d) = center(d) + scale * rng.normal();
        }
        labels[static_cast<std::size_t>(row)] = blob.name;
        std::ostringstream id;
        id << part << "-" << blob.name << "-" << k;
        ids[static_cast<std::size_t>(row)] = id.str();
    }
}

FeatureMatrix sample_part(const std::vector<FamilyBlob>& blobs,
                          const std::map<std::string, FamilyShift>* shifts, Index ambient_dim,
                          const std::string& part, Seed seed) {
    Index total = 0;
    for (const auto& b : blobs) total += b.count;
    FeatureMatrix out;
    out.data.resize(total, ambient_dim);
    out.labels.resize(static_cast<std::size_t>(total));
    out.ids.resize(static_cast<std::size_t>(total));
    Index row = 0;
    std::uint64_t tag = 0;
    for (const auto& blob : blobs) {
        Rng rng(derive_seed(seed, tag++));
        Vector center = padded_to(blob.center, ambient_dim);
        double scale = blob.scale;
        if (shifts != nullptr) {
            auto it = shifts->find(blob.name);
            if (it != shifts->end()) {
                if (it->second.displacement.size() > 0) {
                    center += padded_to(it->second.displacement, ambient_dim);
                }
                scale *= it->second.scale_inflation;
            }
        }
        sample_blob(out.data, out.labels, out.ids, row, part, blob, center, scale, ambient_dim,
                    rng);
    }
    return out;
}

}  // namespace

std::map<std::string, std::vector<Index>> FeatureMatrix::rows_by_label() const {
    std::map<std::string, std::vector<Index>> groups;
    for (Index i = 0; i < rows(); ++i) {
        groups[labels[static_cast<std::size_t>(i)]].push_back(i);
    }
    return groups;
}

void FeatureMatrix::validate() const {
    if (data.cols() <= 0) throw std::runtime_error("FeatureMatrix: no feature columns");
    if (!labels.empty() && static_cast<Index>(labels.size()) != rows()) {
        throw std::runtime_error("FeatureMatrix: label count does not match row count");
    }
    if (!ids.empty() && static_cast<Index>(ids.size()) != rows()) {
        throw std::runtime_error("FeatureMatrix: id count does not match row count");
    }
    for (const auto& l : labels) {
        if (l.empty()) throw std::runtime_error("FeatureMatrix: empty label");
    }
    if (!data.allFinite()) throw std::runtime_error("FeatureMatrix: non-finite value");
}

FeatureMatrix load_csv(const std::filesystem::path& path,
                       const std::optional<std::string>& label_column,
                       const std::optional<std::string>& id_column) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file " + path.string());
    const std::vector<std::string> header = split_line(line);

    Index label_idx = -1;
    Index id_idx = -1;
    for (Index i = 0; i < static_cast<Index>(header.size()); ++i) {
        if (label_column && header[static_cast<std::size_t>(i)] == *label_column) label_idx = i;
        if (id_column && header[static_cast<std::size_t>(i)] == *id_column) id_idx = i;
    }
    if (label_column && label_idx < 0) {
        throw std::runtime_error("load_csv: label column '" + *label_column + "' not in header");
    }
    if (id_column && id_idx < 0) {
        throw std::runtime_error("load_csv: id column '" + *id_column + "' not in header");
    }

    std::vector<Index> feature_cols;
    for (Index i = 0; i < static_cast<Index>(header.size()); ++i) {
        if (i != label_idx && i != id_idx) feature_cols.push_back(i);
    }
    if (feature_cols.empty()) throw std::runtime_error("load_csv: no feature columns");

    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    std::vector<std::string> ids;
    Index row_number = 0;
    while (std::getline(in, line)) {
        ++row_number;
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != header.size()) {
            std::ostringstream msg;
            msg << "load_csv: row " << row_number << " has " << fields.size()
                << " fields, expected " << header.size();
            throw std::runtime_error(msg.str());
        }
        std::vector<double> row(feature_cols.size());
        for (std::size_t j = 0; j < feature_cols.size(); ++j) {
            const auto& cell = fields[static_cast<std::size_t>(feature_cols[j])];
            if (!parse_double(cell, row[j])) {
                std::ostringstream msg;
                msg << "load_csv: row " << row_number << ", column '"
                    << header[static_cast<std::size_t>(feature_cols[j])]
                    << "': invalid numeric value '" << cell << "'";
                throw std::runtime_error(msg.str());
            }
        }
        rows.push_back(std::move(row));
        if (label_idx >= 0) {
            const auto& l = fields[static_cast<std::size_t>(label_idx)];
            if (l.empty()) {
                std::ostringstream msg;
                msg << "load_csv: row " << row_number << ": empty label";
                throw std::runtime_error(msg.str());
            }
            labels.push_back(l);
        }
        if (id_idx >= 0) ids.push_back(fields[static_cast<std::size_t>(id_idx)]);
    }
    if (rows.empty()) throw std::runtime_error("load_csv: no data rows in " + path.string());

    FeatureMatrix out;
    out.data.resize(static_cast<Index>(rows.size()), static_cast<Index>(feature_cols.size()));
    for (Index i = 0; i < out.data.rows(); ++i) {
        for (Index j = 0; j < out.data.cols(); ++j) {
            out.data(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    out.labels = std::move(labels);
    out.ids = std::move(ids);
    out.validate();
    return out;
}

void write_csv(const FeatureMatrix& m, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path.string());
    if (m.has_ids()) out << "id,";
    if (m.has_labels()) out << "label,";
    for (Index j = 0; j < m.cols(); ++j) {
        out << "f" << j << (j + 1 < m.cols() ? "," : "");
    }
    out << "\n";
    for (Index i = 0; i < m.rows(); ++i) {
        if (m.has_ids()) out << m.ids[static_cast<std::size_t>(i)] << ",";
        if (m.has_labels()) out << m.labels[static_cast<std::size_t>(i)] << ",";
        for (Index j = 0; j < m.cols(); ++j) {
            out << format_double(m.data(i, j)) << (j + 1 < m.cols() ? "," : "");
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("write_csv: write failed for " + path.string());
}

std::vector<std::string> csv_header(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv_header: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv_header: empty file " + path.string());
    return split_line(line);
}

PreprocessState fit_preprocess(const FeatureMatrix& train, double variance_floor,
                               Index quantile_resolution) {
    if (train.rows() == 0) throw std::invalid_argument("fit_preprocess: empty training set");
    if (variance_floor < 0) throw std::invalid_argument("fit_preprocess: negative variance floor");
    if (quantile_resolution < 2) {
        throw std::invalid_argument("fit_preprocess: quantile resolution must be >= 2");
    }

    const Index n = train.rows();
    PreprocessState state;
    state.variance_floor = variance_floor;
    state.original_width = train.cols();

    for (Index j = 0; j < train.cols(); ++j) {
        const double mean = train.data.col(j).mean();
        const double var = (train.data.col(j).array() - mean).square().sum() /
                           static_cast<double>(n);
        if (var > variance_floor) state.retained_indices.push_back(j);
    }
    if (state.retained_indices.empty()) {
        throw std::runtime_error(
            "fit_preprocess: variance floor removed every feature; lower the floor");
    }

    state.quantile_maps.resize(quantile_resolution, state.retained_width());
    std::vector<double> column(static_cast<std::size_t>(n));
    for (Index jj = 0; jj < state.retained_width(); ++jj) {
        const Index j = state.retained_indices[static_cast<std::size_t>(jj)];
        for (Index i = 0; i < n; ++i) column[static_cast<std::size_t>(i)] = train.data(i, j);
        std::sort(column.begin(), column.end());
        for (Index r = 0; r < quantile_resolution; ++r) {
            const double q = static_cast<double>(r) / static_cast<double>(quantile_resolution - 1);
            state.quantile_maps(r, jj) = quantile_at(column, q);
        }
    }
    return state;
}

Matrix apply_preprocess(const PreprocessState& state, const Matrix& x) {
    if (x.cols() != state.original_width) {
        std::ostringstream msg;
        msg << "apply_preprocess: input width " << x.cols() << " does not match fitted width "
            << state.original_width;
        throw std::runtime_error(msg.str());
    }
    Matrix out(x.rows(), state.retained_width());
    for (Index jj = 0; jj < state.retained_width(); ++jj) {
        const Index j = state.retained_indices[static_cast<std::size_t>(jj)];
        const auto map = state.quantile_maps.col(jj);
        for (Index i = 0; i < x.rows(); ++i) {
            out(i, jj) = cdf_position(map, x(i, j));
        }
    }
    return out;
}

FeatureMatrix apply_preprocess(const PreprocessState& state, const FeatureMatrix& x) {
    FeatureMatrix out;
    out.data = apply_preprocess(state, x.data);
    out.labels = x.labels;
    out.ids = x.ids;
    return out;
}

Vector apply_preprocess_row(const PreprocessState& state, const Vector& row) {
    Matrix m = apply_preprocess(state, Matrix(row.transpose()));
    return m.row(0).transpose();
}

std::pair<FeatureMatrix, FeatureMatrix> split(const FeatureMatrix& data, double train_fraction,
                                              Seed seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("split: train_fraction must lie strictly between 0 and 1");
    }

    std::map<std::string, std::vector<Index>> strata;
    if (data.has_labels()) {
        strata = data.rows_by_label();
    } else {
        auto& all = strata[""];
        for (Index i = 0; i < data.rows(); ++i) all.push_back(i);
    }

    Rng rng(seed);
    std::vector<Index> train_rows;
    std::vector<Index> val_rows;
    for (auto& [name, rows] : strata) {
        if (rows.size() < 2) {
            throw std::runtime_error("split: stratum '" + name + "' has fewer than 2 samples");
        }
        rng.shuffle(rows);
        const auto n = static_cast<Index>(rows.size());
        Index n_train = static_cast<Index>(std::llround(train_fraction * static_cast<double>(n)));
        n_train = std::clamp<Index>(n_train, 1, n - 1);
        train_rows.insert(train_rows.end(), rows.begin(), rows.begin() + n_train);
        val_rows.insert(val_rows.end(), rows.begin() + n_train, rows.end());
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(val_rows.begin(), val_rows.end());

    auto take = [&data](const std::vector<Index>& rows) {
        FeatureMatrix out;
        out.data.resize(static_cast<Index>(rows.size()), data.cols());
        if (data.has_labels()) out.labels.resize(rows.size());
        if (data.has_ids()) out.ids.resize(rows.size());
        for (std::size_t k = 0; k < rows.size(); ++k) {
            out.data.row(static_cast<Index>(k)) = data.data.row(rows[k]);
            if (data.has_labels()) out.labels[k] = data.labels[static_cast<std::size_t>(rows[k])];
            if (data.has_ids()) out.ids[k] = data.ids[static_cast<std::size_t>(rows[k])];
        }
        return out;
    };
    return {take(train_rows), take(val_rows)};
}

void SyntheticScenario::validate() const {
    if (ambient_dim < 2) throw std::invalid_argument("scenario: ambient_dim must be >= 2");
    std::map<std::string, int> seen;
    auto check = [&](const std::vector<FamilyBlob>& blobs) {
        for (const auto& b : blobs) {
            if (b.name.empty()) throw std::invalid_argument("scenario: empty family name");
            if (b.count < 1) throw std::invalid_argument("scenario: family count must be >= 1");
            if (b.center.size() > ambient_dim) {
                throw std::invalid_argument("scenario: center wider than ambient_dim");
            }
            if (++seen[b.name] > 1) {
                throw std::invalid_argument("scenario: duplicate family name '" + b.name + "'");
            }
        }
    };
    check(known_families);
    check(unseen_families);
}

ScenarioData generate_scenario(const SyntheticScenario& spec) {
    spec.validate();
    ScenarioData out;
    out.train = sample_part(spec.known_families, nullptr, spec.ambient_dim, "train",
                            derive_seed(spec.seed, 1));
    out.evolved = sample_part(spec.known_families, &spec.evolved_shift, spec.ambient_dim,
                              "evolved", derive_seed(spec.seed, 2));
    out.unseen = sample_part(spec.unseen_families, nullptr, spec.ambient_dim, "unseen",
                             derive_seed(spec.seed, 3));
    return out;
}

SyntheticScenario make_separated_scenario(Index known_families, Index unseen_families,
                                          Index ambient_dim, Index samples_per_family,
                                          double separation, double evolved_shift_sigmas,
                                          Seed seed) {
    if (known_families > 2 * ambient_dim) {
        throw std::invalid_argument(
            "make_separated_scenario: needs ambient_dim >= known_families / 2");
    }
    if (2 * unseen_families > ambient_dim) {
        throw std::invalid_argument(
            "make_separated_scenario: needs ambient_dim >= 2 * unseen_families");
    }
    SyntheticScenario spec;
    spec.ambient_dim = ambient_dim;
    spec.seed = seed;

    // Centers at +/- c * e_axis give pairwise distances of at least c * sqrt(2).
    const double c = separation / std::sqrt(2.0);
    auto center_for = [&](Index k) {
        Vector v = Vector::Zero(ambient_dim);
        const Index axis = k % ambient_dim;
        v(axis) = (k < ambient_dim) ? c : -c;
        return v;
    };

    for (Index k = 0; k < known_families; ++k) {
        std::ostringstream name;
        name << "family-" << k;
        spec.known_families.push_back({name.str(), center_for(k), 1.0, samples_per_family});
        if (evolved_shift_sigmas != 0.0) {
            // Evolution pulls each family toward the next family's center.
            // Families keep their own signature (their axis coordinate is
            // untouched) while gaining part of a neighbor's, so the evolved
            // blobs stay pairwise separated instead of piling up somewhere.
            const Index next = (k + 1) % known_families;
            Vector d = center_for(next) / c * evolved_shift_sigmas;
            spec.evolved_shift[name.str()] = FamilyShift{d, 1.0};
        }
    }
    // Unseen centers sit on pair diagonals a * (e_{2k} + e_{2k+1}) instead of
    // fresh axes: every coordinate stays inside the range the known families
    // cover, so the family is distinguished by a combination of feature
    // values rather than a single out-of-range feature. Rank-preserving
    // normalizations keep such combinations separable, while a value beyond
    // the training range collapses to the boundary. a = cos(15 degrees) *
    // separation makes the nearest known center exactly `separation` away.
    const double a = separation * (std::sqrt(2.0) + std::sqrt(6.0)) / 4.0;
    for (Index k = 0; k < unseen_families; ++k) {
        std::ostringstream name;
        name << "unseen-" << k;
        Vector center = Vector::Zero(ambient_dim);
        center(2 * k) = a;
        center(2 * k + 1) = a;
        spec.unseen_families.push_back({name.str(), center, 1.0, samples_per_family});
    }
    return spec;
}

}  // namespace adrift::features
