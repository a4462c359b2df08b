#pragma once

#include "adrift/types.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace adrift::features {

/// Dense sample matrix with optional per-row family labels and ids.
/// `labels` and `ids` are either empty or exactly `data.rows()` long.
struct FeatureMatrix {
    Matrix data;
    std::vector<std::string> labels;
    std::vector<std::string> ids;

    Index rows() const { return data.rows(); }
    Index cols() const { return data.cols(); }
    bool has_labels() const { return !labels.empty(); }
    bool has_ids() const { return !ids.empty(); }

    /// Row indices grouped by label, families ordered by name.
    std::map<std::string, std::vector<Index>> rows_by_label() const;

    /// Throws if shapes are inconsistent, values are non-finite, or a label is empty.
    void validate() const;
};

/// Fitted preprocessing: variance thresholding followed by per-feature
/// empirical quantile maps. Immutable once fitted.
struct PreprocessState {
    /// Strictly increasing original feature indices that survived thresholding.
    std::vector<Index> retained_indices;
    /// resolution x |retained_indices|; column j is the non-decreasing quantile
    /// map of retained feature j.
    Matrix quantile_maps;
    double variance_floor = 0.0;
    /// Width of the matrix the state was fitted on.
    Index original_width = 0;

    Index retained_width() const { return static_cast<Index>(retained_indices.size()); }
};

/// One synthetic family: an isotropic Gaussian blob.
struct FamilyBlob {
    std::string name;
    Vector center;     ///< padded with zeros up to ambient_dim if shorter
    double scale = 1.0;
    Index count = 0;
};

/// How a known family evolves: displaced center and inflated spread.
struct FamilyShift {
    Vector displacement;  ///< zero-padded to ambient_dim; empty means no shift
    double scale_inflation = 1.0;
};

struct SyntheticScenario {
    std::vector<FamilyBlob> known_families;
    std::map<std::string, FamilyShift> evolved_shift;
    std::vector<FamilyBlob> unseen_families;
    Index ambient_dim = 0;
    Seed seed = 0;

    void validate() const;
};

struct ScenarioData {
    FeatureMatrix train;
    FeatureMatrix evolved;
    FeatureMatrix unseen;
};

/// Reads a CSV with a header row. Columns named by `label_column` / `id_column`
/// are split out; every other column must parse as a finite double.
/// Throws std::runtime_error naming the offending row/cell on malformed input.
FeatureMatrix load_csv(const std::filesystem::path& path,
                       const std::optional<std::string>& label_column = std::nullopt,
                       const std::optional<std::string>& id_column = std::nullopt);

/// Writes the matrix with header f0..f{n-1} plus optional id/label columns.
/// Doubles are printed with shortest round-trip formatting.
void write_csv(const FeatureMatrix& m, const std::filesystem::path& path);

/// Column names of a CSV header (used by the CLI to detect label/id columns).
std::vector<std::string> csv_header(const std::filesystem::path& path);

/// Retains features with empirical variance strictly above `variance_floor`
/// and fits a `quantile_resolution`-point quantile map per retained feature.
PreprocessState fit_preprocess(const FeatureMatrix& train, double variance_floor,
                               Index quantile_resolution);

/// Maps each value to its empirical CDF position in [0, 1] via linear
/// interpolation on the fitted quantile map; out-of-range values clamp.
FeatureMatrix apply_preprocess(const PreprocessState& state, const FeatureMatrix& x);
Matrix apply_preprocess(const PreprocessState& state, const Matrix& x);
Vector apply_preprocess_row(const PreprocessState& state, const Vector& row);

/// Deterministic stratified split. Labels present: stratified per family;
/// otherwise a single stratum. Both parts are non-empty per stratum.
std::pair<FeatureMatrix, FeatureMatrix> split(const FeatureMatrix& data, double train_fraction,
                                              Seed seed);

/// Samples the three scenario parts. Bit-identical output for equal inputs.
ScenarioData generate_scenario(const SyntheticScenario& spec);

/// Places known-family centers on scaled +/- coordinate axes and unseen
/// centers on two-axis diagonals, keeping every pairwise center distance at
/// least `separation` blob standard deviations. Supports up to
/// 2 * ambient_dim known families and ambient_dim / 2 unseen families.
SyntheticScenario make_separated_scenario(Index known_families, Index unseen_families,
                                          Index ambient_dim, Index samples_per_family,
                                          double separation, double evolved_shift_sigmas,
                                          Seed seed);

}  // namespace adrift::features
