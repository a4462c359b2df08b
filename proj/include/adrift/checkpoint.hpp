#pragma once

#include "adrift/cluster.hpp"
#include "adrift/drift.hpp"
#include "adrift/net.hpp"
#include "adrift/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace adrift::checkpoint {

inline constexpr std::int32_t kFormatVersion = 1;

struct Provenance {
    std::string created_at;  ///< ISO-8601 UTC; injectable for reproducible builds
    Seed seed = 0;
    std::string data_fingerprint;  ///< content hash of the training file
};

/// Everything needed to reload a trained detector: model weights and
/// batchnorm stats travel in export_parameters order, preprocessing and
/// cluster geometry in their own blocks, settings in the JSON header.
struct Checkpoint {
    net::AutoencoderModel model;  ///< arch, parameters, preprocess
    std::vector<cluster::Cluster> clusters;
    cluster::ThresholdPolicy threshold_policy;
    net::TrainConfig train_config;
    Provenance provenance;
};

/// Binary container: magic, u32 LE format version, u64 LE header length,
/// JSON header with sorted keys, then raw little-endian f64 blocks in the
/// order the header's manifest lists. Equal inputs produce equal bytes.
/// Writes to a temporary file and renames, so failures leave no partial file.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

/// Errors on bad magic or a format version other than kFormatVersion.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Wholesale detector snapshot for stream resume: the checkpoint content
/// plus buffer, prototypes, accumulators, counters, and the retrain context
/// (training data included) when one is attached.
void save_snapshot(const drift::DetectorState& state, const std::filesystem::path& path);
drift::DetectorState load_snapshot(const std::filesystem::path& path);

/// FNV-1a 64-bit content hash, hex-encoded; used as the data fingerprint.
std::string fingerprint_file(const std::filesystem::path& path);
std::string fingerprint_bytes(const void* data, std::size_t size);

}  // namespace adrift::checkpoint
