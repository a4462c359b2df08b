#pragma once

#include "adrift/features.hpp"
#include "adrift/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adrift::net {

enum class Activation { relu, none };

struct LayerSpec {
    Index width = 0;
    bool has_batchnorm = false;
    Activation activation = Activation::relu;
    double dropout_rate = 0.0;
};

/// Fully connected layer. `weight` is (out x in); batchnorm running stats are
/// sized `width` when the spec enables batchnorm, empty otherwise.
struct DenseLayer {
    LayerSpec spec;
    Matrix weight;
    Vector bias;
    Vector running_mean;
    Vector running_var;
};

constexpr double kBatchnormEpsilon = 1e-5;

struct AutoencoderModel {
    std::vector<DenseLayer> encoder;
    std::vector<DenseLayer> decoder;
    Index input_dim = 0;
    Index latent_dim = 0;
    /// Preprocessing the encoder expects its inputs to have gone through.
    /// May be default-constructed for models built directly on raw vectors.
    features::PreprocessState preprocess;

    bool all_finite() const;
};

/// Anchor/positive/negative rows with matching shapes. The label constraint
/// (anchor and positive share a family, negative differs) is enforced by
/// sample_triplets, which is the only producer.
struct TripletBatch {
    Matrix anchors;
    Matrix positives;
    Matrix negatives;
    double margin = 1.0;

    Index size() const { return anchors.rows(); }
    void validate() const;
};

struct LossWeights {
    double lambda_mse = 0.5;
};

struct TrainConfig {
    Index epochs = 50;
    Index batch_triplets = 64;
    double learning_rate = 1e-3;
    double margin = 1.0;
    LossWeights loss_weights;
    Seed seed = 0;
    std::optional<Index> early_stop_patience;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double batchnorm_momentum = 0.9;

    void validate() const;
};

/// Builds a model with fan-in-scaled uniform weights and zero biases,
/// deterministic from the seed. The decoder's last layer must have width
/// `input_dim`, activation none, and dropout 0.
AutoencoderModel init_model(const std::vector<LayerSpec>& encoder,
                            const std::vector<LayerSpec>& decoder, Index input_dim, Seed seed);

/// Inference-mode forward passes: batchnorm uses running stats, dropout off.
Matrix encode(const AutoencoderModel& model, const Matrix& x);
Vector encode(const AutoencoderModel& model, const Vector& x);
Matrix decode(const AutoencoderModel& model, const Matrix& z);
Vector decode(const AutoencoderModel& model, const Vector& z);

/// Mean over triplets of max{0, ||f(a)-f(p)||^2 - ||f(a)-f(n)||^2 + margin}.
double triplet_loss(const AutoencoderModel& model, const TripletBatch& batch);

/// Mean over rows of ||x - decode(encode(x))||^2.
double mse_loss(const AutoencoderModel& model, const Matrix& x);

/// triplet_loss + lambda_mse * mse_loss.
double combined_loss(const AutoencoderModel& model, const TripletBatch& batch,
                     const Matrix& recon_inputs, const LossWeights& weights);

/// Uniform anchor over all rows, uniform positive from the anchor's family
/// (excluding the anchor row), uniform negative from any other family.
/// Requires at least two families, each with at least two samples.
TripletBatch sample_triplets(const features::FeatureMatrix& data, Index count, double margin,
                             Seed seed);

struct LayerGrads {
    Matrix weight;
    Vector bias;
};

struct ModelGrads {
    std::vector<LayerGrads> encoder;
    std::vector<LayerGrads> decoder;
};

/// Training-mode objective (batchnorm uses batch statistics; dropout off;
/// running stats untouched). Coincides with combined_loss for batchnorm-free
/// architectures.
double training_loss(const AutoencoderModel& model, const TripletBatch& batch,
                     const Matrix& recon_inputs, const LossWeights& weights);

/// Analytic gradients of training_loss with respect to every weight and bias.
ModelGrads combined_loss_gradients(const AutoencoderModel& model, const TripletBatch& batch,
                                   const Matrix& recon_inputs, const LossWeights& weights,
                                   double* loss_out = nullptr);

struct EpochStats {
    double triplet = 0.0;
    double mse = 0.0;
    double combined = 0.0;
};

struct TrainResult {
    AutoencoderModel model;
    std::vector<EpochStats> history;
};

/// Mini-batch Adam on the combined objective. One epoch draws
/// ceil(n_rows / batch_triplets) fresh triplet batches; the reconstruction
/// term covers the union of each batch's rows. Deterministic under cfg.seed.
/// Throws on divergence (non-finite loss), naming the epoch.
TrainResult train(const features::FeatureMatrix& data, const std::vector<LayerSpec>& encoder,
                  const std::vector<LayerSpec>& decoder, const TrainConfig& cfg,
                  const AutoencoderModel* warm_start = nullptr);

/// Flat parameter export/import in a fixed order (encoder then decoder; per
/// layer: weight in column-major storage order, bias, then running mean and
/// variance when batchnorm is enabled).
std::vector<double> export_parameters(const AutoencoderModel& model);
void import_parameters(AutoencoderModel& model, std::span<const double> values);

}  // namespace adrift::net
