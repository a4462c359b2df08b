#include "adrift/net.hpp"

#include "adrift/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>

namespace adrift::net {

namespace {

bool finite(const Matrix& m) { return m.allFinite(); }
bool finite(const Vector& v) { return v.allFinite(); }

void validate_specs(const std::vector<LayerSpec>& specs, const std::string& which) {
    if (specs.empty()) throw std::invalid_argument(which + " needs at least one layer");
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const LayerSpec& s = specs[i];
        if (s.width <= 0)
            throw std::invalid_argument(which + " layer " + std::to_string(i) +
                                        " has non-positive width");
        if (s.dropout_rate < 0.0 || s.dropout_rate >= 1.0)
            throw std::invalid_argument(which + " layer " + std::to_string(i) +
                                        " has dropout outside [0, 1)");
    }
}

DenseLayer make_layer(const LayerSpec& spec, Index fan_in, Rng& rng) {
    DenseLayer layer;
    layer.spec = spec;
    layer.weight.resize(spec.width, fan_in);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Index r = 0; r < spec.width; ++r)
        for (Index c = 0; c < fan_in; ++c) layer.weight(r, c) = rng.uniform(-bound, bound);
    layer.bias = Vector::Zero(spec.width);
    if (spec.has_batchnorm) {
        layer.running_mean = Vector::Zero(spec.width);
        layer.running_var = Vector::Ones(spec.width);
    }
    return layer;
}

/// Per-layer forward intermediates kept for the backward pass.
struct LayerCache {
    Matrix input;
    Vector batch_mean;
    Vector inv_std;
    Matrix normalized;  // post-batchnorm (or the raw linear output without it)
    Matrix mask;        // inverted dropout mask, empty when unused
};

Matrix forward_stack(const std::vector<DenseLayer>& layers, Matrix x, bool training,
                     std::vector<LayerCache>* caches, Rng* dropout_rng) {
    if (caches) caches->resize(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const DenseLayer& layer = layers[i];
        LayerCache* cache = caches ? &(*caches)[i] : nullptr;
        if (cache) cache->input = x;
        Matrix h = x * layer.weight.transpose();
        h.rowwise() += layer.bias.transpose();
        if (layer.spec.has_batchnorm) {
            Vector mean;
            Vector var;
            if (training) {
                mean = h.colwise().mean();
                Matrix centered = h.rowwise() - mean.transpose();
                var = centered.array().square().colwise().mean();
            } else {
                mean = layer.running_mean;
                var = layer.running_var;
            }
            Vector inv_std = (var.array() + kBatchnormEpsilon).sqrt().inverse();
            h.rowwise() -= mean.transpose();
            h = h * inv_std.asDiagonal();
            if (cache) {
                cache->batch_mean = std::move(mean);
                cache->inv_std = std::move(inv_std);
            }
        }
        if (cache) cache->normalized = h;
        if (layer.spec.activation == Activation::relu) h = h.cwiseMax(0.0);
        if (training && dropout_rng && layer.spec.dropout_rate > 0.0) {
            const double keep = 1.0 - layer.spec.dropout_rate;
            Matrix mask(h.rows(), h.cols());
            for (Index r = 0; r < h.rows(); ++r)
                for (Index c = 0; c < h.cols(); ++c)
                    mask(r, c) = dropout_rng->bernoulli(keep) ? 1.0 / keep : 0.0;
            h = h.cwiseProduct(mask);
            if (cache) cache->mask = std::move(mask);
        }
        x = std::move(h);
    }
    return x;
}

/// Propagates grad_out back through the stack, accumulating parameter
/// gradients, and returns the gradient with respect to the stack input.
Matrix backward_stack(const std::vector<DenseLayer>& layers,
                      const std::vector<LayerCache>& caches, Matrix grad,
                      std::vector<LayerGrads>& grads) {
    for (std::size_t ri = layers.size(); ri-- > 0;) {
        const DenseLayer& layer = layers[ri];
        const LayerCache& cache = caches[ri];
        if (cache.mask.size() > 0) grad = grad.cwiseProduct(cache.mask);
        if (layer.spec.activation == Activation::relu)
            grad = grad.cwiseProduct((cache.normalized.array() > 0.0).cast<double>().matrix());
        if (layer.spec.has_batchnorm) {
            // Batch-statistics backward: with xhat the normalized output,
            // dh = inv_std * (g - mean(g) - xhat * mean(g .* xhat)) per column.
            Eigen::RowVectorXd mean_g = grad.colwise().mean();
            Eigen::RowVectorXd mean_gx = grad.cwiseProduct(cache.normalized).colwise().mean();
            grad.rowwise() -= mean_g;
            grad -= cache.normalized * mean_gx.asDiagonal();
            grad = grad * cache.inv_std.asDiagonal();
        }
        grads[ri].weight.noalias() += grad.transpose() * cache.input;
        grads[ri].bias += grad.colwise().sum().transpose();
        grad = grad * layer.weight;
    }
    return grad;
}

std::vector<LayerGrads> zero_grads(const std::vector<DenseLayer>& layers) {
    std::vector<LayerGrads> grads(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i) {
        grads[i].weight = Matrix::Zero(layers[i].weight.rows(), layers[i].weight.cols());
        grads[i].bias = Vector::Zero(layers[i].bias.size());
    }
    return grads;
}

void check_input_width(const AutoencoderModel& model, Index cols, const std::string& op) {
    if (cols != model.input_dim)
        throw std::invalid_argument(op + ": expected width " + std::to_string(model.input_dim) +
                                    ", got " + std::to_string(cols));
}

struct PassStats {
    double triplet = 0.0;
    double mse = 0.0;
    double combined = 0.0;
};

/// One training-mode evaluation of the combined objective over a triplet
/// batch plus reconstruction rows. Fills grads when requested; reports the
/// batch statistics seen by each batchnorm layer so the caller can update
/// running stats (encoder stats from the triplet pass, decoder stats from
/// the reconstruction pass).
PassStats training_pass(const AutoencoderModel& model, const TripletBatch& batch,
                        const Matrix& recon_inputs, const LossWeights& weights, Rng* dropout_rng,
                        ModelGrads* grads, std::vector<LayerCache>* enc_stats_out,
                        std::vector<LayerCache>* dec_stats_out) {
    batch.validate();
    check_input_width(model, batch.anchors.cols(), "triplet batch");
    check_input_width(model, recon_inputs.cols(), "reconstruction inputs");
    const Index n = batch.size();
    const Index m = recon_inputs.rows();
    if (m == 0) throw std::invalid_argument("reconstruction inputs are empty");

    Matrix stacked(3 * n, batch.anchors.cols());
    stacked << batch.anchors, batch.positives, batch.negatives;
    std::vector<LayerCache> enc_caches;
    Matrix z = forward_stack(model.encoder, std::move(stacked), true, &enc_caches, dropout_rng);
    auto za = z.topRows(n);
    auto zp = z.middleRows(n, n);
    auto zn = z.bottomRows(n);

    Vector d_ap = (za - zp).rowwise().squaredNorm();
    Vector d_an = (za - zn).rowwise().squaredNorm();
    Vector hinge_arg = d_ap - d_an + Vector::Constant(n, batch.margin);
    double triplet = hinge_arg.cwiseMax(0.0).mean();

    PassStats stats;
    stats.triplet = triplet;

    std::vector<LayerCache> renc_caches;
    std::vector<LayerCache> dec_caches;
    Matrix zr = forward_stack(model.encoder, recon_inputs, true, &renc_caches, dropout_rng);
    Matrix xhat = forward_stack(model.decoder, std::move(zr), true, &dec_caches, dropout_rng);
    Matrix residual = xhat - recon_inputs;
    stats.mse = residual.squaredNorm() / static_cast<double>(m);
    stats.combined = stats.triplet + weights.lambda_mse * stats.mse;

    if (grads) {
        grads->encoder = zero_grads(model.encoder);
        grads->decoder = zero_grads(model.decoder);

        // Hinge is active only when its argument is strictly positive.
        Matrix dz = Matrix::Zero(3 * n, model.latent_dim);
        const double scale = 2.0 / static_cast<double>(n);
        for (Index i = 0; i < n; ++i) {
            if (hinge_arg(i) > 0.0) {
                dz.row(i) = scale * (zn.row(i) - zp.row(i));
                dz.row(n + i) = scale * (zp.row(i) - za.row(i));
                dz.row(2 * n + i) = scale * (za.row(i) - zn.row(i));
            }
        }
        backward_stack(model.encoder, enc_caches, std::move(dz), grads->encoder);

        Matrix dxhat = (2.0 * weights.lambda_mse / static_cast<double>(m)) * residual;
        Matrix dzr = backward_stack(model.decoder, dec_caches, std::move(dxhat), grads->decoder);
        backward_stack(model.encoder, renc_caches, std::move(dzr), grads->encoder);
    }

    if (enc_stats_out) *enc_stats_out = std::move(enc_caches);
    if (dec_stats_out) *dec_stats_out = std::move(dec_caches);
    return stats;
}

void update_running_stats(std::vector<DenseLayer>& layers, const std::vector<LayerCache>& caches,
                          double momentum) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        DenseLayer& layer = layers[i];
        if (!layer.spec.has_batchnorm) continue;
        const LayerCache& cache = caches[i];
        Vector batch_var =
            cache.inv_std.array().square().inverse() - kBatchnormEpsilon;
        layer.running_mean = momentum * layer.running_mean + (1.0 - momentum) * cache.batch_mean;
        layer.running_var = momentum * layer.running_var + (1.0 - momentum) * batch_var;
    }
}

struct AdamState {
    std::vector<LayerGrads> m_enc, v_enc, m_dec, v_dec;
    long step = 0;
};

void adam_update_block(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v,
                       const TrainConfig& cfg, double bias1, double bias2) {
    m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * grad;
    v = cfg.adam_beta2 * v.array().matrix() + (1.0 - cfg.adam_beta2) * grad.array().square().matrix();
    param.array() -= cfg.learning_rate * (m.array() / bias1) /
                     ((v.array() / bias2).sqrt() + cfg.adam_epsilon);
}

void adam_update_block(Vector& param, const Vector& grad, Vector& m, Vector& v,
                       const TrainConfig& cfg, double bias1, double bias2) {
    m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * grad;
    v = cfg.adam_beta2 * v.array().matrix() + (1.0 - cfg.adam_beta2) * grad.array().square().matrix();
    param.array() -= cfg.learning_rate * (m.array() / bias1) /
                     ((v.array() / bias2).sqrt() + cfg.adam_epsilon);
}

void adam_update(std::vector<DenseLayer>& layers, const std::vector<LayerGrads>& grads,
                 std::vector<LayerGrads>& m, std::vector<LayerGrads>& v, const TrainConfig& cfg,
                 double bias1, double bias2) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        adam_update_block(layers[i].weight, grads[i].weight, m[i].weight, v[i].weight, cfg, bias1,
                          bias2);
        adam_update_block(layers[i].bias, grads[i].bias, m[i].bias, v[i].bias, cfg, bias1, bias2);
    }
}

/// Uniform triplet sampling over a labeled dataset with fixed draw order
/// (anchor, positive, negative) so replay is exact.
class TripletSampler {
  public:
    explicit TripletSampler(const features::FeatureMatrix& data) : data_(data) {
        std::map<std::string, std::vector<Index>> by_label = data.rows_by_label();
        if (by_label.size() < 2)
            throw std::invalid_argument("triplet sampling needs at least two families");
        groups_.reserve(by_label.size());
        for (auto& [label, rows] : by_label) {
            if (rows.size() < 2)
                throw std::invalid_argument("family '" + label +
                                            "' needs at least two samples for triplet sampling");
            groups_.push_back(std::move(rows));
        }
        row_group_.resize(static_cast<std::size_t>(data.rows()));
        row_pos_.resize(static_cast<std::size_t>(data.rows()));
        others_.resize(groups_.size());
        for (std::size_t g = 0; g < groups_.size(); ++g) {
            for (std::size_t p = 0; p < groups_[g].size(); ++p) {
                row_group_[static_cast<std::size_t>(groups_[g][p])] = g;
                row_pos_[static_cast<std::size_t>(groups_[g][p])] = p;
            }
        }
        for (std::size_t g = 0; g < groups_.size(); ++g) {
            others_[g].reserve(static_cast<std::size_t>(data.rows()) - groups_[g].size());
            for (std::size_t h = 0; h < groups_.size(); ++h) {
                if (h == g) continue;
                others_[g].insert(others_[g].end(), groups_[h].begin(), groups_[h].end());
            }
        }
    }

    TripletBatch sample(Index count, double margin, Rng& rng,
                        std::vector<Index>* rows_union) const {
        if (count <= 0) throw std::invalid_argument("triplet count must be positive");
        TripletBatch batch;
        batch.margin = margin;
        batch.anchors.resize(count, data_.cols());
        batch.positives.resize(count, data_.cols());
        batch.negatives.resize(count, data_.cols());
        std::vector<Index> used;
        used.reserve(static_cast<std::size_t>(3 * count));
        for (Index i = 0; i < count; ++i) {
            const Index a = rng.uniform_index(data_.rows());
            const std::size_t g = row_group_[static_cast<std::size_t>(a)];
            std::size_t j = static_cast<std::size_t>(
                rng.uniform_index(static_cast<Index>(groups_[g].size()) - 1));
            if (j >= row_pos_[static_cast<std::size_t>(a)]) ++j;
            const Index p = groups_[g][j];
            const Index neg = others_[g][static_cast<std::size_t>(
                rng.uniform_index(static_cast<Index>(others_[g].size())))];
            batch.anchors.row(i) = data_.data.row(a);
            batch.positives.row(i) = data_.data.row(p);
            batch.negatives.row(i) = data_.data.row(neg);
            used.push_back(a);
            used.push_back(p);
            used.push_back(neg);
        }
        if (rows_union) {
            std::sort(used.begin(), used.end());
            used.erase(std::unique(used.begin(), used.end()), used.end());
            *rows_union = std::move(used);
        }
        return batch;
    }

  private:
    const features::FeatureMatrix& data_;
    std::vector<std::vector<Index>> groups_;
    std::vector<std::size_t> row_group_;
    std::vector<std::size_t> row_pos_;
    std::vector<std::vector<Index>> others_;
};

}  // namespace

bool AutoencoderModel::all_finite() const {
    for (const auto* stack : {&encoder, &decoder})
        for (const DenseLayer& layer : *stack) {
            if (!finite(layer.weight) || !finite(layer.bias)) return false;
            if (layer.spec.has_batchnorm &&
                (!finite(layer.running_mean) || !finite(layer.running_var)))
                return false;
        }
    return true;
}

void TripletBatch::validate() const {
    if (anchors.rows() == 0) throw std::invalid_argument("triplet batch is empty");
    if (positives.rows() != anchors.rows() || negatives.rows() != anchors.rows() ||
        positives.cols() != anchors.cols() || negatives.cols() != anchors.cols())
        throw std::invalid_argument("triplet batch parts must share one shape");
    if (!(margin > 0.0)) throw std::invalid_argument("triplet margin must be positive");
}

void TrainConfig::validate() const {
    if (epochs <= 0) throw std::invalid_argument("epochs must be positive");
    if (batch_triplets <= 0) throw std::invalid_argument("batch_triplets must be positive");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
    if (!(margin > 0.0)) throw std::invalid_argument("margin must be positive");
    if (loss_weights.lambda_mse < 0.0)
        throw std::invalid_argument("lambda_mse must be non-negative");
    if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 || adam_beta2 >= 1.0)
        throw std::invalid_argument("adam betas must lie in [0, 1)");
    if (!(adam_epsilon > 0.0)) throw std::invalid_argument("adam_epsilon must be positive");
    if (batchnorm_momentum < 0.0 || batchnorm_momentum >= 1.0)
        throw std::invalid_argument("batchnorm_momentum must lie in [0, 1)");
    if (early_stop_patience && *early_stop_patience <= 0)
        throw std::invalid_argument("early_stop_patience must be positive when set");
}

AutoencoderModel init_model(const std::vector<LayerSpec>& encoder,
                            const std::vector<LayerSpec>& decoder, Index input_dim, Seed seed) {
    if (input_dim <= 0) throw std::invalid_argument("input_dim must be positive");
    validate_specs(encoder, "encoder");
    validate_specs(decoder, "decoder");
    const LayerSpec& out = decoder.back();
    if (out.width != input_dim)
        throw std::invalid_argument("decoder output width must equal input_dim");
    if (out.activation != Activation::none || out.dropout_rate != 0.0)
        throw std::invalid_argument(
            "reconstruction layer must use activation none and dropout 0");

    AutoencoderModel model;
    model.input_dim = input_dim;
    model.latent_dim = encoder.back().width;
    Rng rng(seed);
    Index fan_in = input_dim;
    for (const LayerSpec& spec : encoder) {
        model.encoder.push_back(make_layer(spec, fan_in, rng));
        fan_in = spec.width;
    }
    for (const LayerSpec& spec : decoder) {
        model.decoder.push_back(make_layer(spec, fan_in, rng));
        fan_in = spec.width;
    }
    return model;
}

Matrix encode(const AutoencoderModel& model, const Matrix& x) {
    check_input_width(model, x.cols(), "encode");
    return forward_stack(model.encoder, x, false, nullptr, nullptr);
}

Vector encode(const AutoencoderModel& model, const Vector& x) {
    return encode(model, Matrix(x.transpose())).row(0).transpose();
}

Matrix decode(const AutoencoderModel& model, const Matrix& z) {
    if (z.cols() != model.latent_dim)
        throw std::invalid_argument("decode: expected width " + std::to_string(model.latent_dim) +
                                    ", got " + std::to_string(z.cols()));
    return forward_stack(model.decoder, z, false, nullptr, nullptr);
}

Vector decode(const AutoencoderModel& model, const Vector& z) {
    return decode(model, Matrix(z.transpose())).row(0).transpose();
}

double triplet_loss(const AutoencoderModel& model, const TripletBatch& batch) {
    batch.validate();
    Matrix za = encode(model, batch.anchors);
    Matrix zp = encode(model, batch.positives);
    Matrix zn = encode(model, batch.negatives);
    Vector d_ap = (za - zp).rowwise().squaredNorm();
    Vector d_an = (za - zn).rowwise().squaredNorm();
    return (d_ap - d_an + Vector::Constant(batch.size(), batch.margin)).cwiseMax(0.0).mean();
}

double mse_loss(const AutoencoderModel& model, const Matrix& x) {
    if (x.rows() == 0) throw std::invalid_argument("mse_loss: empty input");
    Matrix xhat = decode(model, encode(model, x));
    return (xhat - x).squaredNorm() / static_cast<double>(x.rows());
}

double combined_loss(const AutoencoderModel& model, const TripletBatch& batch,
                     const Matrix& recon_inputs, const LossWeights& weights) {
    return triplet_loss(model, batch) + weights.lambda_mse * mse_loss(model, recon_inputs);
}

TripletBatch sample_triplets(const features::FeatureMatrix& data, Index count, double margin,
                             Seed seed) {
    data.validate();
    if (!data.has_labels()) throw std::invalid_argument("triplet sampling needs labels");
    TripletSampler sampler(data);
    Rng rng(seed);
    return sampler.sample(count, margin, rng, nullptr);
}

double training_loss(const AutoencoderModel& model, const TripletBatch& batch,
                     const Matrix& recon_inputs, const LossWeights& weights) {
    return training_pass(model, batch, recon_inputs, weights, nullptr, nullptr, nullptr, nullptr)
        .combined;
}

ModelGrads combined_loss_gradients(const AutoencoderModel& model, const TripletBatch& batch,
                                   const Matrix& recon_inputs, const LossWeights& weights,
                                   double* loss_out) {
    ModelGrads grads;
    PassStats stats =
        training_pass(model, batch, recon_inputs, weights, nullptr, &grads, nullptr, nullptr);
    if (loss_out) *loss_out = stats.combined;
    return grads;
}

TrainResult train(const features::FeatureMatrix& data, const std::vector<LayerSpec>& encoder,
                  const std::vector<LayerSpec>& decoder, const TrainConfig& cfg,
                  const AutoencoderModel* warm_start) {
    cfg.validate();
    data.validate();
    if (!data.has_labels()) throw std::invalid_argument("training needs labeled data");
    TripletSampler sampler(data);

    TrainResult result;
    if (warm_start) {
        if (warm_start->input_dim != data.cols())
            throw std::invalid_argument("warm start model width does not match data");
        result.model = *warm_start;
    } else {
        result.model = init_model(encoder, decoder, data.cols(), derive_seed(cfg.seed, 0));
    }
    AutoencoderModel& model = result.model;

    Rng sample_rng(derive_seed(cfg.seed, 1));
    Rng dropout_rng(derive_seed(cfg.seed, 2));

    AdamState adam;
    adam.m_enc = zero_grads(model.encoder);
    adam.v_enc = zero_grads(model.encoder);
    adam.m_dec = zero_grads(model.decoder);
    adam.v_dec = zero_grads(model.decoder);

    const Index steps_per_epoch =
        (data.rows() + cfg.batch_triplets - 1) / cfg.batch_triplets;
    double best = std::numeric_limits<double>::infinity();
    Index since_best = 0;

    for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
        EpochStats epoch_stats;
        for (Index step = 0; step < steps_per_epoch; ++step) {
            std::vector<Index> union_rows;
            TripletBatch batch =
                sampler.sample(cfg.batch_triplets, cfg.margin, sample_rng, &union_rows);
            Matrix recon(static_cast<Index>(union_rows.size()), data.cols());
            for (std::size_t i = 0; i < union_rows.size(); ++i)
                recon.row(static_cast<Index>(i)) = data.data.row(union_rows[i]);

            ModelGrads grads;
            std::vector<LayerCache> enc_stats;
            std::vector<LayerCache> dec_stats;
            PassStats stats = training_pass(model, batch, recon, cfg.loss_weights, &dropout_rng,
                                            &grads, &enc_stats, &dec_stats);
            if (!std::isfinite(stats.combined))
                throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                                         ": non-finite loss");

            adam.step += 1;
            const double bias1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(adam.step));
            const double bias2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(adam.step));
            adam_update(model.encoder, grads.encoder, adam.m_enc, adam.v_enc, cfg, bias1, bias2);
            adam_update(model.decoder, grads.decoder, adam.m_dec, adam.v_dec, cfg, bias1, bias2);
            update_running_stats(model.encoder, enc_stats, cfg.batchnorm_momentum);
            update_running_stats(model.decoder, dec_stats, cfg.batchnorm_momentum);

            epoch_stats.triplet += stats.triplet;
            epoch_stats.mse += stats.mse;
            epoch_stats.combined += stats.combined;
        }
        const double denom = static_cast<double>(steps_per_epoch);
        epoch_stats.triplet /= denom;
        epoch_stats.mse /= denom;
        epoch_stats.combined /= denom;
        result.history.push_back(epoch_stats);

        if (!model.all_finite())
            throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                                     ": non-finite parameters");
        if (cfg.early_stop_patience) {
            if (epoch_stats.combined < best) {
                best = epoch_stats.combined;
                since_best = 0;
            } else if (++since_best >= *cfg.early_stop_patience) {
                break;
            }
        }
    }
    return result;
}

std::vector<double> export_parameters(const AutoencoderModel& model) {
    std::vector<double> out;
    for (const auto* stack : {&model.encoder, &model.decoder})
        for (const DenseLayer& layer : *stack) {
            out.insert(out.end(), layer.weight.data(), layer.weight.data() + layer.weight.size());
            out.insert(out.end(), layer.bias.data(), layer.bias.data() + layer.bias.size());
            if (layer.spec.has_batchnorm) {
                out.insert(out.end(), layer.running_mean.data(),
                           layer.running_mean.data() + layer.running_mean.size());
                out.insert(out.end(), layer.running_var.data(),
                           layer.running_var.data() + layer.running_var.size());
            }
        }
    return out;
}

void import_parameters(AutoencoderModel& model, std::span<const double> values) {
    std::size_t pos = 0;
    auto take = [&](double* dst, std::size_t count) {
        if (pos + count > values.size())
            throw std::invalid_argument("parameter import: too few values");
        std::copy(values.begin() + static_cast<std::ptrdiff_t>(pos),
                  values.begin() + static_cast<std::ptrdiff_t>(pos + count), dst);
        pos += count;
    };
    for (auto* stack : {&model.encoder, &model.decoder})
        for (DenseLayer& layer : *stack) {
            take(layer.weight.data(), static_cast<std::size_t>(layer.weight.size()));
            take(layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
            if (layer.spec.has_batchnorm) {
                take(layer.running_mean.data(), static_cast<std::size_t>(layer.running_mean.size()));
                take(layer.running_var.data(), static_cast<std::size_t>(layer.running_var.size()));
            }
        }
    if (pos != values.size()) throw std::invalid_argument("parameter import: too many values");
}

}  // namespace adrift::net
