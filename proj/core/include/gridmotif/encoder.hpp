#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridmotif/graph.hpp"
#include "gridmotif/rng.hpp"
#include "gridmotif/sampling.hpp"

namespace gridmotif {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Input layout per node: node-type one-hot (4), voltage one-hot over the
/// known buckets plus one slot for absent or unlisted voltages, anchor flag,
/// degree divided by the neighborhood's maximum degree.
struct FeatureSpec {
  std::vector<double> voltage_buckets;

  std::size_t voltage_slots() const { return voltage_buckets.size() + 1; }
  std::size_t input_dim() const { return kNodeTypeCount + voltage_slots() + 2; }

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

struct EncoderDims {
  std::size_t hidden = 64;  // d
  std::size_t embed = 64;   // D
  std::size_t layers = 8;   // K

  friend bool operator==(const EncoderDims&, const EncoderDims&) = default;
};

/// Parameters of the pre-processing layer, K sum-aggregation layers with
/// weighted skip connections, and the post-processing layer.
///
/// Layer k (1-based) maps its input X (width d for k = 1, 2d otherwise) to
///   H'_k = relu([X, A X] W_k^T)            A = neighbor-sum operator
///   H_k  = [sum_{i<k} w_{i,k} H'_i, H'_k]  width 2d
/// and the anchor row of H_K feeds z = relu(Q h + q).
struct EncoderParams {
  FeatureSpec features;
  EncoderDims dims;

  Matrix pre_weight;                // d x input_dim
  Vector pre_bias;                  // d
  std::vector<Matrix> sage_weight;  // K matrices, d x 2*width(k)
  Vector skip_weight;               // w_{i,k} packed by skip_index(i, k)
  Matrix post_weight;               // D x 2d
  Vector post_bias;                 // D

  /// Packed position of w_{i,k} for 0-based layers i < k.
  static std::size_t skip_index(std::size_t i, std::size_t k) { return k * (k - 1) / 2 + i; }

  static EncoderParams initialize(FeatureSpec features, EncoderDims dims, std::uint64_t seed);
  static EncoderParams zeros_like(const EncoderParams& shape);

  /// Every parameter block in checkpoint order (column-major within blocks):
  /// pre_weight, pre_bias, sage_weight[0..K-1], skip_weight, post_weight,
  /// post_bias.
  std::vector<std::span<double>> blocks();
  std::vector<std::span<const double>> blocks() const;

  std::size_t parameter_count() const;
  bool all_finite() const;
  /// Rounds every parameter to the nearest float so checkpoints are lossless.
  void round_to_float();
};

/// D-vector in the non-negative orthant.
struct Embedding {
  Vector values;

  std::size_t dim() const { return static_cast<std::size_t>(values.size()); }
  friend bool operator==(const Embedding& a, const Embedding& b) {
    return a.values.size() == b.values.size() && a.values == b.values;
  }
};

Matrix featurize(const Neighborhood& nbhd, const FeatureSpec& spec);

/// Neighbor aggregation during training: draw exactly sample_cap neighbors per
/// node (with replacement when the degree is smaller, without when larger)
/// and rescale the sum by degree / sample_cap.
struct NeighborSampling {
  std::size_t sample_cap = 8;
  Rng* rng = nullptr;
};

/// Inference mode aggregates every neighbor deterministically.
Embedding encode(const EncoderParams& params, const Neighborhood& nbhd);
Embedding encode(const EncoderParams& params, const Neighborhood& nbhd,
                 const NeighborSampling& sampling);

std::vector<Embedding> encode_all(const EncoderParams& params,
                                  std::span<const Neighborhood> neighborhoods);

/// ||max(0, z_u - z_v)||^2
double energy(const Embedding& z_u, const Embedding& z_v);

/// 1 iff energy < t (strict).
bool predict_subgraph(const Embedding& z_u, const Embedding& z_v, double t);

struct ScoredPair {
  Embedding z_u;
  Embedding z_v;
  bool label = false;
};

/// Sum over positives of E plus sum over negatives of max(0, alpha - E).
double pair_loss(std::span<const ScoredPair> batch, double alpha);

enum class Reduction { Sum, Mean };

struct TrainConfig {
  double alpha = 0.5;
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t epochs = 50;
  std::size_t neighbor_samples = 8;
  bool sample_neighbors = true;
  std::uint64_t seed = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  Reduction reduction = Reduction::Mean;
};

struct PairRef {
  const Neighborhood* query;
  const Neighborhood* target;
  bool label;
};

/// Loss of the batch and its exact reverse-mode gradient. Kinks of relu and
/// the hinge take subgradient 0. When sampling is enabled each pair draws from
/// make_stream(sampling_seed, {pair_keys[i]}).
struct BatchGradient {
  double loss = 0.0;
  EncoderParams grad;
};

BatchGradient loss_and_gradient(const EncoderParams& params, std::span<const PairRef> batch,
                                double alpha, Reduction reduction = Reduction::Sum);

BatchGradient loss_and_gradient(const EncoderParams& params, std::span<const PairRef> batch,
                                double alpha, Reduction reduction, std::size_t sample_cap,
                                std::uint64_t sampling_seed,
                                std::span<const std::uint64_t> pair_keys);

/// Same loss without gradients (inference-mode aggregation).
double batch_loss(const EncoderParams& params, std::span<const PairRef> batch, double alpha,
                  Reduction reduction = Reduction::Sum);

/// Threshold maximizing F1 (positives are the positive class) over midpoints
/// between consecutive distinct energies plus one value past each end.
/// Ties resolve to the smallest threshold.
double calibrate_threshold(std::span<const double> energies, std::span<const bool> labels);

double calibrate_threshold(const EncoderParams& params, std::span<const PairRef> pairs);

double pair_accuracy(std::span<const double> energies, std::span<const bool> labels, double t);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_accuracy = 0.0;
  double threshold = 0.0;
};

struct TrainResult {
  EncoderParams params;
  std::vector<EpochRecord> log;
  std::size_t best_epoch = 0;
  double best_accuracy = 0.0;
  /// Calibrated on the validation split at the best epoch.
  double threshold = 0.1;
};

/// Called after every epoch with its record and the current parameters.
using EpochObserver = std::function<void(const EpochRecord&, const EncoderParams&)>;

/// Adam over shuffled minibatches. Returns the parameters from the epoch with
/// the best validation accuracy, rounded to float precision.
TrainResult train(const Dataset& dataset, const EncoderParams& initial, const TrainConfig& config,
                  const EpochObserver& on_epoch = {});

/// Checkpoint: "GMENC001" magic, little-endian u32 version, dims, voltage
/// bucket table as f64, u64 parameter count, then f32 parameters in blocks()
/// order.
std::string checkpoint_bytes(const EncoderParams& params);
EncoderParams params_from_checkpoint(std::string_view bytes);
void save_checkpoint(const EncoderParams& params, const std::filesystem::path& path);
EncoderParams load_checkpoint(const std::filesystem::path& path);

/// Hash of the checkpoint bytes; identifies the encoder that built a store.
std::string fingerprint(const EncoderParams& params);

}  // namespace gridmotif
