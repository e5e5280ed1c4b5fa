#include "gridmotif/encoder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gridmotif/error.hpp"
#include "gridmotif/parallel.hpp"
#include "hash.hpp"

namespace gridmotif {

// ---------------------------------------------------------------------------
// Parameters

EncoderParams EncoderParams::zeros_like(const EncoderParams& shape) {
  EncoderParams p;
  p.features = shape.features;
  p.dims = shape.dims;
  p.pre_weight = Matrix::Zero(shape.pre_weight.rows(), shape.pre_weight.cols());
  p.pre_bias = Vector::Zero(shape.pre_bias.size());
  for (const auto& w : shape.sage_weight) p.sage_weight.push_back(Matrix::Zero(w.rows(), w.cols()));
  p.skip_weight = Vector::Zero(shape.skip_weight.size());
  p.post_weight = Matrix::Zero(shape.post_weight.rows(), shape.post_weight.cols());
  p.post_bias = Vector::Zero(shape.post_bias.size());
  return p;
}

namespace {

EncoderParams shaped(FeatureSpec features, EncoderDims dims) {
  if (dims.hidden == 0 || dims.embed == 0 || dims.layers == 0) {
    throw Error(ErrorCode::DimMismatch, "encoder dims must be positive");
  }
  EncoderParams p;
  p.features = std::move(features);
  p.dims = dims;
  const auto d = static_cast<Eigen::Index>(dims.hidden);
  const auto in = static_cast<Eigen::Index>(p.features.input_dim());
  p.pre_weight = Matrix::Zero(d, in);
  p.pre_bias = Vector::Zero(d);
  for (std::size_t k = 0; k < dims.layers; ++k) {
    const Eigen::Index width = k == 0 ? d : 2 * d;
    p.sage_weight.push_back(Matrix::Zero(d, 2 * width));
  }
  p.skip_weight = Vector::Zero(static_cast<Eigen::Index>(dims.layers * (dims.layers - 1) / 2));
  p.post_weight = Matrix::Zero(static_cast<Eigen::Index>(dims.embed), 2 * d);
  p.post_bias = Vector::Zero(static_cast<Eigen::Index>(dims.embed));
  return p;
}

void glorot(Matrix& m, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = dist(rng);
  }
}

}  // namespace

EncoderParams EncoderParams::initialize(FeatureSpec features, EncoderDims dims,
                                        std::uint64_t seed) {
  EncoderParams p = shaped(std::move(features), dims);
  Rng rng = make_stream(seed, {0x696e6974ULL});
  glorot(p.pre_weight, rng);
  for (auto& w : p.sage_weight) glorot(w, rng);
  glorot(p.post_weight, rng);
  p.pre_bias.setConstant(0.01);
  p.post_bias.setConstant(0.01);
  for (std::size_t k = 1; k < dims.layers; ++k) {
    for (std::size_t i = 0; i < k; ++i) {
      p.skip_weight(static_cast<Eigen::Index>(skip_index(i, k))) = 1.0 / static_cast<double>(k);
    }
  }
  return p;
}

std::vector<std::span<double>> EncoderParams::blocks() {
  std::vector<std::span<double>> out;
  auto add = [&](auto& m) { out.emplace_back(m.data(), static_cast<std::size_t>(m.size())); };
  add(pre_weight);
  add(pre_bias);
  for (auto& w : sage_weight) add(w);
  add(skip_weight);
  add(post_weight);
  add(post_bias);
  return out;
}

std::vector<std::span<const double>> EncoderParams::blocks() const {
  std::vector<std::span<const double>> out;
  for (auto s : const_cast<EncoderParams*>(this)->blocks()) out.emplace_back(s.data(), s.size());
  return out;
}

std::size_t EncoderParams::parameter_count() const {
  std::size_t n = 0;
  for (auto b : blocks()) n += b.size();
  return n;
}

bool EncoderParams::all_finite() const {
  for (auto b : blocks()) {
    for (double v : b) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

void EncoderParams::round_to_float() {
  for (auto b : blocks()) {
    for (double& v : b) v = static_cast<double>(static_cast<float>(v));
  }
}

namespace {

void add_into(EncoderParams& acc, const EncoderParams& g, double scale = 1.0) {
  auto a = acc.blocks();
  const auto b = g.blocks();
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] += scale * b[i][j];
  }
}

// ---------------------------------------------------------------------------
// Forward / backward for one neighborhood

Matrix relu(const Matrix& m) { return m.cwiseMax(0.0); }

Matrix relu_mask(const Matrix& pre) { return (pre.array() > 0.0).cast<double>().matrix(); }

Matrix aggregation_operator(const Graph& g, const NeighborSampling* sampling) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Matrix op = Matrix::Zero(n, n);
  std::vector<NodeId> pool;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const auto nbrs = g.neighbors(v);
    const std::size_t deg = nbrs.size();
    if (deg == 0) continue;
    if (!sampling || deg == sampling->sample_cap) {
      for (NodeId u : nbrs) op(v, u) += 1.0;
      continue;
    }
    const std::size_t cap = sampling->sample_cap;
    const double scale = static_cast<double>(deg) / static_cast<double>(cap);
    if (deg < cap) {
      for (std::size_t s = 0; s < cap; ++s) op(v, nbrs[uniform_index(*sampling->rng, deg)]) += scale;
    } else {
      pool.assign(nbrs.begin(), nbrs.end());
      for (std::size_t s = 0; s < cap; ++s) {
        const auto j = s + uniform_index(*sampling->rng, deg - s);
        std::swap(pool[s], pool[j]);
        op(v, pool[s]) += scale;
      }
    }
  }
  return op;
}

struct Forward {
  Matrix x;
  Matrix pre0;
  Matrix h0;
  std::vector<Matrix> agg;       // aggregation operator per layer
  std::vector<Matrix> agg_in;    // A * input per layer
  std::vector<Matrix> pre;       // pre-activation per layer
  std::vector<Matrix> out;       // H'_k
  std::vector<Matrix> combined;  // H_k
  NodeId anchor = 0;
  Vector readout;
  Vector post_pre;
  Vector z;

  const Matrix& input(std::size_t k) const { return k == 0 ? h0 : combined[k - 1]; }
};

void check_dims(const EncoderParams& p) {
  const auto d = static_cast<Eigen::Index>(p.dims.hidden);
  bool ok = p.pre_weight.rows() == d &&
            p.pre_weight.cols() == static_cast<Eigen::Index>(p.features.input_dim()) &&
            p.pre_bias.size() == d && p.sage_weight.size() == p.dims.layers &&
            p.post_weight.cols() == 2 * d &&
            p.post_weight.rows() == static_cast<Eigen::Index>(p.dims.embed) &&
            p.post_bias.size() == static_cast<Eigen::Index>(p.dims.embed) &&
            p.skip_weight.size() ==
                static_cast<Eigen::Index>(p.dims.layers * (p.dims.layers - 1) / 2);
  for (std::size_t k = 0; ok && k < p.sage_weight.size(); ++k) {
    const Eigen::Index width = k == 0 ? d : 2 * d;
    ok = p.sage_weight[k].rows() == d && p.sage_weight[k].cols() == 2 * width;
  }
  if (!ok) throw Error(ErrorCode::DimMismatch, "encoder parameters have inconsistent shapes");
}

Forward forward(const EncoderParams& p, const Neighborhood& nbhd, const NeighborSampling* sampling) {
  const auto d = static_cast<Eigen::Index>(p.dims.hidden);
  const auto K = p.dims.layers;
  Forward f;
  f.anchor = nbhd.anchor();
  f.x = featurize(nbhd, p.features);
  f.pre0 = (f.x * p.pre_weight.transpose()).rowwise() + p.pre_bias.transpose();
  f.h0 = relu(f.pre0);
  const auto n = f.x.rows();
  for (std::size_t k = 0; k < K; ++k) {
    const Matrix& in = f.input(k);
    const auto width = in.cols();
    f.agg.push_back(aggregation_operator(nbhd.graph(), sampling));
    f.agg_in.push_back(f.agg.back() * in);
    const Matrix& w = p.sage_weight[k];
    f.pre.push_back(in * w.leftCols(width).transpose() +
                    f.agg_in.back() * w.rightCols(width).transpose());
    f.out.push_back(relu(f.pre.back()));
    Matrix combined(n, 2 * d);
    combined.leftCols(d).setZero();
    for (std::size_t i = 0; i < k; ++i) {
      combined.leftCols(d) +=
          p.skip_weight(static_cast<Eigen::Index>(EncoderParams::skip_index(i, k))) * f.out[i];
    }
    combined.rightCols(d) = f.out.back();
    f.combined.push_back(std::move(combined));
  }
  f.readout = f.combined.back().row(f.anchor).transpose();
  f.post_pre = p.post_weight * f.readout + p.post_bias;
  f.z = f.post_pre.cwiseMax(0.0);
  return f;
}

void backward(const EncoderParams& p, const Forward& f, const Vector& dz, EncoderParams& g) {
  const auto d = static_cast<Eigen::Index>(p.dims.hidden);
  const auto K = p.dims.layers;
  const auto n = f.x.rows();

  const Vector dpost = dz.cwiseProduct((f.post_pre.array() > 0.0).cast<double>().matrix());
  g.post_weight.noalias() += dpost * f.readout.transpose();
  g.post_bias += dpost;

  Matrix dcombined = Matrix::Zero(n, 2 * d);
  dcombined.row(f.anchor) = (p.post_weight.transpose() * dpost).transpose();
  std::vector<Matrix> dout(K, Matrix::Zero(n, d));
  Matrix dh0;
  for (std::size_t kk = K; kk-- > 0;) {
    dout[kk] += dcombined.rightCols(d);
    for (std::size_t i = 0; i < kk; ++i) {
      const auto idx = static_cast<Eigen::Index>(EncoderParams::skip_index(i, kk));
      dout[i] += p.skip_weight(idx) * dcombined.leftCols(d);
      g.skip_weight(idx) += dcombined.leftCols(d).cwiseProduct(f.out[i]).sum();
    }
    const Matrix dpre = dout[kk].cwiseProduct(relu_mask(f.pre[kk]));
    const Matrix& in = f.input(kk);
    const auto width = in.cols();
    const Matrix& w = p.sage_weight[kk];
    g.sage_weight[kk].leftCols(width).noalias() += dpre.transpose() * in;
    g.sage_weight[kk].rightCols(width).noalias() += dpre.transpose() * f.agg_in[kk];
    Matrix din = dpre * w.leftCols(width);
    din.noalias() += f.agg[kk].transpose() * (dpre * w.rightCols(width));
    if (kk > 0) {
      dcombined = std::move(din);
    } else {
      dh0 = std::move(din);
    }
  }
  const Matrix dpre0 = dh0.cwiseProduct(relu_mask(f.pre0));
  g.pre_weight.noalias() += dpre0.transpose() * f.x;
  g.pre_bias += dpre0.colwise().sum().transpose();
}

}  // namespace

Matrix featurize(const Neighborhood& nbhd, const FeatureSpec& spec) {
  const Graph& g = nbhd.graph();
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Matrix x = Matrix::Zero(n, static_cast<Eigen::Index>(spec.input_dim()));
  std::size_t max_degree = 0;
  for (NodeId v = 0; v < g.node_count(); ++v) max_degree = std::max(max_degree, g.degree(v));
  const auto voltage_base = static_cast<Eigen::Index>(kNodeTypeCount);
  const auto anchor_col = voltage_base + static_cast<Eigen::Index>(spec.voltage_slots());
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const auto& f = g.features(v);
    x(v, static_cast<Eigen::Index>(f.type)) = 1.0;
    std::size_t slot = spec.voltage_buckets.size();
    if (f.voltage_kv) {
      const auto it = std::find(spec.voltage_buckets.begin(), spec.voltage_buckets.end(),
                                *f.voltage_kv);
      if (it != spec.voltage_buckets.end()) {
        slot = static_cast<std::size_t>(it - spec.voltage_buckets.begin());
      }
    }
    x(v, voltage_base + static_cast<Eigen::Index>(slot)) = 1.0;
    x(v, anchor_col) = v == nbhd.anchor() ? 1.0 : 0.0;
    x(v, anchor_col + 1) =
        max_degree == 0 ? 0.0
                        : static_cast<double>(g.degree(v)) / static_cast<double>(max_degree);
  }
  return x;
}

Embedding encode(const EncoderParams& params, const Neighborhood& nbhd) {
  check_dims(params);
  return Embedding{forward(params, nbhd, nullptr).z};
}

Embedding encode(const EncoderParams& params, const Neighborhood& nbhd,
                 const NeighborSampling& sampling) {
  check_dims(params);
  if (sampling.sample_cap == 0 || sampling.rng == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "neighbor sampling needs a cap >= 1 and an rng");
  }
  return Embedding{forward(params, nbhd, &sampling).z};
}

std::vector<Embedding> encode_all(const EncoderParams& params,
                                  std::span<const Neighborhood> neighborhoods) {
  check_dims(params);
  std::vector<Embedding> out(neighborhoods.size());
  parallel_for(neighborhoods.size(), [&](std::size_t i) {
    out[i] = Embedding{forward(params, neighborhoods[i], nullptr).z};
  });
  return out;
}

double energy(const Embedding& z_u, const Embedding& z_v) {
  if (z_u.dim() != z_v.dim()) {
    throw Error(ErrorCode::DimMismatch, "energy: dimensions " + std::to_string(z_u.dim()) +
                                            " and " + std::to_string(z_v.dim()) + " differ");
  }
  return (z_u.values - z_v.values).cwiseMax(0.0).squaredNorm();
}

bool predict_subgraph(const Embedding& z_u, const Embedding& z_v, double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be positive");
  return energy(z_u, z_v) < t;
}

double pair_loss(std::span<const ScoredPair> batch, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
  double total = 0.0;
  for (const auto& p : batch) {
    const double e = energy(p.z_u, p.z_v);
    total += p.label ? e : std::max(0.0, alpha - e);
  }
  return total;
}

namespace {

constexpr std::size_t kChunk = 8;

BatchGradient gradient_impl(const EncoderParams& params, std::span<const PairRef> batch,
                            double alpha, Reduction reduction, std::size_t sample_cap,
                            std::optional<std::uint64_t> sampling_seed,
                            std::span<const std::uint64_t> pair_keys) {
  check_dims(params);
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
  const double scale =
      reduction == Reduction::Mean && !batch.empty() ? 1.0 / static_cast<double>(batch.size()) : 1.0;

  // Fixed-size chunks reduced in index order keep the sum independent of the
  // worker count.
  const std::size_t chunks = (batch.size() + kChunk - 1) / kChunk;
  std::vector<EncoderParams> partial(chunks);
  std::vector<double> partial_loss(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t c) {
    EncoderParams g = EncoderParams::zeros_like(params);
    double loss = 0.0;
    const std::size_t end = std::min(batch.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      const auto& pair = batch[i];
      std::optional<Rng> rng;
      NeighborSampling sampling{sample_cap, nullptr};
      if (sampling_seed) {
        rng = make_stream(*sampling_seed, {pair_keys[i]});
        sampling.rng = &*rng;
      }
      const NeighborSampling* s = sampling_seed ? &sampling : nullptr;
      const Forward fu = forward(params, *pair.query, s);
      const Forward fv = forward(params, *pair.target, s);
      const Vector r = (fu.z - fv.z).cwiseMax(0.0);
      const double e = r.squaredNorm();
      double sign = 0.0;
      if (pair.label) {
        loss += e;
        sign = 1.0;
      } else if (e < alpha) {
        loss += alpha - e;
        sign = -1.0;
      }
      if (sign == 0.0) continue;
      const Vector dz = (2.0 * sign * scale) * r;
      backward(params, fu, dz, g);
      backward(params, fv, -dz, g);
    }
    partial[c] = std::move(g);
    partial_loss[c] = loss;
  });

  BatchGradient out{0.0, EncoderParams::zeros_like(params)};
  for (std::size_t c = 0; c < chunks; ++c) {
    add_into(out.grad, partial[c]);
    out.loss += partial_loss[c];
  }
  out.loss *= scale;
  return out;
}

}  // namespace

BatchGradient loss_and_gradient(const EncoderParams& params, std::span<const PairRef> batch,
                                double alpha, Reduction reduction) {
  return gradient_impl(params, batch, alpha, reduction, 0, std::nullopt, {});
}

BatchGradient loss_and_gradient(const EncoderParams& params, std::span<const PairRef> batch,
                                double alpha, Reduction reduction, std::size_t sample_cap,
                                std::uint64_t sampling_seed,
                                std::span<const std::uint64_t> pair_keys) {
  if (pair_keys.size() != batch.size()) {
    throw Error(ErrorCode::InvalidArgument, "one sampling key per pair is required");
  }
  if (sample_cap == 0) throw Error(ErrorCode::InvalidArgument, "sample cap must be >= 1");
  return gradient_impl(params, batch, alpha, reduction, sample_cap, sampling_seed, pair_keys);
}

double batch_loss(const EncoderParams& params, std::span<const PairRef> batch, double alpha,
                  Reduction reduction) {
  std::vector<ScoredPair> scored(batch.size());
  parallel_for(batch.size(), [&](std::size_t i) {
    scored[i] = ScoredPair{encode(params, *batch[i].query), encode(params, *batch[i].target),
                           batch[i].label};
  });
  const double total = pair_loss(scored, alpha);
  return reduction == Reduction::Mean && !batch.empty()
             ? total / static_cast<double>(batch.size())
             : total;
}

// ---------------------------------------------------------------------------
// Threshold calibration

double calibrate_threshold(std::span<const double> energies, std::span<const bool> labels) {
  if (energies.size() != labels.size()) {
    throw Error(ErrorCode::InvalidArgument, "energies and labels differ in length");
  }
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  if (positives == 0 || positives == labels.size()) {
    throw Error(ErrorCode::DegenerateSplit, "calibration needs both positive and negative pairs");
  }
  std::vector<std::size_t> order(energies.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return energies[a] < energies[b] || (energies[a] == energies[b] && a < b);
  });

  const double P = static_cast<double>(positives);
  auto f1 = [&](std::size_t tp, std::size_t predicted) {
    if (tp == 0) return 0.0;
    return 2.0 * static_cast<double>(tp) / (static_cast<double>(predicted) + P);
  };

  const double lowest = energies[order.front()];
  double best_t = lowest > 0.0 ? lowest / 2.0 : std::numeric_limits<double>::quiet_NaN();
  double best_f1 = -1.0;
  if (lowest > 0.0) best_f1 = 0.0;  // t below every energy predicts nothing

  std::size_t tp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double e = energies[order[i]];
    while (i < order.size() && energies[order[i]] == e) {
      if (labels[order[i]]) ++tp;
      ++i;
    }
    // Threshold just above e: everything seen so far is predicted positive.
    const double t = i < order.size() ? (e + energies[order[i]]) / 2.0 : e + 1.0;
    const double score = f1(tp, i);
    if (score > best_f1) {
      best_f1 = score;
      best_t = t;
    }
  }
  return best_t;
}

double calibrate_threshold(const EncoderParams& params, std::span<const PairRef> pairs) {
  std::vector<double> energies(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    energies[i] = energy(encode(params, *pairs[i].query), encode(params, *pairs[i].target));
  });
  std::unique_ptr<bool[]> labels(new bool[pairs.size()]);
  for (std::size_t i = 0; i < pairs.size(); ++i) labels[i] = pairs[i].label;
  return calibrate_threshold(energies, std::span<const bool>(labels.get(), pairs.size()));
}

double pair_accuracy(std::span<const double> energies, std::span<const bool> labels, double t) {
  if (energies.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < energies.size(); ++i) correct += (energies[i] < t) == labels[i];
  return static_cast<double>(correct) / static_cast<double>(energies.size());
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct Evaluation {
  double threshold;
  double accuracy;
};

Evaluation evaluate(const EncoderParams& params, std::span<const PairRef> pairs) {
  std::vector<double> energies(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    energies[i] = energy(encode(params, *pairs[i].query), encode(params, *pairs[i].target));
  });
  std::unique_ptr<bool[]> labels(new bool[pairs.size()]);
  for (std::size_t i = 0; i < pairs.size(); ++i) labels[i] = pairs[i].label;
  std::span<const bool> lab(labels.get(), pairs.size());
  const double t = calibrate_threshold(energies, lab);
  return {t, pair_accuracy(energies, lab, t)};
}

}  // namespace

TrainResult train(const Dataset& dataset, const EncoderParams& initial, const TrainConfig& config,
                  const EpochObserver& on_epoch) {
  if (dataset.pairs.empty()) throw Error(ErrorCode::InvalidArgument, "train: empty dataset");
  if (!(config.alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
  if (config.batch_size == 0) throw Error(ErrorCode::InvalidArgument, "batch size must be >= 1");
  if (config.neighbor_samples == 0) {
    throw Error(ErrorCode::InvalidArgument, "neighbor sample cap must be >= 1");
  }
  check_dims(initial);

  auto refs_of = [&](const std::vector<std::size_t>& idx) {
    std::vector<PairRef> refs;
    refs.reserve(idx.size());
    for (auto i : idx) {
      const auto& p = dataset.pairs[i];
      refs.push_back(PairRef{&p.query, &p.target, p.label});
    }
    return refs;
  };
  std::vector<std::size_t> train_idx = dataset.train;
  if (train_idx.empty()) {
    train_idx.resize(dataset.pairs.size());
    std::iota(train_idx.begin(), train_idx.end(), 0);
  }
  const auto validation = refs_of(dataset.validation.empty() ? train_idx : dataset.validation);

  EncoderParams params = initial;
  EncoderParams m = EncoderParams::zeros_like(params);
  EncoderParams v = EncoderParams::zeros_like(params);
  std::uint64_t step = 0;

  TrainResult result;
  result.params = params;
  result.best_accuracy = -1.0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng shuffle_rng = make_stream(config.seed, {0x65706f63ULL, epoch});
    std::vector<std::size_t> order = train_idx;
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<std::size_t> batch_idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(end));
      const auto batch = refs_of(batch_idx);
      std::vector<std::uint64_t> keys(batch_idx.begin(), batch_idx.end());
      const auto sampling_seed = config.seed ^ (0x9e3779b97f4a7c15ULL * epoch);
      BatchGradient bg =
          config.sample_neighbors
              ? loss_and_gradient(params, batch, config.alpha, config.reduction,
                                  config.neighbor_samples, sampling_seed, keys)
              : loss_and_gradient(params, batch, config.alpha, config.reduction);
      if (!std::isfinite(bg.loss)) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch << ", batch starting at " << start
            << " (loss = " << bg.loss << ")";
        throw Error(ErrorCode::NonFiniteLoss, msg.str());
      }
      epoch_loss += config.reduction == Reduction::Mean
                        ? bg.loss * static_cast<double>(batch.size())
                        : bg.loss;

      ++step;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      auto pb = params.blocks();
      auto mb = m.blocks();
      auto vb = v.blocks();
      const auto gb = bg.grad.blocks();
      for (std::size_t b = 0; b < pb.size(); ++b) {
        for (std::size_t j = 0; j < pb[b].size(); ++j) {
          const double g = gb[b][j];
          mb[b][j] = config.beta1 * mb[b][j] + (1.0 - config.beta1) * g;
          vb[b][j] = config.beta2 * vb[b][j] + (1.0 - config.beta2) * g * g;
          pb[b][j] -= config.learning_rate * (mb[b][j] / c1) /
                      (std::sqrt(vb[b][j] / c2) + config.epsilon);
        }
      }
    }

    if (!params.all_finite()) {
      throw Error(ErrorCode::NonFiniteLoss,
                  "parameters became non-finite at epoch " + std::to_string(epoch));
    }
    const auto eval = evaluate(params, validation);
    result.log.push_back(EpochRecord{epoch, epoch_loss / static_cast<double>(order.size()),
                                     eval.accuracy, eval.threshold});
    if (on_epoch) on_epoch(result.log.back(), params);
    if (eval.accuracy > result.best_accuracy) {
      result.best_accuracy = eval.accuracy;
      result.best_epoch = epoch;
      result.params = params;
    }
  }

  result.params.round_to_float();
  const auto final_eval = evaluate(result.params, validation);
  result.threshold = final_eval.threshold;
  result.best_accuracy = final_eval.accuracy;
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kMagic[8] = {'G', 'M', 'E', 'N', 'C', '0', '0', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out += static_cast<char>(u & 0xFF);
    u = static_cast<U>(u >> 8);
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      u |= static_cast<U>(static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i));
    }
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::CorruptPayload, "checkpoint truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string checkpoint_bytes(const EncoderParams& params) {
  check_dims(params);
  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.features.input_dim()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.dims.hidden));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.dims.embed));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.dims.layers));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.features.voltage_buckets.size()));
  for (double b : params.features.voltage_buckets) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(b));
  put_le<std::uint64_t>(out, params.parameter_count());
  for (auto block : params.blocks()) {
    for (double v : block) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

EncoderParams params_from_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) {
    throw Error(ErrorCode::CorruptPayload, "not an encoder checkpoint (bad magic)");
  }
  const auto version = in.get<std::uint32_t>();
  if (version != kVersion) {
    throw Error(ErrorCode::VersionMismatch, "checkpoint version " + std::to_string(version) +
                                                " unsupported (expected " +
                                                std::to_string(kVersion) + ")");
  }
  const auto input_dim = in.get<std::uint32_t>();
  EncoderDims dims;
  dims.hidden = in.get<std::uint32_t>();
  dims.embed = in.get<std::uint32_t>();
  dims.layers = in.get<std::uint32_t>();
  const auto buckets = in.get<std::uint32_t>();
  FeatureSpec spec;
  for (std::uint32_t i = 0; i < buckets; ++i) {
    spec.voltage_buckets.push_back(std::bit_cast<double>(in.get<std::uint64_t>()));
  }
  if (input_dim != spec.input_dim()) {
    throw Error(ErrorCode::VersionMismatch, "checkpoint input dim does not match its feature spec");
  }
  EncoderParams p = shaped(std::move(spec), dims);
  const auto count = in.get<std::uint64_t>();
  if (count != p.parameter_count()) {
    throw Error(ErrorCode::VersionMismatch, "checkpoint parameter count does not match its dims");
  }
  for (auto block : p.blocks()) {
    for (double& v : block) v = static_cast<double>(std::bit_cast<float>(in.get<std::uint32_t>()));
  }
  if (!in.done()) throw Error(ErrorCode::CorruptPayload, "trailing bytes after checkpoint payload");
  if (!p.all_finite()) throw Error(ErrorCode::CorruptPayload, "checkpoint holds non-finite values");
  return p;
}

void save_checkpoint(const EncoderParams& params, const std::filesystem::path& path) {
  write_text_file(path, checkpoint_bytes(params));
}

EncoderParams load_checkpoint(const std::filesystem::path& path) {
  return params_from_checkpoint(read_text_file(path));
}

std::string fingerprint(const EncoderParams& params) {
  return detail::hex64(detail::fnv1a64(checkpoint_bytes(params)));
}

}  // namespace gridmotif
