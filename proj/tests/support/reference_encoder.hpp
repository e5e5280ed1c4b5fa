#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gridmotif/encoder.hpp"

namespace gridmotif::testing {

/// Plain-loop forward pass written from the layer equations, used as an
/// independent oracle for the library encoder. pattern records the sign of
/// every pre-activation so callers can tell whether a perturbation crossed a
/// ReLU kink.
struct ReferenceForward {
  std::vector<double> z;
  std::vector<char> pattern;
};

using Table = std::vector<std::vector<double>>;

inline Table reference_features(const Neighborhood& nb, const FeatureSpec& spec) {
  const Graph& g = nb.graph();
  const std::size_t n = g.node_count();
  const std::size_t B = spec.voltage_buckets.size();
  std::size_t max_deg = 0;
  for (NodeId v = 0; v < n; ++v) max_deg = std::max(max_deg, g.degree(v));
  Table x(n, std::vector<double>(4 + B + 1 + 2, 0.0));
  for (NodeId v = 0; v < n; ++v) {
    const auto& f = g.features(v);
    x[v][static_cast<std::size_t>(f.type)] = 1.0;
    std::size_t slot = B;
    for (std::size_t b = 0; b < B; ++b) {
      if (f.voltage_kv && *f.voltage_kv == spec.voltage_buckets[b]) slot = b;
    }
    x[v][4 + slot] = 1.0;
    x[v][4 + B + 1] = v == nb.anchor() ? 1.0 : 0.0;
    x[v][4 + B + 2] = max_deg ? static_cast<double>(g.degree(v)) / static_cast<double>(max_deg) : 0.0;
  }
  return x;
}

inline ReferenceForward reference_encode(const EncoderParams& p, const Neighborhood& nb) {
  ReferenceForward out;
  const Graph& g = nb.graph();
  const std::size_t n = g.node_count();
  const auto d = static_cast<std::size_t>(p.dims.hidden);
  const auto K = p.dims.layers;
  auto act = [&](double pre) {
    out.pattern.push_back(pre > 0.0);
    return pre > 0.0 ? pre : 0.0;
  };

  const Table x = reference_features(nb, p.features);
  Table h(n, std::vector<double>(d));
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t r = 0; r < d; ++r) {
      double s = p.pre_bias(static_cast<Eigen::Index>(r));
      for (std::size_t c = 0; c < x[v].size(); ++c) {
        s += p.pre_weight(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * x[v][c];
      }
      h[v][r] = act(s);
    }
  }

  std::vector<Table> outputs;  // H'_k
  Table input = h;
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t w = input.front().size();
    Table cur(n, std::vector<double>(d));
    for (std::size_t v = 0; v < n; ++v) {
      std::vector<double> agg(w, 0.0);
      for (NodeId u : g.neighbors(static_cast<NodeId>(v))) {
        for (std::size_t c = 0; c < w; ++c) agg[c] += input[u][c];
      }
      for (std::size_t r = 0; r < d; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < w; ++c) {
          s += p.sage_weight[k](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * input[v][c];
          s += p.sage_weight[k](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(w + c)) * agg[c];
        }
        cur[v][r] = act(s);
      }
    }
    outputs.push_back(cur);
    Table next(n, std::vector<double>(2 * d, 0.0));
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t i = 0; i < k; ++i) {
        const double wk = p.skip_weight(static_cast<Eigen::Index>(EncoderParams::skip_index(i, k)));
        for (std::size_t r = 0; r < d; ++r) next[v][r] += wk * outputs[i][v][r];
      }
      for (std::size_t r = 0; r < d; ++r) next[v][d + r] = cur[v][r];
    }
    input = std::move(next);
  }

  const auto& readout = input[nb.anchor()];
  const auto D = static_cast<std::size_t>(p.dims.embed);
  for (std::size_t r = 0; r < D; ++r) {
    double s = p.post_bias(static_cast<Eigen::Index>(r));
    for (std::size_t c = 0; c < readout.size(); ++c) {
      s += p.post_weight(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * readout[c];
    }
    out.z.push_back(act(s));
  }
  return out;
}

struct ReferenceLoss {
  double loss = 0.0;
  std::vector<char> pattern;  // every ReLU sign plus the hinge state of each negative
};

inline ReferenceLoss reference_loss(const EncoderParams& p, std::span<const PairRef> batch,
                                    double alpha) {
  ReferenceLoss out;
  for (const auto& pair : batch) {
    auto fu = reference_encode(p, *pair.query);
    auto fv = reference_encode(p, *pair.target);
    double e = 0.0;
    for (std::size_t i = 0; i < fu.z.size(); ++i) {
      const double diff = fu.z[i] - fv.z[i];
      out.pattern.push_back(diff > 0.0);
      if (diff > 0.0) e += diff * diff;
    }
    if (pair.label) {
      out.loss += e;
    } else {
      out.pattern.push_back(e < alpha);
      out.loss += std::max(0.0, alpha - e);
    }
    out.pattern.insert(out.pattern.end(), fu.pattern.begin(), fu.pattern.end());
    out.pattern.insert(out.pattern.end(), fv.pattern.begin(), fv.pattern.end());
  }
  return out;
}

}  // namespace gridmotif::testing
