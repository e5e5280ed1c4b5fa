#include "gridmotif/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>

#include "gridmotif/error.hpp"
#include "gridmotif/parallel.hpp"
#include "gridmotif/rng.hpp"

namespace gridmotif {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt_optional(const std::optional<double>& v) { return v ? fmt_double(*v) : ""; }

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0 + 1.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

}  // namespace

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "spearman: length mismatch");
  if (x.size() < 2) return std::nullopt;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "kendall: length mismatch");
  if (x.size() < 2) return std::nullopt;
  double concordant = 0, discordant = 0, ties_x = 0, ties_y = 0, pairs = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      pairs += 1;
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0) ties_x += 1;
      if (dy == 0) ties_y += 1;
      if (dx == 0 || dy == 0) continue;
      (dx * dy > 0 ? concordant : discordant) += 1;
    }
  }
  const double denom = std::sqrt((pairs - ties_x) * (pairs - ties_y));
  if (denom == 0.0) return std::nullopt;
  return (concordant - discordant) / denom;
}

// ---------------------------------------------------------------------------
// Norm tables

NormTables report_norm_tables(const RefStore& store) {
  if (store.vectors.empty()) throw Error(ErrorCode::EmptyReference, "norm tables need a non-empty store");
  NormTables t;
  std::map<std::size_t, std::pair<std::size_t, double>> nodes, edges;
  std::map<std::pair<std::size_t, std::size_t>, std::pair<std::size_t, double>> cells;
  std::vector<double> xs, ys, norms;
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& m = store.meta[i];
    NormRow row{i, m.graph_name, m.anchor_original_id, m.node_count, m.edge_count,
                store.vectors[i].values.norm()};
    auto add = [&](auto& bucket) {
      bucket.first += 1;
      bucket.second += row.norm;
    };
    add(nodes[row.node_count]);
    add(edges[row.edge_count]);
    add(cells[{row.node_count, row.edge_count}]);
    xs.push_back(static_cast<double>(row.node_count));
    ys.push_back(static_cast<double>(row.edge_count));
    norms.push_back(row.norm);
    t.rows.push_back(std::move(row));
  }
  auto flatten = [](const auto& m) {
    std::vector<BinnedMean> out;
    for (const auto& [k, v] : m) out.push_back({k, v.first, v.second / static_cast<double>(v.first)});
    return out;
  };
  t.by_nodes = flatten(nodes);
  t.by_edges = flatten(edges);
  for (const auto& b : t.by_nodes) t.node_counts.push_back(b.key);
  for (const auto& b : t.by_edges) t.edge_counts.push_back(b.key);
  t.grid.assign(t.node_counts.size(), std::vector<std::optional<double>>(t.edge_counts.size()));
  for (std::size_t i = 0; i < t.node_counts.size(); ++i) {
    for (std::size_t j = 0; j < t.edge_counts.size(); ++j) {
      const auto it = cells.find({t.node_counts[i], t.edge_counts[j]});
      if (it != cells.end()) {
        t.grid[i][j] = it->second.second / static_cast<double>(it->second.first);
      }
    }
  }
  t.spearman_nodes = spearman(xs, norms);
  t.spearman_edges = spearman(ys, norms);
  return t;
}

std::string references_csv(const NormTables& tables) {
  std::string out = "index,graph,anchor,node_count,edge_count,norm\n";
  for (const auto& r : tables.rows) {
    out += std::to_string(r.index) + ',' + csv_field(r.graph_name) + ',' + std::to_string(r.anchor) +
           ',' + std::to_string(r.node_count) + ',' + std::to_string(r.edge_count) + ',' +
           fmt_double(r.norm) + '\n';
  }
  return out;
}

std::string binned_csv(std::span<const BinnedMean> bins, std::string_view key_name) {
  std::string out = std::string(key_name) + ",members,mean_norm\n";
  for (const auto& b : bins) {
    out += std::to_string(b.key) + ',' + std::to_string(b.members) + ',' + fmt_double(b.mean_norm) + '\n';
  }
  return out;
}

std::string grid_csv(const NormTables& tables) {
  std::string out = "node_count";
  for (auto e : tables.edge_counts) out += ",edges_" + std::to_string(e);
  out += '\n';
  for (std::size_t i = 0; i < tables.node_counts.size(); ++i) {
    out += std::to_string(tables.node_counts[i]);
    for (const auto& cell : tables.grid[i]) out += ',' + fmt_optional(cell);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// PCA

namespace {

void orient(Vector& v) {
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  if (v(idx) < 0) v = -v;
}

}  // namespace

std::vector<std::pair<double, Vector>> top_eigenpairs(const Matrix& symmetric, std::size_t count,
                                                      double tolerance,
                                                      std::size_t max_iterations) {
  const auto n = symmetric.rows();
  if (n != symmetric.cols()) throw Error(ErrorCode::DimMismatch, "eigenpairs need a square matrix");
  Matrix a = symmetric;
  std::vector<std::pair<double, Vector>> out;
  for (std::size_t c = 0; c < count && c < static_cast<std::size_t>(n); ++c) {
    // Deterministic start not orthogonal to any particular eigenvector.
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 0.1 * static_cast<double>(i % 7);
    for (const auto& prev : out) v -= prev.second.dot(v) * prev.second;
    v.normalize();
    double lambda = 0.0;
    for (std::size_t it = 0; it < max_iterations; ++it) {
      Vector w = a * v;
      const double norm = w.norm();
      if (norm <= 1e-300) break;
      w /= norm;
      orient(w);
      const double delta = (w - v).norm();
      v = std::move(w);
      lambda = norm;
      if (delta < tolerance) break;
    }
    if (lambda <= 1e-300) {
      // Remaining spectrum is zero; any unit vector orthogonal to the found
      // ones is an eigenvector.
      for (Eigen::Index i = 0; i < n; ++i) {
        Vector e = Vector::Unit(n, i);
        for (const auto& prev : out) e -= prev.second.dot(e) * prev.second;
        if (e.norm() > 1e-6) {
          v = e.normalized();
          break;
        }
      }
      lambda = 0.0;
    }
    orient(v);
    lambda = v.dot(a * v);
    a -= lambda * v * v.transpose();
    out.emplace_back(lambda, v);
  }
  return out;
}

PcaResult report_pca(const RefStore& store, std::size_t sample_size, std::uint64_t seed) {
  if (store.size() < 2) throw Error(ErrorCode::InvalidArgument, "pca needs at least two references");
  std::vector<std::size_t> picked(store.size());
  std::iota(picked.begin(), picked.end(), 0);
  if (sample_size < 2) throw Error(ErrorCode::InvalidArgument, "pca sample size must be >= 2");
  if (sample_size < store.size()) {
    Rng rng = make_stream(seed, {0x70636173ULL});
    for (std::size_t i = 0; i < sample_size; ++i) {
      std::swap(picked[i], picked[i + uniform_index(rng, picked.size() - i)]);
    }
    picked.resize(sample_size);
    std::sort(picked.begin(), picked.end());
  }
  const auto D = static_cast<Eigen::Index>(store.dim());
  Matrix x(static_cast<Eigen::Index>(picked.size()), D);
  for (std::size_t r = 0; r < picked.size(); ++r) {
    x.row(static_cast<Eigen::Index>(r)) = store.vectors[picked[r]].values.transpose();
  }
  const Vector mean = x.colwise().mean().transpose();
  x.rowwise() -= mean.transpose();
  const Matrix cov = (x.transpose() * x) / static_cast<double>(x.rows() - 1);
  PcaResult result;
  result.total_variance = cov.trace();
  if (!(result.total_variance > 1e-12)) {
    throw Error(ErrorCode::DegenerateVariance, "sampled reference vectors are all identical");
  }
  auto pairs = top_eigenpairs(cov, 2);
  if (pairs.size() < 2) {
    pairs.emplace_back(0.0, Vector::Zero(D));
  }
  result.variance1 = pairs[0].first;
  result.variance2 = pairs[1].first;
  result.component1 = pairs[0].second;
  result.component2 = pairs[1].second;
  for (std::size_t r = 0; r < picked.size(); ++r) {
    const auto& m = store.meta[picked[r]];
    const auto row = x.row(static_cast<Eigen::Index>(r));
    result.rows.push_back(PcaRow{row.dot(result.component1.transpose()),
                                 row.dot(result.component2.transpose()), picked[r], m.node_count,
                                 m.edge_count, m.graph_name});
  }
  return result;
}

std::string pca_csv(const PcaResult& pca) {
  std::string out = "x,y,node_count,edge_count,source,index\n";
  for (const auto& r : pca.rows) {
    out += fmt_double(r.x) + ',' + fmt_double(r.y) + ',' + std::to_string(r.node_count) + ',' +
           std::to_string(r.edge_count) + ',' + csv_field(r.source) + ',' + std::to_string(r.index) +
           '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

CountResult corpus_count(const GraphCorpus& corpus, const Graph& query, MatchSemantics sem,
                         const OracleBudget& budget) {
  CountResult total;
  for (const auto& g : corpus.graphs) {
    const auto c = vf2_count(g, query, sem, budget);
    total.count += c.count;
    total.complete = total.complete && c.complete;
  }
  return total;
}

}  // namespace

ValidationReport report_validation(const MiningResult& mined, const GraphCorpus& corpus,
                                   const ValidationOptions& options) {
  ValidationReport report;
  struct Job {
    std::size_t size;
    const MotifResult* motif;
  };
  std::vector<Job> jobs;
  for (const auto& [k, list] : mined.motifs) {
    const auto n = options.top_k == 0 ? list.size() : std::min(options.top_k, list.size());
    for (std::size_t i = 0; i < n; ++i) jobs.push_back({k, &list[i]});
  }
  report.rows.resize(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t j) {
    const auto& m = *jobs[j].motif;
    ValidationRow row;
    row.size = jobs[j].size;
    row.rank = m.rank;
    row.node_count = m.motif.node_count();
    row.edge_count = m.motif.edge_count();
    row.canonical_key = m.canonical_key;
    row.estimated_frequency = m.estimated_frequency;
    row.support_radius = anchor_eccentricity(m.representative);
    MatchSemantics sem;
    sem.respect_features = options.respect_features;
    sem.anchored = true;
    row.exact_support =
        exact_support(corpus.graphs, m.representative, row.support_radius, sem, options.budget);
    sem.anchored = false;
    sem.mode = MatchMode::Induced;
    row.vf2_induced = corpus_count(corpus, m.motif, sem, options.budget);
    sem.mode = MatchMode::Monomorphism;
    row.vf2_monomorphism = corpus_count(corpus, m.motif, sem, options.budget);
    report.rows[j] = std::move(row);
  });

  std::vector<double> taus;
  std::size_t matches = 0;
  for (std::size_t i = 0; i < report.rows.size();) {
    std::size_t j = i;
    while (j < report.rows.size() && report.rows[j].size == report.rows[i].size) ++j;
    SizeAgreement a;
    a.size = report.rows[i].size;
    a.candidates = j - i;
    std::vector<double> est, exact;
    std::uint64_t best = 0;
    for (std::size_t r = i; r < j; ++r) {
      est.push_back(static_cast<double>(report.rows[r].estimated_frequency));
      exact.push_back(static_cast<double>(report.rows[r].exact_support.count));
      best = std::max(best, report.rows[r].exact_support.count);
      a.complete = a.complete && report.rows[r].exact_support.complete;
    }
    a.top1_match = report.rows[i].exact_support.count == best;
    a.kendall_tau = kendall_tau_b(est, exact);
    matches += a.top1_match;
    if (a.kendall_tau) taus.push_back(*a.kendall_tau);
    report.sizes.push_back(a);
    i = j;
  }
  if (!report.sizes.empty()) {
    report.top1_rate = static_cast<double>(matches) / static_cast<double>(report.sizes.size());
  }
  if (!taus.empty()) {
    std::sort(taus.begin(), taus.end());
    const auto h = taus.size() / 2;
    report.median_tau = taus.size() % 2 ? taus[h] : (taus[h - 1] + taus[h]) / 2.0;
  }
  return report;
}

std::string validation_csv(const ValidationReport& report) {
  std::map<std::size_t, const SizeAgreement*> agreement;
  for (const auto& a : report.sizes) agreement[a.size] = &a;
  std::string out =
      "size,rank,node_count,edge_count,canonical_key,estimated_frequency,support_radius,"
      "exact_support,exact_support_complete,vf2_induced,vf2_induced_complete,vf2_monomorphism,"
      "vf2_monomorphism_complete,top1_match,kendall_tau\n";
  auto flag = [](bool b) { return b ? "true" : "false"; };
  for (const auto& r : report.rows) {
    const auto* a = agreement.at(r.size);
    out += std::to_string(r.size) + ',' + std::to_string(r.rank) + ',' +
           std::to_string(r.node_count) + ',' + std::to_string(r.edge_count) + ',' +
           csv_field(r.canonical_key) + ',' + std::to_string(r.estimated_frequency) + ',' +
           std::to_string(r.support_radius) + ',' + std::to_string(r.exact_support.count) + ',' +
           flag(r.exact_support.complete) + ',' + std::to_string(r.vf2_induced.count) + ',' +
           flag(r.vf2_induced.complete) + ',' + std::to_string(r.vf2_monomorphism.count) + ',' +
           flag(r.vf2_monomorphism.complete) + ',' + flag(a->top1_match) + ',' +
           (a->kendall_tau ? fmt_double(*a->kendall_tau) : "null") + '\n';
  }
  return out;
}

}  // namespace gridmotif
