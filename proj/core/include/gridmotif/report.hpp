#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridmotif/embed_store.hpp"
#include "gridmotif/ingest.hpp"
#include "gridmotif/motif_search.hpp"
#include "gridmotif/oracle.hpp"

namespace gridmotif {

/// Spearman rank correlation with average ranks for ties; empty when either
/// side is constant or fewer than two points are given.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

/// Kendall tau-b; empty when fewer than two points or either side is constant.
std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y);

struct NormRow {
  std::size_t index = 0;
  std::string graph_name;
  NodeId anchor = 0;
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  double norm = 0.0;
};

struct BinnedMean {
  std::size_t key = 0;
  std::size_t members = 0;
  double mean_norm = 0.0;
};

struct NormTables {
  std::vector<NormRow> rows;
  std::vector<BinnedMean> by_nodes;
  std::vector<BinnedMean> by_edges;
  /// grid[i][j] is the mean norm for node_counts[i] x edge_counts[j].
  std::vector<std::size_t> node_counts;
  std::vector<std::size_t> edge_counts;
  std::vector<std::vector<std::optional<double>>> grid;
  std::optional<double> spearman_nodes;
  std::optional<double> spearman_edges;
};

NormTables report_norm_tables(const RefStore& store);

std::string references_csv(const NormTables& tables);
std::string binned_csv(std::span<const BinnedMean> bins, std::string_view key_name);
/// Empty cells stay empty, never zero.
std::string grid_csv(const NormTables& tables);

struct PcaRow {
  double x = 0.0;
  double y = 0.0;
  std::size_t index = 0;
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::string source;
};

struct PcaResult {
  std::vector<PcaRow> rows;
  Vector component1;
  Vector component2;
  double variance1 = 0.0;
  double variance2 = 0.0;
  double total_variance = 0.0;
};

/// Leading eigenpairs of a symmetric positive semi-definite matrix by power
/// iteration with deflation. Eigenvectors are unit length with their largest
/// entry positive.
std::vector<std::pair<double, Vector>> top_eigenpairs(const Matrix& symmetric, std::size_t count,
                                                      double tolerance = 1e-9,
                                                      std::size_t max_iterations = 100000);

/// Projects up to sample_size references (a seeded sample when the store is
/// larger) onto the top two principal directions.
PcaResult report_pca(const RefStore& store, std::size_t sample_size, std::uint64_t seed);

std::string pca_csv(const PcaResult& pca);

struct ValidationOptions {
  std::size_t top_k = 3;
  OracleBudget budget;
  bool respect_features = true;
};

struct ValidationRow {
  std::size_t size = 0;
  std::size_t rank = 0;
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::string canonical_key;
  std::size_t estimated_frequency = 0;
  std::size_t support_radius = 0;
  CountResult exact_support;
  CountResult vf2_induced;
  CountResult vf2_monomorphism;
};

struct SizeAgreement {
  std::size_t size = 0;
  std::size_t candidates = 0;
  bool top1_match = false;
  std::optional<double> kendall_tau;
  bool complete = true;
};

struct ValidationReport {
  std::vector<ValidationRow> rows;
  std::vector<SizeAgreement> sizes;
  double top1_rate = 0.0;
  std::optional<double> median_tau;
};

/// Scores the top_k motifs of every size against the exact oracle. exact
/// support uses the representative's anchor and its eccentricity as radius.
/// Top-1 matches when the mined leader attains the maximum exact support
/// among those rows.
ValidationReport report_validation(const MiningResult& mined, const GraphCorpus& corpus,
                                   const ValidationOptions& options = {});

std::string validation_csv(const ValidationReport& report);

}  // namespace gridmotif
