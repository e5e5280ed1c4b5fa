#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridmotif/encoder.hpp"
#include "gridmotif/graph.hpp"

namespace gridmotif {

struct RefMeta {
  std::string graph_name;
  std::size_t graph_index = 0;
  NodeId anchor_original_id = 0;
  std::size_t node_count = 0;
  std::size_t edge_count = 0;

  friend bool operator==(const RefMeta&, const RefMeta&) = default;
};

/// Reference embeddings of decomposed neighborhoods. Vectors are stored at
/// float precision so a saved store reloads bit-identically.
struct RefStore {
  std::vector<Embedding> vectors;
  std::vector<RefMeta> meta;
  double threshold = 0.1;
  std::string fingerprint;

  std::size_t size() const { return vectors.size(); }
  std::size_t dim() const { return vectors.empty() ? 0 : vectors.front().dim(); }

  friend bool operator==(const RefStore&, const RefStore&) = default;
};

RefStore build_reference_store(const EncoderParams& params,
                               std::span<const Neighborhood> neighborhoods, double threshold);

/// Number of references r with energy(z_q, r) < threshold.
std::size_t estimate_frequency(const RefStore& store, const Embedding& z_q);

/// Throws VersionMismatch when the store was built by a different encoder.
void check_compatible(const RefStore& store, const EncoderParams& params);

/// "GMSTORE1" magic, little-endian u32 version, u32 dim, u64 count, f64
/// threshold, length-prefixed fingerprint, meta table, f32 payload.
std::string store_bytes(const RefStore& store);
RefStore store_from_bytes(std::string_view bytes);
void save_store(const RefStore& store, const std::filesystem::path& path);
RefStore load_store(const std::filesystem::path& path);

}  // namespace gridmotif
