#include "gridmotif/embed_store.hpp"

#include <bit>
#include <cmath>

#include "gridmotif/error.hpp"
#include "gridmotif/ingest.hpp"
#include "gridmotif/parallel.hpp"

namespace gridmotif {

RefStore build_reference_store(const EncoderParams& params,
                               std::span<const Neighborhood> neighborhoods, double threshold) {
  if (neighborhoods.empty()) {
    throw Error(ErrorCode::EmptyReference, "reference store needs at least one neighborhood");
  }
  if (!(threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be positive");
  RefStore store;
  store.threshold = threshold;
  store.fingerprint = fingerprint(params);
  store.vectors = encode_all(params, neighborhoods);
  for (auto& z : store.vectors) {
    z.values = z.values.cast<float>().cast<double>();
  }
  store.meta.reserve(neighborhoods.size());
  for (const auto& n : neighborhoods) {
    RefMeta m;
    if (n.source()) {
      m.graph_name = n.source()->graph_name;
      m.graph_index = n.source()->graph_index;
    } else {
      m.graph_name = n.graph().name();
    }
    m.anchor_original_id = n.original_id(n.anchor());
    m.node_count = n.graph().node_count();
    m.edge_count = n.graph().edge_count();
    store.meta.push_back(std::move(m));
  }
  return store;
}

std::size_t estimate_frequency(const RefStore& store, const Embedding& z_q) {
  if (store.vectors.empty()) return 0;
  if (z_q.dim() != store.dim()) {
    throw Error(ErrorCode::DimMismatch, "query dimension " + std::to_string(z_q.dim()) +
                                            " does not match store dimension " +
                                            std::to_string(store.dim()));
  }
  const double t = store.threshold;
  const auto D = static_cast<Eigen::Index>(z_q.dim());
  const double* q = z_q.values.data();
  std::size_t count = 0;
  for (const auto& r : store.vectors) {
    const double* v = r.values.data();
    double e = 0.0;
    for (Eigen::Index i = 0; i < D && e < t; ++i) {
      const double diff = q[i] - v[i];
      if (diff > 0.0) e += diff * diff;
    }
    count += e < t;
  }
  return count;
}

void check_compatible(const RefStore& store, const EncoderParams& params) {
  const auto expected = fingerprint(params);
  if (store.fingerprint != expected) {
    throw Error(ErrorCode::VersionMismatch, "reference store was built by encoder " +
                                                store.fingerprint + ", not " + expected);
  }
  if (!store.vectors.empty() && store.dim() != params.dims.embed) {
    throw Error(ErrorCode::DimMismatch, "store dimension does not match the encoder");
  }
}

namespace {

constexpr char kMagic[8] = {'G', 'M', 'S', 'T', 'O', 'R', 'E', '1'};
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

void put_string(std::string& out, std::string_view s) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
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

  std::string get_string() { return std::string(take(get<std::uint32_t>())); }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw Error(ErrorCode::CorruptPayload, "store file truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string store_bytes(const RefStore& store) {
  if (store.meta.size() != store.vectors.size()) {
    throw Error(ErrorCode::CorruptPayload, "store meta and vector counts differ");
  }
  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(store.dim()));
  put_le<std::uint64_t>(out, store.size());
  put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(store.threshold));
  put_string(out, store.fingerprint);
  for (const auto& m : store.meta) {
    put_string(out, m.graph_name);
    put_le<std::uint64_t>(out, m.graph_index);
    put_le<std::uint32_t>(out, m.anchor_original_id);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.node_count));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.edge_count));
  }
  for (const auto& z : store.vectors) {
    if (z.dim() != store.dim()) throw Error(ErrorCode::DimMismatch, "store vectors differ in dimension");
    for (Eigen::Index i = 0; i < z.values.size(); ++i) {
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(z.values(i))));
    }
  }
  return out;
}

RefStore store_from_bytes(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) {
    throw Error(ErrorCode::CorruptPayload, "not a reference store (bad magic)");
  }
  const auto version = in.get<std::uint32_t>();
  if (version != kVersion) {
    throw Error(ErrorCode::VersionMismatch, "store version " + std::to_string(version) +
                                                " unsupported (expected " +
                                                std::to_string(kVersion) + ")");
  }
  const auto dim = in.get<std::uint32_t>();
  const auto count = in.get<std::uint64_t>();
  RefStore store;
  store.threshold = std::bit_cast<double>(in.get<std::uint64_t>());
  store.fingerprint = in.get_string();
  // Each meta record is at least 24 bytes; reject absurd counts before allocating.
  if (count > in.remaining() / 24) throw Error(ErrorCode::CorruptPayload, "store count exceeds payload");
  store.meta.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    RefMeta m;
    m.graph_name = in.get_string();
    m.graph_index = in.get<std::uint64_t>();
    m.anchor_original_id = in.get<std::uint32_t>();
    m.node_count = in.get<std::uint32_t>();
    m.edge_count = in.get<std::uint32_t>();
    store.meta.push_back(std::move(m));
  }
  if (in.remaining() != count * dim * 4) {
    throw Error(ErrorCode::CorruptPayload, "store payload size does not match its header");
  }
  store.vectors.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Embedding z{Vector(static_cast<Eigen::Index>(dim))};
    for (std::uint32_t j = 0; j < dim; ++j) {
      z.values(j) = static_cast<double>(std::bit_cast<float>(in.get<std::uint32_t>()));
      if (!std::isfinite(z.values(j)) || z.values(j) < 0.0) {
        throw Error(ErrorCode::CorruptPayload, "store holds a negative or non-finite entry");
      }
    }
    store.vectors.push_back(std::move(z));
  }
  if (!(store.threshold > 0.0) || !std::isfinite(store.threshold)) {
    throw Error(ErrorCode::CorruptPayload, "store threshold must be positive");
  }
  return store;
}

void save_store(const RefStore& store, const std::filesystem::path& path) {
  write_text_file(path, store_bytes(store));
}

RefStore load_store(const std::filesystem::path& path) { return store_from_bytes(read_text_file(path)); }

}  // namespace gridmotif
