#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "tidk/data_model.hpp"
#include "tidk/distributional_kernel.hpp"
#include "tidk/error.hpp"
#include "tidk/evaluation.hpp"
#include "tidk/io.hpp"

namespace tidk {

/// Header "id,f0,...,f{D-1}", then one row per trajectory.
inline void write_embedding_csv(std::ostream& out, const TrajectoryDataset& ds,
                                const std::vector<MeanMapVector>& embeddings) {
  const std::size_t dim = embeddings.empty() ? 0 : embeddings.front().dimension();
  out << "id";
  for (std::size_t a = 0; a < dim; ++a) out << ",f" << a;
  out << '\n';
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    out << ds[i].id;
    for (double v : embeddings[i].values) out << ',' << format_double(v);
    out << '\n';
  }
}

struct EmbeddingTable {
  std::vector<std::string> ids;
  std::vector<MeanMapVector> rows;
};

namespace detail {
inline constexpr char kEmbeddingMagic[8] = {'T', 'I', 'D', 'K', 'E', 'M', 'B', '1'};

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "binary embedding format assumes little-endian hosts");
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error("truncated binary embedding file");
  return value;
}
}  // namespace detail

/// Little-endian layout: magic "TIDKEMB1", u8 kernel (0 idk, 1 gdk), u64 n,
/// u64 dim, then per row: u32 id length, id bytes, u64 source size, dim f64 values.
inline void write_embedding_binary(std::ostream& out, const TrajectoryDataset& ds,
                                   const std::vector<MeanMapVector>& embeddings) {
  out.write(detail::kEmbeddingMagic, sizeof(detail::kEmbeddingMagic));
  const std::uint64_t dim = embeddings.empty() ? 0 : embeddings.front().dimension();
  detail::put_le<std::uint8_t>(out, embeddings.empty() || embeddings.front().kernel == KernelKind::idk ? 0 : 1);
  detail::put_le<std::uint64_t>(out, embeddings.size());
  detail::put_le<std::uint64_t>(out, dim);
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    const auto& id = ds[i].id;
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
    detail::put_le<std::uint64_t>(out, embeddings[i].source_size);
    for (double v : embeddings[i].values) detail::put_le<double>(out, v);
  }
}

inline EmbeddingTable read_embedding_binary(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, detail::kEmbeddingMagic, sizeof(magic)) != 0)
    throw Error("not a tidk binary embedding file");
  const auto kernel = detail::get_le<std::uint8_t>(in) == 0 ? KernelKind::idk : KernelKind::gdk_nystrom;
  const auto n = detail::get_le<std::uint64_t>(in);
  const auto dim = detail::get_le<std::uint64_t>(in);
  EmbeddingTable table;
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string id(detail::get_le<std::uint32_t>(in), '\0');
    in.read(id.data(), static_cast<std::streamsize>(id.size()));
    MeanMapVector v;
    v.kernel = kernel;
    v.source_size = detail::get_le<std::uint64_t>(in);
    v.values.resize(dim);
    for (auto& x : v.values) x = detail::get_le<double>(in);
    table.ids.push_back(std::move(id));
    table.rows.push_back(std::move(v));
  }
  return table;
}

inline void write_precision_csv(std::ostream& out, const PrecisionCurve& curve) {
  out << "k,precision\n";
  for (std::size_t i = 0; i < curve.ks.size(); ++i) out << curve.ks[i] << ',' << format_double(curve.precision[i]) << '\n';
}

}  // namespace tidk
