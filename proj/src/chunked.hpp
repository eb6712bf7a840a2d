#pragma once

#include <cstddef>
#include <cstdint>

namespace hlt::detail {

inline constexpr std::size_t kChunkSize = 4096;

// Runs body(chunk_index, begin, end) over fixed-size chunks of [0, total).
// Chunk boundaries depend only on `total`, so per-chunk RNG substreams give
// the same output for any thread count.
template <class Body>
void for_each_chunk(std::size_t total, Body&& body, std::size_t chunk_size = kChunkSize) {
  const std::int64_t chunks = static_cast<std::int64_t>((total + chunk_size - 1) / chunk_size);
#if defined(HLT_HAVE_OPENMP)
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t c = 0; c < chunks; ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * chunk_size;
    const std::size_t end = begin + chunk_size < total ? begin + chunk_size : total;
    body(static_cast<std::uint64_t>(c), begin, end);
  }
}

}  // namespace hlt::detail
