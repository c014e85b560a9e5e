#ifndef GGT_KERNELS_HPP
#define GGT_KERNELS_HPP

#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ggt/base.hpp"

namespace ggt {

// The enumeration workloads (map-space scans, candidate-family filters) are
// flat loops over a code range with an independent predicate per code.  Both
// entry points return the passing codes in ascending order; the serial one
// is the reference the parallel one is tested against.

template <class Pred>
std::vector<std::uint64_t> scan_codes_serial(std::uint64_t count, Pred&& pred) {
  std::vector<std::uint64_t> hits;
  for (std::uint64_t code = 0; code < count; ++code)
    if (pred(code)) hits.push_back(code);
  return hits;
}

template <class Pred>
std::vector<std::uint64_t> scan_codes_parallel(std::uint64_t count,
                                               Pred&& pred) {
#ifdef _OPENMP
  if (count < 4096) return scan_codes_serial(count, pred);
  int threads = omp_get_max_threads();
  std::vector<std::vector<std::uint64_t>> buckets(
      static_cast<std::size_t>(threads));
#pragma omp parallel num_threads(threads)
  {
    int t = omp_get_thread_num();
    std::uint64_t chunk = (count + static_cast<std::uint64_t>(threads) - 1) /
                          static_cast<std::uint64_t>(threads);
    std::uint64_t lo = chunk * static_cast<std::uint64_t>(t);
    std::uint64_t hi = lo + chunk < count ? lo + chunk : count;
    auto& mine = buckets[static_cast<std::size_t>(t)];
    for (std::uint64_t code = lo; code < hi; ++code)
      if (pred(code)) mine.push_back(code);
  }
  // contiguous thread ranges: concatenation in thread order is sorted
  std::vector<std::uint64_t> hits;
  for (auto& b : buckets) hits.insert(hits.end(), b.begin(), b.end());
  return hits;
#else
  return scan_codes_serial(count, pred);
#endif
}

template <class Pred>
std::vector<std::uint64_t> scan_codes(std::uint64_t count, Pred&& pred) {
  return scan_codes_parallel(count, pred);
}

// Base-k map codes: digit i (most significant first) is the image position
// of the i-th domain element, so ascending code = lexicographic image order.
inline void decode_map(std::uint64_t code, int k, std::vector<int>& out) {
  for (int i = static_cast<int>(out.size()) - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = static_cast<int>(code % static_cast<std::uint64_t>(k));
    code /= static_cast<std::uint64_t>(k);
  }
}

inline std::uint64_t encode_map(const std::vector<int>& digits, int k) {
  std::uint64_t code = 0;
  for (int d : digits) code = code * static_cast<std::uint64_t>(k) +
                              static_cast<std::uint64_t>(d);
  return code;
}

inline std::uint64_t pow_u64(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace ggt

#endif  // GGT_KERNELS_HPP
