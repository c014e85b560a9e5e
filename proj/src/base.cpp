#include "ggt/base.hpp"

#include <cstdlib>

namespace ggt {

std::vector<int> mask_elems(Mask m) {
  std::vector<int> out;
  while (m) {
    int i = __builtin_ctzll(m);
    out.push_back(i);
    m &= m - 1;
  }
  return out;
}

Mask mask_of(const std::vector<int>& elems) {
  Mask m = 0;
  for (int e : elems) m |= mask_bit(e);
  return m;
}

Budget Budget::from_env() {
  Budget b;
  if (const char* env = std::getenv("GGT_BUDGET")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v > 0) b.override_all(static_cast<int>(v));
  }
  return b;
}

void Budget::override_all(int n) {
  endo_space = n;
  auto_space = n;
  tspace_exhaustive = n;
  topology_base = n < topology_base_max ? n : topology_base_max;
  powerset_points = n;
  brute_space = n;
  brute_end = n;
}

}  // namespace ggt
