#include "clab/rng.hpp"

namespace clab {

std::uint64_t RngStream::binomial(std::uint64_t n, double p) {
  if (p <= 0.0 || n == 0) return 0;
  if (p >= 1.0) return n;
  // Geometric-skip sampling; cost ~ n*p draws.
  const double log1mp = std::log1p(-p);
  std::uint64_t k = 0;
  double i = -1.0;
  for (;;) {
    i += 1.0 + std::floor(std::log(uniform_pos()) / log1mp);
    if (i >= static_cast<double>(n)) break;
    ++k;
  }
  return k;
}

}  // namespace clab
