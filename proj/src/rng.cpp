#include "pdsape/rng.hpp"

#include "pdsape/penalty.hpp"

#include <algorithm>

namespace pdsape {

double counter_normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  const Philox::Block blk = Philox(seed)(a, b);
  return inv_norm_cdf(bits_to_unit((std::uint64_t{blk[1]} << 32) | blk[0]));
}

double PhiloxStream::normal() { return inv_norm_cdf(uniform()); }

std::uint64_t PhiloxStream::below(std::uint64_t m) {
  const auto v = static_cast<std::uint64_t>(uniform() * static_cast<double>(m));
  return std::min(v, m - 1);
}

}  // namespace pdsape
