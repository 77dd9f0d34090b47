#include "uekit/learn/prob_bins.hpp"

#include <cmath>
#include <string>

#include "uekit/error.hpp"

namespace uekit::learn {

void ProbBinEmbedder::validate() const {
  if (bins == 0 || dim == 0 || dim % bins != 0) {
    throw Error(ErrorKind::kUsage, "probability embedding dim " + std::to_string(dim) +
                                       " must be a positive multiple of bin count " +
                                       std::to_string(bins));
  }
}

int ProbBinEmbedder::bin(double p) const {
  if (!(p > 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::kDomain, "probability " + std::to_string(p) + " not in (0, 1]");
  }
  const auto k = static_cast<double>(bins);
  const auto r = static_cast<std::size_t>(std::floor(p * k)) + 1;
  return static_cast<int>(std::min(r, bins));
}

std::vector<double> ProbBinEmbedder::embed(double p) const { return embed_bin(bin(p)); }

std::vector<double> ProbBinEmbedder::embed_bin(int r) const {
  std::vector<double> v(dim, 0.0);
  if (r <= 0) return v;
  const std::size_t width = dim / bins;
  const auto begin = static_cast<std::size_t>(r - 1) * width;
  for (std::size_t i = begin; i < begin + width; ++i) v[i] = 1.0;
  return v;
}

}  // namespace uekit::learn
