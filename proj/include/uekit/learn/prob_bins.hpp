#pragma once

#include <cstddef>
#include <vector>

namespace uekit::learn {

// Maps a probability to one of k orthogonal one-hot block vectors of width
// d / k. Bin r (1..k) covers [(r-1)/k, r/k), the last bin closed at 1; it
// sets positions [(r-1) d/k, r d/k) to one. Bin 0 is the padding sentinel
// and embeds to the zero vector.
struct ProbBinEmbedder {
  std::size_t bins = 8;
  std::size_t dim = 64;

  void validate() const;
  // Throws Error(kDomain) for p outside (0, 1].
  int bin(double p) const;
  std::vector<double> embed(double p) const;
  std::vector<double> embed_bin(int bin) const;
};

}  // namespace uekit::learn
