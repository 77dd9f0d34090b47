#pragma once

#include <string>
#include <vector>

#include "uekit/metrics.hpp"

namespace uekit::cli {

// Two-panel SVG: risk-coverage curve on the left, confidence histogram split
// by correctness on the right.
std::string evaluation_svg(const std::string& title,
                           const std::vector<metrics::RiskCoveragePoint>& curve,
                           const metrics::ScoredRecordSet& set, int histogram_bins = 20);

}  // namespace uekit::cli
