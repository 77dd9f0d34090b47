#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "uekit/core.hpp"

namespace uekit::synth {

// Deterministic record generators with known signal structure.
//
//   noise-free     correct iff the geometric mean of the significant tokens'
//                  probabilities exceeds 0.5; hidden states carry the label.
//   length-bias    correctness independent of answer length; per-token
//                  probabilities track correctness, so the raw product is
//                  confounded by length while the geometric mean is not.
//   language-prior a fraction rho of records are confidently wrong (every
//                  token probability > 0.6), distinguishable from confidently
//                  right ones only through the hidden states.
//   fused-signal   correct iff (probability predicate) AND (hidden grounding
//                  predicate), then labels flipped with probability `noise`.
//   hidden-signal  correctness readable from hidden states only.
enum class PresetKind { kNoiseFree, kLengthBias, kLanguagePrior, kFusedSignal, kHiddenSignal };

std::string_view preset_name(PresetKind kind);
PresetKind parse_preset(std::string_view name);

struct SynthPreset {
  PresetKind kind = PresetKind::kNoiseFree;
  std::size_t n = 1000;
  int k_min = 4;
  int k_max = 8;
  int l_min = 1;
  int l_max = 5;
  std::size_t hidden_width = 32;
  double noise = 0.0;   // independent label-flip probability
  double rho = 0.3;     // language-prior: share of confidently wrong records
  double signal = 1.5;  // hidden grounding magnitude along the direction
  std::size_t beams = 4;  // 0 disables beams
  std::uint64_t seed = 0;

  // Per-kind defaults (length-bias uses answers of 1..12 tokens).
  static SynthPreset defaults(PresetKind kind);
  void validate() const;
  std::map<std::string, std::string> meta() const;
};

Dataset generate(const SynthPreset& preset);

// Published generator rules, usable as independent oracles.
const std::vector<std::string>& significant_tokens();
bool is_significant(std::string_view token);
// Geometric mean of the significant answer tokens' probabilities.
double significant_geo_mean(const GenerationRecord& record);
// Probability predicate: significant_geo_mean > 0.5.
bool probability_predicate(const GenerationRecord& record);
// Unit vector along which answer hidden rows encode grounding. Depends only
// on hidden_width, so files generated with different seeds share it.
std::vector<double> grounding_direction(const SynthPreset& preset);
// Hidden predicate: mean answer-row projection onto the direction is > 0.
bool hidden_predicate(const GenerationRecord& record, const std::vector<double>& direction);

// Language-prior generator grid: record types and their per-token
// probability distributions.
struct GridComponent {
  std::string name;
  double prior = 0.0;
  int label = 0;
  std::vector<double> values;
  std::vector<double> weights;
};
std::vector<GridComponent> language_prior_grid(const SynthPreset& preset);

// Bayes posterior P(correct | token_probs) under the language-prior generator,
// computed by enumerating the grid components. It is the best possible
// probability-only scorer for that preset.
double language_prior_posterior(const std::vector<double>& token_probs,
                                const SynthPreset& preset);

}  // namespace uekit::synth
