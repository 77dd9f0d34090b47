#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uekit/core.hpp"

namespace uekit {

enum class Orientation { kConfidence, kUncertainty };

std::string_view orientation_name(Orientation o);
Orientation parse_orientation(std::string_view name);

struct UEScore {
  double value = 0.0;
  Orientation orientation = Orientation::kConfidence;
  std::string method;

  // Higher = more confident, whatever the native orientation.
  double confidence() const {
    return orientation == Orientation::kConfidence ? value : -value;
  }
};

namespace blackbox {

// Sum of log token probabilities (the log-domain sequence probability).
double seq_log_prob(std::span<const double> probs);
// Mean log token probability; lnc = exp of this.
double mean_log_prob(std::span<const double> probs);

UEScore seq_prob(const GenerationRecord& record);
UEScore lnc(const GenerationRecord& record);
UEScore first_token(const GenerationRecord& record);
UEScore self_eval(const GenerationRecord& record);

// Beam-based scorers; throw Error(kMissingChannel) "requires beams".
UEScore entropy(const GenerationRecord& record);

enum class SemanticEntropyForm {
  kStandard,   // -(1/|C|) sum_i log P(c_i)
  kAsPrinted,  // -(1/|C|) log sum_i P(c_i)
};
UEScore semantic_entropy(const GenerationRecord& record,
                         SemanticEntropyForm form = SemanticEntropyForm::kStandard);
UEScore cluster_entropy(const GenerationRecord& record);

// Lowercased answer with runs of whitespace collapsed to one space.
std::string normalize_answer(const std::vector<std::string>& tokens);

// Cluster labels for the beams: the logged cluster_ids when present, else
// exact match on normalized answers, numbered in order of first appearance.
std::vector<int> cluster_beams(const BeamSet& beams);

}  // namespace blackbox

// Named scorer registry used by the CLI and batch scoring.
// Names: seq-prob, lnc, entropy, semantic-entropy, semantic-entropy-printed,
// cluster-entropy, first-token, self-eval.
const std::vector<std::string>& blackbox_methods();
UEScore score_blackbox(std::string_view method, const GenerationRecord& record);

// Scores every record. The parallel version distributes records over OpenMP
// threads; score_dataset_serial is the reference used in tests.
std::vector<UEScore> score_dataset(std::string_view method, const Dataset& dataset);
std::vector<UEScore> score_dataset_serial(std::string_view method,
                                          const Dataset& dataset);

}  // namespace uekit
