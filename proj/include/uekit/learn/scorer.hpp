#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "uekit/core.hpp"
#include "uekit/ingest.hpp"
#include "uekit/learn/prob_bins.hpp"
#include "uekit/tensor/autograd.hpp"

namespace uekit {
class Rng;
}

namespace uekit::learn {

using tensor::Tensor;
using tensor::Var;

// Which input signals a scorer consumes.
//   harmony   : text + token probabilities + hidden states
//   lars      : text + token probabilities
//   msf       : hidden states only (pooled MLP)
//   text-only : text
enum class ScorerKind { kHarmony, kLars, kMsf, kTextOnly };

std::string_view kind_name(ScorerKind kind);
ScorerKind parse_kind(std::string_view name);

struct ScorerSpec {
  ScorerKind kind = ScorerKind::kHarmony;
  std::uint32_t vocab_size = 4096;
  std::uint64_t vocab_salt = 0;
  std::size_t d_model = 64;
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t d_ff = 128;
  std::size_t max_len = 128;
  std::size_t hidden_width = 32;
  std::size_t prob_bins = 8;
  double dropout = 0.1;
  std::vector<std::size_t> msf_widths = {256, 64};

  bool uses_text() const { return kind != ScorerKind::kMsf; }
  bool uses_probs() const { return kind == ScorerKind::kHarmony || kind == ScorerKind::kLars; }
  bool uses_hidden() const { return kind == ScorerKind::kHarmony || kind == ScorerKind::kMsf; }

  Vocab vocab() const { return {vocab_size, vocab_salt}; }
  PaddingPolicy padding() const { return {max_len, 0.0}; }
  // Sequence length of the encoder input including the CLS slot.
  std::size_t sequence_len() const;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static ScorerSpec from_json(const nlohmann::json& j);
  bool operator==(const ScorerSpec&) const = default;
};

// How the encoder sees padding. kCompact runs only the real positions;
// kPaddedMasked runs all slots and masks padded keys out of attention. The
// CLS output is identical in both modes; training and scoring use kCompact.
enum class ExecMode { kCompact, kPaddedMasked };

struct EmbeddedInput {
  Var sequence;                    // slots x d_model, after embedding LayerNorm
  std::vector<std::size_t> slots;  // layout slot of each row
  std::vector<std::uint8_t> mask;  // 1 = real position
};

struct ForwardOptions {
  bool training = false;  // enables dropout
  Rng* rng = nullptr;     // required when training with dropout > 0
  ExecMode mode = ExecMode::kCompact;
};

// Learnable confidence scorer. Parameters are graph leaves keyed by name;
// iteration order is the name order.
class Scorer {
 public:
  // Random initialization. With zero_head the output layer starts at zero so
  // every record scores sigmoid(0) = 0.5.
  Scorer(ScorerSpec spec, std::uint64_t seed, bool zero_head = true);
  Scorer(ScorerSpec spec, const std::vector<std::pair<std::string, Tensor>>& params);

  const ScorerSpec& spec() const { return spec_; }
  const std::map<std::string, Var>& params() const { return params_; }
  std::vector<Var> parameter_list() const;
  std::vector<std::pair<std::string, Tensor>> snapshot() const;
  void load(const std::vector<std::pair<std::string, Tensor>>& params);

  // Throws Error(kMissingChannel) when the record lacks a required signal.
  void check_channels(const GenerationRecord& record) const;
  PaddedView prepare(const GenerationRecord& record) const;

  // Layout: [CLS] + max_len text slots + (harmony) max_len hidden slots.
  // Text slot = token + position + segment (+ probability bin at answer
  // positions); hidden slot = projected hidden row + position + segment.
  EmbeddedInput build_input(const PaddedView& view, const ForwardOptions& opts = {}) const;
  // Linear projection of the view's real hidden rows (before position and
  // segment embeddings).
  Var project_hidden(const PaddedView& view) const;

  Var forward_logit(const PaddedView& view, const ForwardOptions& opts = {}) const;
  double score(const GenerationRecord& record) const;

 private:
  Var p(const std::string& name) const;
  Var encoder(Var x, const std::vector<std::uint8_t>& mask, const ForwardOptions& opts) const;
  Var msf_forward(const PaddedView& view, const ForwardOptions& opts) const;
  Var project_rows(const PaddedView& view, std::size_t rows) const;
  void add_param(const std::string& name, Tensor value);

  ScorerSpec spec_;
  ProbBinEmbedder bins_;
  std::map<std::string, Var> params_;
};

// Mean of question hidden rows followed by mean of answer hidden rows (2N).
std::vector<double> msf_pool(const PaddedView& view);

// Confidence for every record; OpenMP over records against the frozen
// parameters. score_all_serial is the reference implementation.
std::vector<double> score_all(const Scorer& scorer, const Dataset& dataset);
std::vector<double> score_all_serial(const Scorer& scorer, const Dataset& dataset);

// -[g log f + (1 - g) log(1 - f)] evaluated from the logit.
double bce_loss_from_logit(double logit, int label);
double sigmoid(double z);

}  // namespace uekit::learn
