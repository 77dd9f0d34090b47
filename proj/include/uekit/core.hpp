#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace uekit {

// Dense row-major float32 matrix of generator activations.
struct HiddenStates {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  const float* row(std::size_t r) const { return data.data() + r * cols; }
  bool operator==(const HiddenStates&) const = default;
};

struct Beam {
  std::vector<std::string> answer_tokens;
  std::vector<double> token_probs;
  bool operator==(const Beam&) const = default;
};

// Auxiliary generations attached to a record. cluster_ids, when present,
// label each beam with a semantic-equivalence class in [0, beams.size()).
struct BeamSet {
  std::vector<Beam> beams;
  std::optional<std::vector<int>> cluster_ids;
  bool operator==(const BeamSet&) const = default;
};

// One logged generation: question, answer with per-token probabilities,
// optional hidden states (K + L rows), and the binary correctness label.
struct GenerationRecord {
  std::string id;
  std::string image_id;
  std::vector<std::string> question_tokens;
  std::vector<std::string> answer_tokens;
  std::vector<double> token_probs;
  std::optional<HiddenStates> hidden_states;
  int correctness = 0;
  std::optional<double> self_eval_conf;
  std::optional<BeamSet> beams;
  std::map<std::string, std::string> meta;

  std::size_t question_len() const { return question_tokens.size(); }
  std::size_t answer_len() const { return answer_tokens.size(); }
  bool operator==(const GenerationRecord&) const = default;
};

// Throws Error(kMalformedInput) naming the record id and offending field.
void validate_record(const GenerationRecord& record);

struct Dataset {
  std::string name;
  std::vector<GenerationRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  bool operator==(const Dataset&) const = default;
};

// Validates every record and checks id uniqueness.
void validate_dataset(const Dataset& dataset);

std::vector<int> labels_of(const Dataset& dataset);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

// Deterministic train/validation partition. |train| is
// round-half-to-even(train_fraction * n); members are chosen by a permutation
// derived from the seed only, and each side keeps the input order.
std::pair<Dataset, Dataset> split(const Dataset& dataset, const SplitSpec& spec);

// Salted hashing vocabulary standing in for a learned tokenizer.
struct Vocab {
  std::uint32_t size = 4096;
  std::uint64_t salt = 0;
};

// 64-bit FNV-1a over the bytes of `data`, starting from `basis`.
std::uint64_t fnv1a64(std::string_view data,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);

// id = FNV-1a64(salt as 8 little-endian bytes, then token bytes) mod size.
std::uint32_t token_to_id(std::string_view token, const Vocab& vocab);

}  // namespace uekit
