#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "uekit/core.hpp"
#include <json.hpp>

namespace uekit {

// Line-delimited JSON record log. One object per line, '\n' separated:
//   id, image_id, question_tokens, answer_tokens, token_probs,
//   hidden_states (array of rows) | hidden_states_b64 + hs_rows + hs_cols,
//   correctness, self_eval_conf?, beams?, meta?
// Blank lines are ignored.

enum class HiddenEncoding { kJsonArray, kB64Float32 };

nlohmann::ordered_json record_to_json(const GenerationRecord& record,
                                      HiddenEncoding encoding);
// Throws Error(kMalformedInput) on schema errors; does not run invariant
// checks (see validate_record).
GenerationRecord record_from_json(const nlohmann::json& j);

// Parses and validates a whole stream. Errors carry the 1-based line number;
// invariant violations additionally name the record id and field.
Dataset parse_records(std::istream& in, const std::string& name = "records");
Dataset parse_records(const std::filesystem::path& path);

void write_records(const Dataset& dataset, std::ostream& out,
                   HiddenEncoding encoding = HiddenEncoding::kJsonArray);
void write_records(const Dataset& dataset, const std::filesystem::path& path,
                   HiddenEncoding encoding = HiddenEncoding::kJsonArray);

struct PaddingPolicy {
  std::size_t max_len = 128;
  double pad_value = 0.0;
};

// Fixed-length view of a record. Positions [0, question_len) hold the
// question, [question_len, question_len + answer_len) the (possibly
// truncated) answer, and the rest is padding. probs carries the answer token
// probabilities at answer positions and pad_value elsewhere.
struct PaddedView {
  std::size_t max_len = 0;
  std::size_t question_len = 0;
  std::size_t answer_len = 0;
  std::size_t hidden_width = 0;  // 0 when the record has no hidden states
  std::vector<std::uint32_t> token_ids;
  std::vector<double> probs;
  std::vector<float> hidden;  // max_len x hidden_width, row-major
  std::vector<std::uint8_t> mask;

  std::size_t real_len() const { return question_len + answer_len; }
  bool has_hidden() const { return hidden_width > 0; }
  bool is_answer(std::size_t pos) const {
    return pos >= question_len && pos < real_len();
  }
  const float* hidden_row(std::size_t pos) const {
    return hidden.data() + pos * hidden_width;
  }
};

// Pads to max_len; when K + L exceeds the window the answer tail is dropped
// and the question is kept whole. Hidden rows are truncated the same way.
PaddedView pad_or_truncate(const GenerationRecord& record,
                           const PaddingPolicy& policy, const Vocab& vocab);

}  // namespace uekit
