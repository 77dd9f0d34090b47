#include "uekit/ingest.hpp"

#include <fstream>
#include <optional>
#include <sstream>

#include "uekit/base64.hpp"
#include "uekit/error.hpp"

namespace uekit {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void schema_error(const std::string& why) {
  throw Error(ErrorKind::kMalformedInput, why);
}

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) schema_error(std::string("missing field ") + key);
  return *it;
}

std::vector<std::string> string_list(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_array()) schema_error(std::string("field ") + key + ": expected array");
  std::vector<std::string> out;
  out.reserve(v.size());
  for (const json& e : v) {
    if (!e.is_string()) {
      schema_error(std::string("field ") + key + ": expected strings");
    }
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::vector<double> number_list(const json& v, const char* key) {
  if (!v.is_array()) schema_error(std::string("field ") + key + ": expected array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const json& e : v) {
    if (!e.is_number()) {
      schema_error(std::string("field ") + key + ": expected numbers");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

HiddenStates hidden_from_json(const json& j) {
  HiddenStates h;
  if (j.contains("hidden_states")) {
    const json& rows = j["hidden_states"];
    if (!rows.is_array()) schema_error("field hidden_states: expected array of rows");
    h.rows = rows.size();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::vector<double> row = number_list(rows[r], "hidden_states");
      if (r == 0) {
        h.cols = row.size();
        h.data.reserve(h.rows * h.cols);
      } else if (row.size() != h.cols) {
        schema_error("field hidden_states: ragged rows");
      }
      for (double v : row) h.data.push_back(static_cast<float>(v));
    }
    return h;
  }
  const json& blob = require(j, "hidden_states_b64");
  if (!blob.is_string()) schema_error("field hidden_states_b64: expected string");
  const json& rows = require(j, "hs_rows");
  const json& cols = require(j, "hs_cols");
  if (!rows.is_number_unsigned() || !cols.is_number_unsigned()) {
    schema_error("fields hs_rows/hs_cols: expected non-negative integers");
  }
  h.rows = rows.get<std::size_t>();
  h.cols = cols.get<std::size_t>();
  h.data = base64::decode_f32le(blob.get<std::string>());
  if (h.data.size() != h.rows * h.cols) {
    schema_error("field hidden_states_b64: blob holds " +
                 std::to_string(h.data.size()) + " floats, expected hs_rows * hs_cols");
  }
  return h;
}

Beam beam_from_json(const json& j) {
  Beam b;
  b.answer_tokens = string_list(j, "answer_tokens");
  b.token_probs = number_list(require(j, "token_probs"), "token_probs");
  return b;
}

}  // namespace

ordered_json record_to_json(const GenerationRecord& r, HiddenEncoding encoding) {
  ordered_json j;
  j["id"] = r.id;
  j["image_id"] = r.image_id;
  j["question_tokens"] = r.question_tokens;
  j["answer_tokens"] = r.answer_tokens;
  j["token_probs"] = r.token_probs;
  if (r.hidden_states) {
    const HiddenStates& h = *r.hidden_states;
    if (encoding == HiddenEncoding::kB64Float32) {
      j["hidden_states_b64"] = base64::encode_f32le(h.data);
      j["hs_rows"] = h.rows;
      j["hs_cols"] = h.cols;
    } else {
      ordered_json rows = ordered_json::array();
      for (std::size_t row = 0; row < h.rows; ++row) {
        ordered_json values = ordered_json::array();
        for (std::size_t c = 0; c < h.cols; ++c) {
          values.push_back(static_cast<double>(h.data[row * h.cols + c]));
        }
        rows.push_back(std::move(values));
      }
      j["hidden_states"] = std::move(rows);
    }
  }
  j["correctness"] = r.correctness;
  if (r.self_eval_conf) j["self_eval_conf"] = *r.self_eval_conf;
  if (r.beams) {
    ordered_json beams = ordered_json::array();
    for (const Beam& b : r.beams->beams) {
      ordered_json bj;
      bj["answer_tokens"] = b.answer_tokens;
      bj["token_probs"] = b.token_probs;
      beams.push_back(std::move(bj));
    }
    ordered_json bs;
    bs["beams"] = std::move(beams);
    if (r.beams->cluster_ids) bs["cluster_ids"] = *r.beams->cluster_ids;
    j["beams"] = std::move(bs);
  }
  if (!r.meta.empty()) j["meta"] = r.meta;
  return j;
}

GenerationRecord record_from_json(const json& j) {
  if (!j.is_object()) schema_error("record must be a JSON object");
  GenerationRecord r;
  const json& id = require(j, "id");
  if (!id.is_string()) schema_error("field id: expected string");
  r.id = id.get<std::string>();
  if (j.contains("image_id")) {
    if (!j["image_id"].is_string()) schema_error("field image_id: expected string");
    r.image_id = j["image_id"].get<std::string>();
  }
  r.question_tokens = string_list(j, "question_tokens");
  r.answer_tokens = string_list(j, "answer_tokens");
  r.token_probs = number_list(require(j, "token_probs"), "token_probs");
  if (j.contains("hidden_states") || j.contains("hidden_states_b64")) {
    r.hidden_states = hidden_from_json(j);
  }
  const json& label = require(j, "correctness");
  if (!label.is_number_integer()) schema_error("field correctness: expected integer");
  r.correctness = label.get<int>();
  if (j.contains("self_eval_conf") && !j["self_eval_conf"].is_null()) {
    if (!j["self_eval_conf"].is_number()) {
      schema_error("field self_eval_conf: expected number");
    }
    r.self_eval_conf = j["self_eval_conf"].get<double>();
  }
  if (j.contains("beams") && !j["beams"].is_null()) {
    const json& bs = j["beams"];
    const json& list = require(bs, "beams");
    if (!list.is_array()) schema_error("field beams.beams: expected array");
    BeamSet set;
    for (const json& b : list) set.beams.push_back(beam_from_json(b));
    if (bs.contains("cluster_ids")) {
      if (!bs["cluster_ids"].is_array()) {
        schema_error("field beams.cluster_ids: expected array");
      }
      std::vector<int> ids;
      for (const json& c : bs["cluster_ids"]) {
        if (!c.is_number_integer()) {
          schema_error("field beams.cluster_ids: expected integers");
        }
        ids.push_back(c.get<int>());
      }
      set.cluster_ids = std::move(ids);
    }
    r.beams = std::move(set);
  }
  if (j.contains("meta")) {
    const json& meta = j["meta"];
    if (!meta.is_object()) schema_error("field meta: expected object");
    for (auto it = meta.begin(); it != meta.end(); ++it) {
      if (!it.value().is_string()) schema_error("field meta: expected string values");
      r.meta[it.key()] = it.value().get<std::string>();
    }
  }
  return r;
}

Dataset parse_records(std::istream& in, const std::string& name) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));

  const auto n = static_cast<std::ptrdiff_t>(lines.size());
  std::vector<std::optional<GenerationRecord>> parsed(lines.size());
  std::vector<std::string> errors(lines.size());

#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::string& line = lines[i];
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      GenerationRecord r = record_from_json(j);
      validate_record(r);
      parsed[i] = std::move(r);
    } catch (const json::exception& e) {
      errors[i] = std::string("malformed JSON: ") + e.what();
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  }

  Dataset dataset{name, {}};
  std::optional<std::size_t> width;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = "line " + std::to_string(i + 1) + ": ";
    if (!errors[i].empty()) throw Error(ErrorKind::kMalformedInput, where + errors[i]);
    if (!parsed[i]) continue;
    GenerationRecord& r = *parsed[i];
    if (r.hidden_states) {
      if (!width) {
        width = r.hidden_states->cols;
      } else if (*width != r.hidden_states->cols) {
        throw Error(ErrorKind::kMalformedInput,
                    where + "record '" + r.id + "': inconsistent hidden width (" +
                        std::to_string(r.hidden_states->cols) + " vs " +
                        std::to_string(*width) + ")");
      }
    }
    dataset.records.push_back(std::move(r));
  }
  try {
    validate_dataset(dataset);
  } catch (const Error& e) {
    throw Error(ErrorKind::kMalformedInput, e.what());
  }
  return dataset;
}

Dataset parse_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return parse_records(in, path.stem().string());
}

void write_records(const Dataset& dataset, std::ostream& out,
                   HiddenEncoding encoding) {
  for (const GenerationRecord& r : dataset.records) {
    out << record_to_json(r, encoding).dump() << '\n';
  }
}

void write_records(const Dataset& dataset, const std::filesystem::path& path,
                   HiddenEncoding encoding) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  write_records(dataset, out, encoding);
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

PaddedView pad_or_truncate(const GenerationRecord& record,
                           const PaddingPolicy& policy, const Vocab& vocab) {
  const std::size_t k = record.question_len();
  if (k >= policy.max_len) {
    throw Error(ErrorKind::kDomain, "record '" + record.id +
                                        "': question exceeds window (K = " +
                                        std::to_string(k) + ", max_len = " +
                                        std::to_string(policy.max_len) + ")");
  }
  PaddedView v;
  v.max_len = policy.max_len;
  v.question_len = k;
  v.answer_len = std::min(record.answer_len(), policy.max_len - k);
  v.token_ids.assign(policy.max_len, 0);
  v.probs.assign(policy.max_len, policy.pad_value);
  v.mask.assign(policy.max_len, 0);

  for (std::size_t i = 0; i < k; ++i) {
    v.token_ids[i] = token_to_id(record.question_tokens[i], vocab);
    v.mask[i] = 1;
  }
  for (std::size_t i = 0; i < v.answer_len; ++i) {
    v.token_ids[k + i] = token_to_id(record.answer_tokens[i], vocab);
    v.probs[k + i] = record.token_probs[i];
    v.mask[k + i] = 1;
  }
  if (record.hidden_states) {
    const HiddenStates& h = *record.hidden_states;
    v.hidden_width = h.cols;
    v.hidden.assign(policy.max_len * h.cols, static_cast<float>(policy.pad_value));
    // Hidden rows follow the token layout: K question rows, then answer rows.
    std::copy(h.data.begin(),
              h.data.begin() + static_cast<std::ptrdiff_t>(v.real_len() * h.cols),
              v.hidden.begin());
  }
  return v;
}

}  // namespace uekit
