#include "uekit/core.hpp"

#include <cmath>
#include <set>

#include "uekit/error.hpp"
#include "uekit/rng.hpp"

namespace uekit {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return "usage";
    case ErrorKind::kUnknownMethod: return "unknown_method";
    case ErrorKind::kMalformedInput: return "malformed_input";
    case ErrorKind::kMissingChannel: return "missing_channel";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kCheckpoint: return "checkpoint";
    case ErrorKind::kDomain: return "domain";
  }
  return "unknown";
}

namespace {

[[noreturn]] void reject(const std::string& id, std::string_view field,
                         const std::string& why) {
  throw Error(ErrorKind::kMalformedInput,
              "record '" + id + "': field " + std::string(field) + ": " + why);
}

void check_probs(const std::string& id, std::string_view field,
                 const std::vector<std::string>& tokens,
                 const std::vector<double>& probs) {
  if (tokens.empty()) reject(id, field, "answer must have at least one token");
  if (probs.size() != tokens.size()) {
    reject(id, field,
           "length " + std::to_string(probs.size()) +
               " does not match answer length " + std::to_string(tokens.size()));
  }
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!std::isfinite(p) || !(p > 0.0) || p > 1.0) {
      reject(id, field,
             "probability at position " + std::to_string(i) + " not in (0, 1]");
    }
  }
}

}  // namespace

void validate_record(const GenerationRecord& r) {
  if (r.id.empty()) reject(r.id, "id", "empty id");
  if (r.question_tokens.empty()) {
    reject(r.id, "question_tokens", "question must have at least one token");
  }
  if (r.answer_tokens.empty()) {
    reject(r.id, "answer_tokens", "answer must have at least one token");
  }
  check_probs(r.id, "token_probs", r.answer_tokens, r.token_probs);
  if (r.hidden_states) {
    const HiddenStates& h = *r.hidden_states;
    const std::size_t expected = r.question_len() + r.answer_len();
    if (h.rows != expected) {
      reject(r.id, "hidden_states",
             "row count " + std::to_string(h.rows) + " != K + L = " +
                 std::to_string(expected));
    }
    if (h.cols == 0) reject(r.id, "hidden_states", "zero hidden width");
    if (h.data.size() != h.rows * h.cols) {
      reject(r.id, "hidden_states", "data size does not match rows * cols");
    }
    for (float v : h.data) {
      if (!std::isfinite(v)) reject(r.id, "hidden_states", "non-finite value");
    }
  }
  if (r.correctness != 0 && r.correctness != 1) {
    reject(r.id, "correctness", "label must be 0 or 1");
  }
  if (r.self_eval_conf) {
    const double c = *r.self_eval_conf;
    if (!std::isfinite(c) || c < 0.0 || c > 1.0) {
      reject(r.id, "self_eval_conf", "confidence not in [0, 1]");
    }
  }
  if (r.beams) {
    const BeamSet& b = *r.beams;
    if (b.beams.empty()) reject(r.id, "beams", "beam set must be non-empty");
    for (const Beam& beam : b.beams) {
      check_probs(r.id, "beams.token_probs", beam.answer_tokens,
                  beam.token_probs);
    }
    if (b.cluster_ids) {
      if (b.cluster_ids->size() != b.beams.size()) {
        reject(r.id, "beams.cluster_ids", "one cluster id per beam required");
      }
      for (int c : *b.cluster_ids) {
        if (c < 0 || static_cast<std::size_t>(c) >= b.beams.size()) {
          reject(r.id, "beams.cluster_ids", "cluster id out of [0, B)");
        }
      }
    }
  }
}

void validate_dataset(const Dataset& dataset) {
  std::set<std::string_view> seen;
  for (const GenerationRecord& r : dataset.records) {
    validate_record(r);
    if (!seen.insert(r.id).second) {
      throw Error(ErrorKind::kMalformedInput,
                  "record '" + r.id + "': field id: duplicate id");
    }
  }
}

std::vector<int> labels_of(const Dataset& dataset) {
  std::vector<int> labels;
  labels.reserve(dataset.size());
  for (const auto& r : dataset.records) labels.push_back(r.correctness);
  return labels;
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, const SplitSpec& spec) {
  if (dataset.empty()) throw Error(ErrorKind::kDomain, "empty dataset");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw Error(ErrorKind::kUsage, "train_fraction must be in (0, 1)");
  }
  const std::size_t n = dataset.size();
  // nearbyint honours the default FE_TONEAREST mode: ties go to even.
  const auto n_train = static_cast<std::size_t>(
      std::nearbyint(spec.train_fraction * static_cast<double>(n)));

  Rng rng(spec.seed);
  const std::vector<std::size_t> perm = rng.permutation(n);
  std::vector<bool> in_train(n, false);
  for (std::size_t i = 0; i < n_train; ++i) in_train[perm[i]] = true;

  Dataset train{dataset.name + ":train", {}};
  Dataset val{dataset.name + ":val", {}};
  train.records.reserve(n_train);
  val.records.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (in_train[i] ? train : val).records.push_back(dataset.records[i]);
  }
  return {std::move(train), std::move(val)};
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint32_t token_to_id(std::string_view token, const Vocab& vocab) {
  char salt_bytes[8];
  for (int i = 0; i < 8; ++i) {
    salt_bytes[i] = static_cast<char>((vocab.salt >> (8 * i)) & 0xFF);
  }
  const std::uint64_t h =
      fnv1a64(token, fnv1a64(std::string_view(salt_bytes, 8)));
  return static_cast<std::uint32_t>(h % vocab.size);
}

}  // namespace uekit
