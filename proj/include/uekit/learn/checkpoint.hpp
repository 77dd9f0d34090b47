#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "uekit/learn/scorer.hpp"

namespace uekit::learn {

// Trained scorer parameters plus provenance. Parameter values are float32
// representable, so a saved and reloaded checkpoint scores bit-identically.
struct ScorerCheckpoint {
  ScorerSpec spec;
  std::vector<std::pair<std::string, Tensor>> params;
  double best_val_auroc = 0.0;
  std::size_t steps = 0;
  std::size_t best_step = 0;
  std::uint64_t seed = 0;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  Scorer scorer() const { return Scorer(spec, params); }
};

// Rounds every parameter to the nearest float32.
std::vector<std::pair<std::string, Tensor>> round_to_float32(
    std::vector<std::pair<std::string, Tensor>> params);

ScorerCheckpoint checkpoint_from(const Scorer& scorer, std::uint64_t seed);

std::string encode_scorer_checkpoint(const ScorerCheckpoint& ckpt);
ScorerCheckpoint decode_scorer_checkpoint(const std::string& bytes);

void save_checkpoint(const ScorerCheckpoint& ckpt, const std::filesystem::path& path);
ScorerCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace uekit::learn
