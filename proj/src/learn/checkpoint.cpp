#include "uekit/learn/checkpoint.hpp"

#include "uekit/error.hpp"
#include "uekit/tensor/checkpoint_file.hpp"

namespace uekit::learn {

std::vector<std::pair<std::string, Tensor>> round_to_float32(
    std::vector<std::pair<std::string, Tensor>> params) {
  for (auto& [name, t] : params) {
    for (double& x : t.data) x = static_cast<double>(static_cast<float>(x));
  }
  return params;
}

ScorerCheckpoint checkpoint_from(const Scorer& scorer, std::uint64_t seed) {
  ScorerCheckpoint c;
  c.spec = scorer.spec();
  c.params = round_to_float32(scorer.snapshot());
  c.seed = seed;
  return c;
}

namespace {

tensor::CheckpointFile to_file(const ScorerCheckpoint& ckpt) {
  tensor::CheckpointFile file;
  file.metadata["spec"] = ckpt.spec.to_json();
  file.metadata["best_val_auroc"] = ckpt.best_val_auroc;
  file.metadata["steps"] = ckpt.steps;
  file.metadata["best_step"] = ckpt.best_step;
  file.metadata["seed"] = ckpt.seed;
  file.metadata["extra"] = ckpt.extra;
  file.tensors = ckpt.params;
  return file;
}

ScorerCheckpoint from_file(const tensor::CheckpointFile& file) {
  ScorerCheckpoint c;
  try {
    const auto& m = file.metadata;
    c.spec = ScorerSpec::from_json(m.at("spec"));
    c.best_val_auroc = m.at("best_val_auroc").get<double>();
    c.steps = m.at("steps").get<std::size_t>();
    c.best_step = m.at("best_step").get<std::size_t>();
    c.seed = m.at("seed").get<std::uint64_t>();
    c.extra = m.value("extra", nlohmann::ordered_json::object());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kCheckpoint, std::string("corrupt header: metadata: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorKind::kCheckpoint, std::string("corrupt header: ") + e.what());
  }
  c.params = file.tensors;
  Scorer probe(c.spec, c.params);  // validates names and shapes
  return c;
}

}  // namespace

std::string encode_scorer_checkpoint(const ScorerCheckpoint& ckpt) {
  return tensor::encode_checkpoint(to_file(ckpt));
}

ScorerCheckpoint decode_scorer_checkpoint(const std::string& bytes) {
  return from_file(tensor::decode_checkpoint(bytes));
}

void save_checkpoint(const ScorerCheckpoint& ckpt, const std::filesystem::path& path) {
  tensor::write_checkpoint_file(path, to_file(ckpt));
}

ScorerCheckpoint load_checkpoint(const std::filesystem::path& path) {
  return from_file(tensor::read_checkpoint_file(path));
}

}  // namespace uekit::learn
