#include "uekit/blackbox.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>

#include "uekit/error.hpp"

namespace uekit {

std::string_view orientation_name(Orientation o) {
  return o == Orientation::kConfidence ? "confidence" : "uncertainty";
}

Orientation parse_orientation(std::string_view name) {
  if (name == "confidence") return Orientation::kConfidence;
  if (name == "uncertainty") return Orientation::kUncertainty;
  throw Error(ErrorKind::kMalformedInput,
              "unknown orientation '" + std::string(name) + "'");
}

namespace blackbox {

namespace {

const BeamSet& require_beams(const GenerationRecord& r) {
  if (!r.beams || r.beams->beams.empty()) {
    throw Error(ErrorKind::kMissingChannel,
                "record '" + r.id + "': requires beams");
  }
  return *r.beams;
}

// Probability mass per cluster, clusters indexed by label.
std::map<int, double> cluster_masses(const BeamSet& beams) {
  const std::vector<int> labels = cluster_beams(beams);
  std::map<int, double> mass;
  for (std::size_t b = 0; b < beams.beams.size(); ++b) {
    mass[labels[b]] += std::exp(mean_log_prob(beams.beams[b].token_probs));
  }
  return mass;
}

}  // namespace

double seq_log_prob(std::span<const double> probs) {
  double s = 0.0;
  for (double p : probs) s += std::log(p);
  return s;
}

double mean_log_prob(std::span<const double> probs) {
  return seq_log_prob(probs) / static_cast<double>(probs.size());
}

UEScore seq_prob(const GenerationRecord& r) {
  return {std::exp(seq_log_prob(r.token_probs)), Orientation::kConfidence,
          "seq-prob"};
}

UEScore lnc(const GenerationRecord& r) {
  return {std::exp(mean_log_prob(r.token_probs)), Orientation::kConfidence, "lnc"};
}

UEScore first_token(const GenerationRecord& r) {
  return {r.token_probs.front(), Orientation::kConfidence, "first-token"};
}

UEScore self_eval(const GenerationRecord& r) {
  if (!r.self_eval_conf) {
    throw Error(ErrorKind::kMissingChannel,
                "record '" + r.id + "': self-eval confidence not logged");
  }
  return {*r.self_eval_conf, Orientation::kConfidence, "self-eval"};
}

UEScore entropy(const GenerationRecord& r) {
  const BeamSet& beams = require_beams(r);
  double acc = 0.0;
  for (const Beam& b : beams.beams) acc += mean_log_prob(b.token_probs);
  const double value = -acc / static_cast<double>(beams.beams.size());
  // A single certain beam gives -0.0; report it as 0.
  return {value == 0.0 ? 0.0 : value, Orientation::kUncertainty, "entropy"};
}

UEScore semantic_entropy(const GenerationRecord& r, SemanticEntropyForm form) {
  const BeamSet& beams = require_beams(r);
  const std::map<int, double> mass = cluster_masses(beams);
  const auto n_clusters = static_cast<double>(mass.size());
  double value = 0.0;
  if (form == SemanticEntropyForm::kStandard) {
    for (const auto& [label, m] : mass) value -= std::log(m);
    value /= n_clusters;
  } else {
    double total = 0.0;
    for (const auto& [label, m] : mass) total += m;
    value = -std::log(total) / n_clusters;
  }
  return {value == 0.0 ? 0.0 : value, Orientation::kUncertainty,
          form == SemanticEntropyForm::kStandard ? "semantic-entropy"
                                                 : "semantic-entropy-printed"};
}

UEScore cluster_entropy(const GenerationRecord& r) {
  const BeamSet& beams = require_beams(r);
  const std::vector<int> labels = cluster_beams(beams);
  std::map<int, std::size_t> counts;
  for (int c : labels) ++counts[c];
  const auto total = static_cast<double>(labels.size());
  double value = 0.0;
  for (const auto& [label, n] : counts) {
    const double q = static_cast<double>(n) / total;
    value -= q * std::log(q);
  }
  return {value == 0.0 ? 0.0 : value, Orientation::kUncertainty, "cluster-entropy"};
}

std::string normalize_answer(const std::vector<std::string>& tokens) {
  std::string out;
  bool pending_space = false;
  for (const std::string& t : tokens) {
    pending_space = !out.empty();
    for (unsigned char c : t) {
      if (std::isspace(c)) {
        pending_space = !out.empty();
        continue;
      }
      if (pending_space) {
        out.push_back(' ');
        pending_space = false;
      }
      out.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  return out;
}

std::vector<int> cluster_beams(const BeamSet& beams) {
  if (beams.cluster_ids) return *beams.cluster_ids;
  std::map<std::string, int> seen;
  std::vector<int> labels;
  labels.reserve(beams.beams.size());
  for (const Beam& b : beams.beams) {
    auto [it, inserted] =
        seen.emplace(normalize_answer(b.answer_tokens), static_cast<int>(seen.size()));
    labels.push_back(it->second);
  }
  return labels;
}

}  // namespace blackbox

const std::vector<std::string>& blackbox_methods() {
  static const std::vector<std::string> kMethods = {
      "seq-prob",         "lnc",          "entropy",
      "semantic-entropy", "semantic-entropy-printed", "cluster-entropy",
      "first-token",      "self-eval"};
  return kMethods;
}

UEScore score_blackbox(std::string_view method, const GenerationRecord& r) {
  using namespace blackbox;
  if (method == "seq-prob") return seq_prob(r);
  if (method == "lnc") return lnc(r);
  if (method == "entropy") return entropy(r);
  if (method == "semantic-entropy") return semantic_entropy(r);
  if (method == "semantic-entropy-printed") {
    return semantic_entropy(r, SemanticEntropyForm::kAsPrinted);
  }
  if (method == "cluster-entropy") return cluster_entropy(r);
  if (method == "first-token") return first_token(r);
  if (method == "self-eval") return self_eval(r);
  throw Error(ErrorKind::kUnknownMethod, "unknown method '" + std::string(method) + "'");
}

std::vector<UEScore> score_dataset_serial(std::string_view method,
                                          const Dataset& dataset) {
  std::vector<UEScore> out;
  out.reserve(dataset.size());
  for (const auto& r : dataset.records) out.push_back(score_blackbox(method, r));
  return out;
}

std::vector<UEScore> score_dataset(std::string_view method, const Dataset& dataset) {
  // Validate the method name before entering the parallel region.
  if (std::find(blackbox_methods().begin(), blackbox_methods().end(), method) ==
      blackbox_methods().end()) {
    throw Error(ErrorKind::kUnknownMethod,
                "unknown method '" + std::string(method) + "'");
  }
  const auto n = static_cast<std::ptrdiff_t>(dataset.size());
  std::vector<UEScore> out(dataset.size());
  std::vector<std::optional<Error>> errors(dataset.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = score_blackbox(method, dataset.records[i]);
    } catch (const Error& e) {
      errors[i] = e;
    }
  }
  for (auto& e : errors) {
    if (e) throw *e;
  }
  return out;
}

}  // namespace uekit
