#include "uekit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "uekit/error.hpp"
#include "uekit/rng.hpp"

namespace uekit::synth {

namespace {

constexpr std::uint64_t kGlobalStream = 1ULL << 40;
// The grounding direction is a property of the simulated generator, shared by
// every sample drawn from it, so it ignores the preset seed.
constexpr std::uint64_t kDirectionSeed = 0x5EED0D1CULL;

struct Template {
  std::string category;
  std::vector<std::string> words;  // "{obj}" is replaced by an object noun
  std::vector<std::string> answers;
  double p_confident;  // P(probability predicate holds) in fused-signal
};

const std::vector<Template>& templates() {
  static const std::vector<Template> kTemplates = {
      {"color", {"what", "color", "is", "the", "{obj}"}, {"red", "blue", "green", "white"}, 0.85},
      {"count", {"how", "many", "{obj}", "are", "there"}, {"two", "three", "four", "five"}, 0.55},
      {"yesno", {"is", "there", "a", "{obj}"}, {"yes", "no"}, 0.75},
      {"object", {"what", "is", "the", "{obj}", "holding"}, {"umbrella", "phone", "ball", "cup"}, 0.65},
  };
  return kTemplates;
}

const std::vector<std::string> kObjects = {"dog", "man", "woman", "bus", "cat", "table", "child"};
const std::vector<std::string> kQuestionFiller = {"in", "the", "picture", "image", "shown", "here"};
const std::vector<std::string> kAnswerFiller = {"the", "a", "it", "is", "of", "there", "on"};

// Language-prior grids.
const std::vector<double> kHighGrid = {0.65, 0.75, 0.85, 0.95};
const std::vector<double> kLowGrid = {0.15, 0.25, 0.35, 0.45, 0.55};

template <class T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[rng.below(v.size())];
}

std::vector<double> random_unit(std::size_t n, Rng& rng) {
  std::vector<double> u(n);
  double norm = 0.0;
  for (double& x : u) {
    x = rng.normal();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (double& x : u) x /= norm;
  return u;
}

struct Draft {
  const Template* tmpl = nullptr;
  std::vector<std::string> question;
  std::vector<std::string> answer;
  std::vector<bool> significant;
};

Draft draft_text(const SynthPreset& preset, int answer_len, Rng& rng) {
  Draft d;
  d.tmpl = &pick(templates(), rng);
  const std::string& obj = pick(kObjects, rng);
  for (const std::string& w : d.tmpl->words) d.question.push_back(w == "{obj}" ? obj : w);
  const int base = static_cast<int>(d.question.size());
  const int k = rng.range(std::max(preset.k_min, base), std::max(preset.k_max, base));
  while (static_cast<int>(d.question.size()) < k) d.question.push_back(pick(kQuestionFiller, rng));

  d.answer.assign(answer_len, "");
  d.significant.assign(answer_len, false);
  const int n_sig = answer_len >= 3 ? rng.range(1, 2) : 1;
  std::vector<std::size_t> positions = rng.permutation(answer_len);
  for (int i = 0; i < n_sig; ++i) {
    d.answer[positions[i]] = pick(d.tmpl->answers, rng);
    d.significant[positions[i]] = true;
  }
  for (auto& tok : d.answer) {
    if (tok.empty()) tok = pick(kAnswerFiller, rng);
  }
  return d;
}

// Significant tokens: U(0.55, 0.99) when the predicate holds, U(0.05, 0.45)
// otherwise. Fillers: U(filler_lo, 1).
std::vector<double> predicate_probs(const Draft& d, bool holds, double filler_lo, Rng& rng) {
  std::vector<double> p(d.answer.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (d.significant[i]) {
      p[i] = holds ? rng.uniform(0.55, 0.99) : rng.uniform(0.05, 0.45);
    } else {
      p[i] = rng.uniform(filler_lo, 1.0);
      if (p[i] <= 0.0) p[i] = 1.0;
    }
  }
  return p;
}

// Question rows: isotropic noise. Answer rows: noise orthogonal to the
// grounding direction plus +/- magnitude along it, so the grounding sign is
// exactly recoverable by a linear probe.
HiddenStates make_hidden(std::size_t k, std::size_t l, bool grounded,
                         const std::vector<double>& u, double signal, Rng& rng) {
  const std::size_t n = u.size();
  HiddenStates h;
  h.rows = k + l;
  h.cols = n;
  h.data.resize(h.rows * n);
  std::vector<double> z(n);
  for (std::size_t r = 0; r < h.rows; ++r) {
    for (double& x : z) x = rng.normal();
    if (r >= k) {
      double along = 0.0;
      for (std::size_t c = 0; c < n; ++c) along += z[c] * u[c];
      const double magnitude = rng.uniform(0.5 * signal, 1.5 * signal);
      const double target = grounded ? magnitude : -magnitude;
      for (std::size_t c = 0; c < n; ++c) z[c] += (target - along) * u[c];
    }
    for (std::size_t c = 0; c < n; ++c) h.data[r * n + c] = static_cast<float>(z[c]);
  }
  return h;
}

BeamSet make_beams(const Draft& d, const std::vector<double>& probs, int label,
                   std::size_t count, Rng& rng) {
  BeamSet set;
  set.beams.push_back({d.answer, probs});
  const double consistent = label ? 0.8 : 0.4;
  for (std::size_t b = 1; b < count; ++b) {
    Beam beam{d.answer, probs};
    const bool same = rng.bernoulli(consistent);
    for (std::size_t i = 0; i < beam.token_probs.size(); ++i) {
      double& p = beam.token_probs[i];
      if (!same && d.significant[i]) {
        beam.answer_tokens[i] = pick(d.tmpl->answers, rng);
        p *= rng.uniform(0.3, 0.8);
      } else {
        p *= rng.uniform(0.9, 1.0);
      }
      p = std::clamp(p, 1e-6, 1.0);
    }
    set.beams.push_back(std::move(beam));
  }
  return set;
}

std::string record_id(const SynthPreset& preset, std::size_t i) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s-s%llu-%06zu", std::string(preset_name(preset.kind)).c_str(),
                static_cast<unsigned long long>(preset.seed), i);
  return buf;
}

enum class PriorType { kConfidentRight, kConfidentWrong, kUnsureWrong };

}  // namespace

std::string_view preset_name(PresetKind kind) {
  switch (kind) {
    case PresetKind::kNoiseFree: return "noise-free";
    case PresetKind::kLengthBias: return "length-bias";
    case PresetKind::kLanguagePrior: return "language-prior";
    case PresetKind::kFusedSignal: return "fused-signal";
    case PresetKind::kHiddenSignal: return "hidden-signal";
  }
  return "unknown";
}

PresetKind parse_preset(std::string_view name) {
  for (auto k : {PresetKind::kNoiseFree, PresetKind::kLengthBias, PresetKind::kLanguagePrior,
                 PresetKind::kFusedSignal, PresetKind::kHiddenSignal}) {
    if (preset_name(k) == name) return k;
  }
  throw Error(ErrorKind::kUsage, "unknown synth preset '" + std::string(name) + "'");
}

SynthPreset SynthPreset::defaults(PresetKind kind) {
  SynthPreset p;
  p.kind = kind;
  if (kind == PresetKind::kLengthBias) {
    p.l_min = 1;
    p.l_max = 12;
  }
  if (kind == PresetKind::kFusedSignal) p.noise = 0.05;
  return p;
}

void SynthPreset::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorKind::kUsage, "synth preset: " + why); };
  if (n == 0) fail("n must be positive");
  if (k_min < 1 || k_max < k_min) fail("invalid question length range");
  if (l_min < 1 || l_max < l_min) fail("invalid answer length range");
  if (hidden_width < 2) fail("hidden_width must be >= 2");
  if (noise < 0.0 || noise > 0.5) fail("noise must be in [0, 0.5]");
  if (rho < 0.0 || rho > 1.0) fail("rho must be in [0, 1]");
  if (!(signal > 0.0)) fail("signal must be positive");
}

std::map<std::string, std::string> SynthPreset::meta() const {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  return {{"generator", "synth"},
          {"preset", std::string(preset_name(kind))},
          {"dataset", "synth-" + std::string(preset_name(kind))},
          {"layer", "synthetic"},
          {"n", std::to_string(n)},
          {"k_range", std::to_string(k_min) + "-" + std::to_string(k_max)},
          {"l_range", std::to_string(l_min) + "-" + std::to_string(l_max)},
          {"hidden_width", std::to_string(hidden_width)},
          {"noise", num(noise)},
          {"rho", num(rho)},
          {"signal", num(signal)},
          {"seed", std::to_string(seed)}};
}

const std::vector<std::string>& significant_tokens() {
  static const std::vector<std::string> kSig = [] {
    std::vector<std::string> v;
    for (const auto& t : templates()) v.insert(v.end(), t.answers.begin(), t.answers.end());
    std::sort(v.begin(), v.end());
    return v;
  }();
  return kSig;
}

bool is_significant(std::string_view token) {
  const auto& sig = significant_tokens();
  return std::binary_search(sig.begin(), sig.end(), token);
}

double significant_geo_mean(const GenerationRecord& r) {
  double s = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < r.answer_tokens.size(); ++i) {
    if (is_significant(r.answer_tokens[i])) {
      s += std::log(r.token_probs[i]);
      ++count;
    }
  }
  return count == 0 ? 1.0 : std::exp(s / count);
}

bool probability_predicate(const GenerationRecord& r) { return significant_geo_mean(r) > 0.5; }

std::vector<double> grounding_direction(const SynthPreset& preset) {
  Rng rng(derive_seed(kDirectionSeed, preset.hidden_width));
  return random_unit(preset.hidden_width, rng);
}

bool hidden_predicate(const GenerationRecord& r, const std::vector<double>& u) {
  if (!r.hidden_states) throw Error(ErrorKind::kMissingChannel, "hidden states required");
  const HiddenStates& h = *r.hidden_states;
  double s = 0.0;
  for (std::size_t row = r.question_len(); row < h.rows; ++row) {
    for (std::size_t c = 0; c < h.cols; ++c) s += static_cast<double>(h.data[row * h.cols + c]) * u[c];
  }
  return s > 0.0;
}

std::vector<GridComponent> language_prior_grid(const SynthPreset& preset) {
  const double rest = 1.0 - preset.rho;
  return {
      {"confident-right", 0.6 * rest, 1, kHighGrid, {0.25, 0.25, 0.25, 0.25}},
      {"confident-wrong", preset.rho, 0, kHighGrid, {0.1, 0.2, 0.3, 0.4}},
      {"unsure-wrong", 0.4 * rest, 0, kLowGrid, {0.2, 0.2, 0.2, 0.2, 0.2}},
  };
}

double language_prior_posterior(const std::vector<double>& probs, const SynthPreset& preset) {
  double num = 0.0, den = 0.0;
  for (const GridComponent& c : language_prior_grid(preset)) {
    double like = c.prior;
    for (double p : probs) {
      double w = 0.0;
      for (std::size_t v = 0; v < c.values.size(); ++v) {
        if (std::abs(c.values[v] - p) < 1e-12) w = c.weights[v];
      }
      like *= w;
    }
    const double p_correct = c.label ? 1.0 - preset.noise : preset.noise;
    num += like * p_correct;
    den += like;
  }
  return den > 0.0 ? num / den : 0.0;
}

Dataset generate(const SynthPreset& preset) {
  preset.validate();
  const std::vector<double> u = grounding_direction(preset);
  const std::map<std::string, std::string> meta = preset.meta();

  // Language-prior record types are assigned in exact proportions.
  std::vector<PriorType> types;
  std::vector<GridComponent> grid;
  if (preset.kind == PresetKind::kLanguagePrior) {
    grid = language_prior_grid(preset);
    const auto n_wrong = static_cast<std::size_t>(std::llround(preset.rho * preset.n));
    const auto n_right =
        static_cast<std::size_t>(std::llround(0.6 * static_cast<double>(preset.n - n_wrong)));
    Rng rng(derive_seed(preset.seed, kGlobalStream + 1));
    const std::vector<std::size_t> perm = rng.permutation(preset.n);
    types.assign(preset.n, PriorType::kUnsureWrong);
    for (std::size_t i = 0; i < preset.n; ++i) {
      if (i < n_wrong) {
        types[perm[i]] = PriorType::kConfidentWrong;
      } else if (i < n_wrong + n_right) {
        types[perm[i]] = PriorType::kConfidentRight;
      }
    }
  }

  Dataset out{meta.at("dataset"), std::vector<GenerationRecord>(preset.n)};
  const auto n = static_cast<std::ptrdiff_t>(preset.n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t idx = 0; idx < n; ++idx) {
    const auto i = static_cast<std::size_t>(idx);
    Rng rng(derive_seed(preset.seed, i));
    const int answer_len = rng.range(preset.l_min, preset.l_max);
    Draft d = draft_text(preset, answer_len, rng);
    std::vector<double> probs;
    int label = 0;
    bool grounded = false;

    switch (preset.kind) {
      case PresetKind::kNoiseFree: {
        label = rng.bernoulli(0.5) ? 1 : 0;
        probs = predicate_probs(d, label == 1, 0.85, rng);
        grounded = label == 1;
        break;
      }
      case PresetKind::kHiddenSignal: {
        label = rng.bernoulli(0.5) ? 1 : 0;
        probs.resize(d.answer.size());
        for (double& p : probs) p = rng.uniform(0.3, 1.0);
        grounded = label == 1;
        break;
      }
      case PresetKind::kLengthBias: {
        label = rng.bernoulli(0.5) ? 1 : 0;
        const double level = label ? rng.uniform(0.6, 0.95) : rng.uniform(0.35, 0.8);
        probs.resize(d.answer.size());
        for (double& p : probs) p = std::clamp(level * std::exp(0.05 * rng.normal()), 0.01, 1.0);
        grounded = label == 1;
        break;
      }
      case PresetKind::kLanguagePrior: {
        const GridComponent& c = grid[static_cast<std::size_t>(types[i])];
        probs.resize(d.answer.size());
        for (double& p : probs) p = c.values[rng.categorical(c.weights)];
        label = c.label;
        grounded = label == 1;
        break;
      }
      case PresetKind::kFusedSignal: {
        const bool prob_ok = rng.bernoulli(d.tmpl->p_confident);
        grounded = rng.bernoulli(0.7);
        probs = predicate_probs(d, prob_ok, 0.5, rng);
        label = prob_ok && grounded ? 1 : 0;
        break;
      }
    }
    if (preset.noise > 0.0 && rng.bernoulli(preset.noise)) label = 1 - label;

    GenerationRecord r;
    r.id = record_id(preset, i);
    r.image_id = "img-" + std::to_string(i);
    r.question_tokens = d.question;
    r.answer_tokens = d.answer;
    r.token_probs = probs;
    r.hidden_states = make_hidden(d.question.size(), d.answer.size(), grounded, u, preset.signal, rng);
    r.correctness = label;
    r.self_eval_conf = std::clamp(0.5 + (label ? 0.2 : -0.2) + 0.2 * rng.normal(), 0.0, 1.0);
    if (preset.beams > 0) r.beams = make_beams(d, probs, label, preset.beams, rng);
    r.meta = meta;
    r.meta["category"] = d.tmpl->category;
    out.records[i] = std::move(r);
  }
  return out;
}

}  // namespace uekit::synth
