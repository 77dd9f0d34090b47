#include "uekit/learn/scorer.hpp"

#include <cmath>
#include <optional>

#include "uekit/error.hpp"
#include "uekit/rng.hpp"
#include "uekit/tensor/init.hpp"

namespace uekit::learn {

using namespace tensor;

namespace {

constexpr double kLayerNormEps = 1e-12;
constexpr double kMaskedLogit = -1e30;

enum Segment : std::uint32_t { kQuestionSegment = 0, kAnswerSegment = 1, kHiddenSegment = 2 };

Var affine_norm(const Var& x, const Var& gamma, const Var& beta) {
  const std::size_t m = x->value.rows;
  return add(mul(layer_norm(x, 1, kLayerNormEps), expand_rows(gamma, m)),
             expand_rows(beta, m));
}

Var maybe_dropout(const Var& x, const ForwardOptions& opts, double rate) {
  if (!opts.training || rate <= 0.0) return x;
  if (opts.rng == nullptr) {
    throw Error(ErrorKind::kUsage, "training forward with dropout requires an rng");
  }
  return dropout(x, rate, *opts.rng);
}

std::string layer_prefix(std::size_t l) { return "encoder." + std::to_string(l) + "."; }

}  // namespace

std::string_view kind_name(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::kHarmony: return "harmony";
    case ScorerKind::kLars: return "lars";
    case ScorerKind::kMsf: return "msf";
    case ScorerKind::kTextOnly: return "text-only";
  }
  return "unknown";
}

ScorerKind parse_kind(std::string_view name) {
  if (name == "harmony") return ScorerKind::kHarmony;
  if (name == "lars") return ScorerKind::kLars;
  if (name == "msf") return ScorerKind::kMsf;
  if (name == "text-only") return ScorerKind::kTextOnly;
  throw Error(ErrorKind::kUnknownMethod, "unknown scorer kind '" + std::string(name) + "'");
}

std::size_t ScorerSpec::sequence_len() const {
  return 1 + max_len + (kind == ScorerKind::kHarmony ? max_len : 0);
}

void ScorerSpec::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorKind::kUsage, "scorer spec: " + why); };
  if (vocab_size < 2) fail("vocab_size must be >= 2");
  if (max_len < 2) fail("max_len must be >= 2");
  if (uses_hidden() && hidden_width == 0) fail("hidden_width must be positive");
  if (dropout < 0.0 || dropout >= 1.0) fail("dropout must be in [0, 1)");
  if (kind == ScorerKind::kMsf) {
    if (msf_widths.empty()) fail("msf_widths must be non-empty");
    for (std::size_t w : msf_widths) {
      if (w == 0) fail("msf widths must be positive");
    }
    return;
  }
  if (d_model == 0 || layers == 0 || heads == 0 || d_ff == 0) {
    fail("d_model, layers, heads, d_ff must be positive");
  }
  if (d_model % heads != 0) fail("d_model must be divisible by heads");
  if (uses_probs()) ProbBinEmbedder{prob_bins, d_model}.validate();
}

nlohmann::ordered_json ScorerSpec::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = kind_name(kind);
  j["vocab_size"] = vocab_size;
  j["vocab_salt"] = vocab_salt;
  j["d_model"] = d_model;
  j["layers"] = layers;
  j["heads"] = heads;
  j["d_ff"] = d_ff;
  j["max_len"] = max_len;
  j["hidden_width"] = hidden_width;
  j["prob_bins"] = prob_bins;
  j["dropout"] = dropout;
  j["msf_widths"] = msf_widths;
  return j;
}

ScorerSpec ScorerSpec::from_json(const nlohmann::json& j) {
  ScorerSpec s;
  try {
    s.kind = parse_kind(j.at("kind").get<std::string>());
    s.vocab_size = j.value("vocab_size", s.vocab_size);
    s.vocab_salt = j.value("vocab_salt", s.vocab_salt);
    s.d_model = j.value("d_model", s.d_model);
    s.layers = j.value("layers", s.layers);
    s.heads = j.value("heads", s.heads);
    s.d_ff = j.value("d_ff", s.d_ff);
    s.max_len = j.value("max_len", s.max_len);
    s.hidden_width = j.value("hidden_width", s.hidden_width);
    s.prob_bins = j.value("prob_bins", s.prob_bins);
    s.dropout = j.value("dropout", s.dropout);
    s.msf_widths = j.value("msf_widths", s.msf_widths);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kMalformedInput, std::string("scorer spec: ") + e.what());
  }
  s.validate();
  return s;
}

void Scorer::add_param(const std::string& name, Tensor value) {
  params_.emplace(name, parameter(std::move(value)));
}

Scorer::Scorer(ScorerSpec spec, std::uint64_t seed, bool zero_head)
    : spec_(std::move(spec)), bins_{spec_.prob_bins, spec_.d_model} {
  spec_.validate();
  Rng rng(seed);
  const auto xavier = [&](std::size_t r, std::size_t c) {
    return init_params(r, c, InitScheme::kXavierUniform, rng);
  };
  const std::size_t d = spec_.d_model;

  if (spec_.kind == ScorerKind::kMsf) {
    std::size_t in = 2 * spec_.hidden_width;
    for (std::size_t i = 0; i < spec_.msf_widths.size(); ++i) {
      const std::string prefix = "msf." + std::to_string(i) + ".";
      add_param(prefix + "weight", xavier(in, spec_.msf_widths[i]));
      add_param(prefix + "bias", Tensor(1, spec_.msf_widths[i]));
      in = spec_.msf_widths[i];
    }
    add_param("msf.out.weight", zero_head ? Tensor(in, 1) : xavier(in, 1));
    add_param("msf.out.bias", Tensor(1, 1));
    return;
  }

  add_param("embed.token", xavier(spec_.vocab_size, d));
  add_param("embed.position", xavier(spec_.sequence_len(), d));
  add_param("embed.segment", xavier(3, d));
  add_param("embed.cls", xavier(1, d));
  add_param("embed.ln.gamma", Tensor(1, d, 1.0));
  add_param("embed.ln.beta", Tensor(1, d));
  if (spec_.uses_hidden()) {
    add_param("embed.hidden_proj.weight", xavier(spec_.hidden_width, d));
    add_param("embed.hidden_proj.bias", Tensor(1, d));
  }
  for (std::size_t l = 0; l < spec_.layers; ++l) {
    const std::string pre = layer_prefix(l);
    for (const char* m : {"wq", "wk", "wv", "wo"}) {
      add_param(pre + "attn." + m, xavier(d, d));
      add_param(pre + "attn.b" + std::string(m).substr(1), Tensor(1, d));
    }
    add_param(pre + "ln1.gamma", Tensor(1, d, 1.0));
    add_param(pre + "ln1.beta", Tensor(1, d));
    add_param(pre + "ffn.w1", xavier(d, spec_.d_ff));
    add_param(pre + "ffn.b1", Tensor(1, spec_.d_ff));
    add_param(pre + "ffn.w2", xavier(spec_.d_ff, d));
    add_param(pre + "ffn.b2", Tensor(1, d));
    add_param(pre + "ln2.gamma", Tensor(1, d, 1.0));
    add_param(pre + "ln2.beta", Tensor(1, d));
  }
  add_param("head.weight", zero_head ? Tensor(d, 1) : xavier(d, 1));
  add_param("head.bias", Tensor(1, 1));
}

Scorer::Scorer(ScorerSpec spec, const std::vector<std::pair<std::string, Tensor>>& params)
    : Scorer(std::move(spec), 0) {
  load(params);
}

void Scorer::load(const std::vector<std::pair<std::string, Tensor>>& params) {
  if (params.size() != params_.size()) {
    throw Error(ErrorKind::kCheckpoint, "checkpoint has " + std::to_string(params.size()) +
                                            " tensors, scorer expects " +
                                            std::to_string(params_.size()));
  }
  for (const auto& [name, t] : params) {
    auto it = params_.find(name);
    if (it == params_.end()) {
      throw Error(ErrorKind::kCheckpoint, "unexpected tensor '" + name + "'");
    }
    if (!it->second->value.same_shape(t)) {
      throw Error(ErrorKind::kCheckpoint, "tensor '" + name + "' has shape " + shape_str(t) +
                                              ", expected " + shape_str(it->second->value));
    }
    it->second->value = t;
  }
}

std::vector<Var> Scorer::parameter_list() const {
  std::vector<Var> out;
  out.reserve(params_.size());
  for (const auto& [name, v] : params_) out.push_back(v);
  return out;
}

std::vector<std::pair<std::string, Tensor>> Scorer::snapshot() const {
  std::vector<std::pair<std::string, Tensor>> out;
  out.reserve(params_.size());
  for (const auto& [name, v] : params_) out.emplace_back(name, v->value);
  return out;
}

Var Scorer::p(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error(ErrorKind::kDomain, "no parameter '" + name + "'");
  return it->second;
}

void Scorer::check_channels(const GenerationRecord& r) const {
  if (!spec_.uses_hidden()) return;
  if (!r.hidden_states) {
    throw Error(ErrorKind::kMissingChannel, "record '" + r.id + "': scorer kind '" +
                                                std::string(kind_name(spec_.kind)) +
                                                "' requires hidden_states");
  }
  if (r.hidden_states->cols != spec_.hidden_width) {
    throw Error(ErrorKind::kMissingChannel,
                "record '" + r.id + "': hidden width " + std::to_string(r.hidden_states->cols) +
                    " does not match scorer hidden width " + std::to_string(spec_.hidden_width));
  }
}

PaddedView Scorer::prepare(const GenerationRecord& record) const {
  check_channels(record);
  if (!spec_.uses_hidden() && record.hidden_states) {
    GenerationRecord stripped = record;
    stripped.hidden_states.reset();
    return pad_or_truncate(stripped, spec_.padding(), spec_.vocab());
  }
  return pad_or_truncate(record, spec_.padding(), spec_.vocab());
}

Var Scorer::project_hidden(const PaddedView& view) const {
  return project_rows(view, view.real_len());
}

Var Scorer::project_rows(const PaddedView& view, std::size_t rows) const {
  if (!view.has_hidden()) {
    throw Error(ErrorKind::kMissingChannel, "hidden states required for projection");
  }
  Tensor h(rows, view.hidden_width);
  for (std::size_t i = 0; i < rows * view.hidden_width; ++i) {
    h.data[i] = static_cast<double>(view.hidden[i]);
  }
  return linear(constant(std::move(h)), p("embed.hidden_proj.weight"),
                p("embed.hidden_proj.bias"));
}

EmbeddedInput Scorer::build_input(const PaddedView& view, const ForwardOptions& opts) const {
  if (spec_.kind == ScorerKind::kMsf) {
    throw Error(ErrorKind::kUsage, "msf scorers do not use the sequence encoder");
  }
  if (view.max_len != spec_.max_len) {
    throw Error(ErrorKind::kDomain, "padded view length does not match scorer max_len");
  }
  const bool compact = opts.mode == ExecMode::kCompact;
  const std::size_t text_len = compact ? view.real_len() : spec_.max_len;
  const bool with_hidden = spec_.uses_hidden();
  if (with_hidden && !view.has_hidden()) {
    throw Error(ErrorKind::kMissingChannel, "scorer requires hidden states");
  }

  EmbeddedInput in;
  std::vector<std::uint32_t> slots, segments;
  const auto push = [&](std::size_t slot, std::uint32_t seg, bool real) {
    slots.push_back(static_cast<std::uint32_t>(slot));
    segments.push_back(seg);
    in.slots.push_back(slot);
    in.mask.push_back(real ? 1 : 0);
  };
  push(0, kQuestionSegment, true);
  for (std::size_t i = 0; i < text_len; ++i) {
    const bool question = i < view.question_len;
    push(1 + i, question ? kQuestionSegment : kAnswerSegment, view.mask[i] != 0);
  }
  if (with_hidden) {
    for (std::size_t i = 0; i < text_len; ++i) {
      push(1 + spec_.max_len + i, kHiddenSegment, view.mask[i] != 0);
    }
  }

  std::vector<Var> parts;
  parts.push_back(p("embed.cls"));
  Var text = embedding_lookup(
      p("embed.token"), std::span<const std::uint32_t>(view.token_ids.data(), text_len));
  if (spec_.uses_probs()) {
    Tensor prob_rows(text_len, spec_.d_model);
    for (std::size_t i = 0; i < text_len; ++i) {
      if (!view.is_answer(i)) continue;  // question and padding: bin 0
      const std::vector<double> e = bins_.embed(view.probs[i]);
      std::copy(e.begin(), e.end(), prob_rows.row(i));
    }
    text = add(text, constant(std::move(prob_rows)));
  }
  parts.push_back(text);
  if (with_hidden) parts.push_back(project_rows(view, text_len));

  Var x = concat(parts, 0);
  x = add(x, embedding_lookup(p("embed.position"), slots));
  x = add(x, embedding_lookup(p("embed.segment"), segments));
  x = affine_norm(x, p("embed.ln.gamma"), p("embed.ln.beta"));
  in.sequence = maybe_dropout(x, opts, spec_.dropout);
  return in;
}

Var Scorer::encoder(Var x, const std::vector<std::uint8_t>& mask,
                    const ForwardOptions& opts) const {
  const std::size_t s = x->value.rows;
  const std::size_t d = spec_.d_model;
  const std::size_t dh = d / spec_.heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

  Var mask_bias;
  if (opts.mode == ExecMode::kPaddedMasked) {
    Tensor bias(s, s);
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = 0; j < s; ++j) bias(i, j) = mask[j] ? 0.0 : kMaskedLogit;
    }
    mask_bias = constant(std::move(bias));
  }

  for (std::size_t l = 0; l < spec_.layers; ++l) {
    const std::string pre = layer_prefix(l);
    Var q = linear(x, p(pre + "attn.wq"), p(pre + "attn.bq"));
    Var k = linear(x, p(pre + "attn.wk"), p(pre + "attn.bk"));
    Var v = linear(x, p(pre + "attn.wv"), p(pre + "attn.bv"));
    std::vector<Var> heads;
    heads.reserve(spec_.heads);
    for (std::size_t h = 0; h < spec_.heads; ++h) {
      Var qh = slice(q, 1, h * dh, (h + 1) * dh);
      Var kh = slice(k, 1, h * dh, (h + 1) * dh);
      Var vh = slice(v, 1, h * dh, (h + 1) * dh);
      Var scores = scale(matmul_nt(qh, kh), inv_sqrt);
      if (mask_bias) scores = add(scores, mask_bias);
      Var attn = maybe_dropout(softmax(scores, 1), opts, spec_.dropout);
      heads.push_back(matmul(attn, vh));
    }
    Var attn_out = linear(concat(heads, 1), p(pre + "attn.wo"), p(pre + "attn.bo"));
    attn_out = maybe_dropout(attn_out, opts, spec_.dropout);
    x = affine_norm(add(x, attn_out), p(pre + "ln1.gamma"), p(pre + "ln1.beta"));

    Var ff = linear(gelu(linear(x, p(pre + "ffn.w1"), p(pre + "ffn.b1"))), p(pre + "ffn.w2"),
                    p(pre + "ffn.b2"));
    ff = maybe_dropout(ff, opts, spec_.dropout);
    x = affine_norm(add(x, ff), p(pre + "ln2.gamma"), p(pre + "ln2.beta"));
  }
  return x;
}

std::vector<double> msf_pool(const PaddedView& view) {
  const std::size_t n = view.hidden_width;
  std::vector<double> pooled(2 * n, 0.0);
  for (std::size_t i = 0; i < view.real_len(); ++i) {
    const float* row = view.hidden_row(i);
    double* dst = pooled.data() + (view.is_answer(i) ? n : 0);
    for (std::size_t c = 0; c < n; ++c) dst[c] += static_cast<double>(row[c]);
  }
  for (std::size_t c = 0; c < n; ++c) {
    pooled[c] /= static_cast<double>(view.question_len);
    pooled[n + c] /= static_cast<double>(view.answer_len);
  }
  return pooled;
}

Var Scorer::msf_forward(const PaddedView& view, const ForwardOptions& opts) const {
  if (!view.has_hidden()) throw Error(ErrorKind::kMissingChannel, "msf requires hidden states");
  const std::vector<double> pooled = msf_pool(view);
  Var x = constant(Tensor(1, pooled.size(), pooled));
  for (std::size_t i = 0; i < spec_.msf_widths.size(); ++i) {
    const std::string prefix = "msf." + std::to_string(i) + ".";
    x = gelu(linear(x, p(prefix + "weight"), p(prefix + "bias")));
    x = maybe_dropout(x, opts, spec_.dropout);
  }
  return linear(x, p("msf.out.weight"), p("msf.out.bias"));
}

Var Scorer::forward_logit(const PaddedView& view, const ForwardOptions& opts) const {
  if (spec_.kind == ScorerKind::kMsf) return msf_forward(view, opts);
  EmbeddedInput in = build_input(view, opts);
  Var x = encoder(in.sequence, in.mask, opts);
  Var cls = slice(x, 0, 0, 1);
  return linear(cls, p("head.weight"), p("head.bias"));
}

double Scorer::score(const GenerationRecord& record) const {
  NoGradGuard no_grad;
  const PaddedView view = prepare(record);
  return sigmoid(forward_logit(view)->value.item());
}

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

double bce_loss_from_logit(double logit, int label) {
  return std::max(logit, 0.0) - logit * label + std::log1p(std::exp(-std::abs(logit)));
}

std::vector<double> score_all_serial(const Scorer& scorer, const Dataset& dataset) {
  std::vector<double> out;
  out.reserve(dataset.size());
  for (const auto& r : dataset.records) out.push_back(scorer.score(r));
  return out;
}

std::vector<double> score_all(const Scorer& scorer, const Dataset& dataset) {
  for (const auto& r : dataset.records) scorer.check_channels(r);
  std::vector<double> out(dataset.size());
  std::vector<std::optional<Error>> errors(dataset.size());
  const auto n = static_cast<std::ptrdiff_t>(dataset.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = scorer.score(dataset.records[i]);
    } catch (const Error& e) {
      errors[i] = e;
    }
  }
  for (auto& e : errors) {
    if (e) throw *e;
  }
  return out;
}

}  // namespace uekit::learn
