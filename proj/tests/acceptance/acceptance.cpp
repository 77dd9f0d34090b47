// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "primitives.hpp"
#include "uekit/blackbox.hpp"
#include "uekit/cli/commands.hpp"
#include "uekit/learn/train.hpp"
#include "uekit/metrics.hpp"
#include "uekit/synth.hpp"

using namespace uekit;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

metrics::ScoredRecordSet scored(const Dataset& d, const std::vector<double>& confidence) {
  return {confidence, labels_of(d)};
}

std::vector<double> blackbox_confidence(const std::string& method, const Dataset& d) {
  std::vector<double> out;
  for (const auto& s : score_dataset(method, d)) out.push_back(s.confidence());
  return out;
}

Dataset make(synth::PresetKind kind, std::size_t n, std::uint64_t seed, double noise = -1) {
  auto p = synth::SynthPreset::defaults(kind);
  p.n = n;
  p.seed = seed;
  if (noise >= 0) p.noise = noise;
  return synth::generate(p);
}

// ---- criteria ----

Outcome metric_oracles() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  int auroc_mismatch = 0, prr_mismatch = 0;
  for (int t = 0; t < 100; ++t) {
    metrics::ScoredRecordSet s;
    const std::size_t n = 2 + rng.below(199);
    for (std::size_t i = 0; i < n; ++i) {
      s.scores.push_back(std::round(rng.uniform() * 30) / 30);
      s.labels.push_back(static_cast<int>(rng.below(2)));
    }
    s.labels[0] = 1;
    s.labels[n - 1] = 0;
    auroc_mismatch += metrics::auroc(s) != oracle::auroc(s.scores, s.labels);
  }
  for (int t = 0; t < 100; ++t) {
    metrics::ScoredRecordSet s;
    const std::size_t n = 2 + rng.below(49);
    for (std::size_t i = 0; i < n; ++i) {
      s.scores.push_back(std::round(rng.uniform() * 10) / 10);
      s.labels.push_back(static_cast<int>(rng.below(2)));
    }
    s.labels[0] = 1;
    s.labels[n - 1] = 0;
    const auto curve = metrics::rejection_curve(s);
    const auto ref = oracle::rejection_accuracies(s.scores, s.labels);
    bool same = curve.size() == ref.size();
    for (std::size_t j = 0; same && j < ref.size(); ++j) same = curve[j].accuracy == ref[j];
    same = same && metrics::prr(s) == oracle::prr(s.scores, s.labels);
    prr_mismatch += !same;
  }
  const double secs = seconds_since(t0);
  return {auroc_mismatch == 0 && prr_mismatch == 0 && secs < 10,
          fmt("auroc mismatches %d/100, prr mismatches %d/100, %.2f s (limit 10 s)",
              auroc_mismatch, prr_mismatch, secs)};
}

Outcome prr_endpoints() {
  Rng rng(7);
  metrics::ScoredRecordSet oracle_set;
  for (int i = 0; i < 1000; ++i) oracle_set.labels.push_back(rng.bernoulli(0.6));
  oracle_set.scores.assign(oracle_set.labels.begin(), oracle_set.labels.end());
  const double oracle_prr = metrics::prr(oracle_set);
  double total = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng r(100 + seed);
    metrics::ScoredRecordSet s;
    for (int i = 0; i < 1000; ++i) {
      s.scores.push_back(r.uniform());
      s.labels.push_back(r.bernoulli(0.6));
    }
    total += metrics::prr(s);
  }
  const double mean = total / 50;
  return {oracle_prr == 1.0 && std::abs(mean) <= 0.05,
          fmt("oracle PRR %.17g (want exactly 1), random PRR mean over 50 seeds %.4f (want |.| <= 0.05)",
              oracle_prr, mean)};
}

Outcome formula_spot_checks() {
  GenerationRecord r;
  r.id = "r";
  r.question_tokens = {"q"};
  r.answer_tokens = {"a", "b", "c"};
  r.token_probs = {0.9, 0.4, 0.7};
  const double lnc = blackbox::lnc(r).value;
  r.beams = BeamSet{{{{"x"}, {0.5}}, {{"y"}, {0.25}}}, {}};
  const double ent = blackbox::entropy(r).value;
  r.beams = BeamSet{{{{"a"}, {0.5}}, {{"a"}, {0.5}}, {{"a"}, {0.5}}, {{"b"}, {0.5}}}, {}};
  const double ce = blackbox::cluster_entropy(r).value;
  const double p = metrics::prr({{0.9, 0.4, 0.8, 0.1}, {1, 1, 0, 0}});
  const bool ok = std::abs(lnc - 0.6316) <= 1e-4 && std::abs(ent - 1.0397) <= 1e-4 &&
                  std::abs(ce - 0.5623) <= 1e-4 && std::abs(p - 0.5714) <= 1e-4;
  return {ok, fmt("lnc %.6f (0.6316), entropy %.6f (1.0397), cluster_entropy %.6f (0.5623), "
                  "prr %.6f (0.5714), tol 1e-4",
                  lnc, ent, ce, p)};
}

Outcome gradient_integrity() {
  const auto t0 = Clock::now();
  double worst_prim = 0;
  std::string worst_name;
  for (const auto& prim : primitives::all()) {
    const double e = primitives::check(prim, 20);
    if (e > worst_prim) {
      worst_prim = e;
      worst_name = prim.name;
    }
  }
  learn::ScorerSpec spec;
  spec.kind = learn::ScorerKind::kHarmony;
  spec.vocab_size = 64;
  spec.d_model = 16;
  spec.layers = 1;
  spec.heads = 2;
  spec.d_ff = 32;
  spec.max_len = 12;
  spec.hidden_width = 4;
  spec.dropout = 0.0;
  double worst_model = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const learn::Scorer s(spec, 500 + seed, false);
    Rng rng(600 + seed);
    const auto r = oracle::make_record("g", 1 + rng.below(3), 1 + rng.below(3), 4, rng);
    const PaddedView v = s.prepare(r);
    auto loss = [&] { return tensor::bce_with_logits(s.forward_logit(v), r.correctness); };
    worst_model = std::max(worst_model, oracle::fd_relative_error(s.parameter_list(), loss));
  }
  const double secs = seconds_since(t0);
  return {worst_prim < 1e-4 && worst_model < 1e-4 && secs < 60,
          fmt("%zu primitives x 20 seeds worst rel err %.2e (%s); tiny HARMONY all parameters x 20 "
              "seeds worst %.2e; limit 1e-4; %.1f s (limit 60 s)",
              primitives::all().size(), worst_prim, worst_name.c_str(), worst_model, secs)};
}

Outcome fusion_ordering() {
  const auto t0 = Clock::now();
  const Dataset calib = make(synth::PresetKind::kFusedSignal, 8000, 41, 0.05);
  const Dataset test = make(synth::PresetKind::kFusedSignal, 2000, 42, 0.05);
  auto [train_set, val_set] = split(calib, {0.8, 43});
  learn::TrainConfig config;
  config.lr = 5e-4;
  config.seed = 44;
  std::map<std::string, double> auroc;
  std::string timing;
  for (auto kind : {learn::ScorerKind::kTextOnly, learn::ScorerKind::kLars, learn::ScorerKind::kMsf,
                    learn::ScorerKind::kHarmony}) {
    const auto t = Clock::now();
    learn::ScorerSpec spec;
    spec.kind = kind;
    const auto result = learn::train(spec, train_set, val_set, config);
    const auto scores = learn::score_all(result.checkpoint.scorer(), test);
    const std::string name(learn::kind_name(kind));
    auroc[name] = metrics::auroc(scored(test, scores));
    timing += fmt(" %s %.0fs/%zu steps;", name.c_str(), seconds_since(t), result.steps_run);
  }
  const double secs = seconds_since(t0);
  const double best_single = std::max(auroc["lars"], auroc["msf"]);
  const bool ok = auroc["text-only"] < auroc["lars"] && auroc["text-only"] < auroc["msf"] &&
                  auroc["harmony"] >= best_single + 0.02 && secs < 1800;
  return {ok, fmt("test AUROC text-only %.4f, lars %.4f, msf %.4f, harmony %.4f (margin %.4f, need "
                  ">= 0.02); total %.0f s (limit 1800 s);",
                  auroc["text-only"], auroc["lars"], auroc["msf"], auroc["harmony"],
                  auroc["harmony"] - best_single, secs) +
                  timing};
}

Outcome length_bias() {
  const Dataset d = make(synth::PresetKind::kLengthBias, 5000, 51);
  const double lnc = metrics::auroc(scored(d, blackbox_confidence("lnc", d)));
  const double sp = metrics::auroc(scored(d, blackbox_confidence("seq-prob", d)));
  return {lnc >= sp + 0.05, fmt("AUROC lnc %.4f vs seq-prob %.4f (gap %.4f, need >= 0.05), n = 5000",
                                lnc, sp, lnc - sp)};
}

Outcome language_prior() {
  auto preset = synth::SynthPreset::defaults(synth::PresetKind::kLanguagePrior);
  preset.n = 4000;
  preset.seed = 61;
  const Dataset calib = synth::generate(preset);
  preset.n = 2000;
  preset.seed = 62;
  const Dataset test = synth::generate(preset);
  std::vector<double> bayes;
  for (const auto& r : test.records) bayes.push_back(synth::language_prior_posterior(r.token_probs, preset));
  const double bayes_auroc = metrics::auroc(scored(test, bayes));
  auto [train_set, val_set] = split(calib, {0.8, 63});
  learn::TrainConfig config;
  config.lr = 5e-4;
  config.seed = 64;
  learn::ScorerSpec spec;
  spec.kind = learn::ScorerKind::kMsf;
  const auto result = learn::train(spec, train_set, val_set, config);
  const double msf = metrics::auroc(scored(test, learn::score_all(result.checkpoint.scorer(), test)));
  return {msf >= bayes_auroc + 0.1,
          fmt("msf test AUROC %.4f vs prob-only Bayes-optimal %.4f (gap %.4f, need >= 0.1)", msf,
              bayes_auroc, msf - bayes_auroc)};
}

Outcome selective_prediction() {
  double worst_ratio = 1e9;
  std::string worst;
  int er_fail = 0, monotone_fail = 0, cases = 0;
  double ratio_sum = 0, min_optimal = 1e9;
  for (auto kind : {synth::PresetKind::kNoiseFree, synth::PresetKind::kLengthBias,
                    synth::PresetKind::kLanguagePrior}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Dataset d = make(kind, 4000, 700 + seed);
      auto [val, test] = split(d, {0.5, seed});
      const auto val_set = scored(val, blackbox_confidence("lnc", val));
      const auto test_set = scored(test, blackbox_confidence("lnc", test));
      const double gamma = metrics::calibrate_threshold(val_set).gamma;
      const double er = metrics::effective_reliability(test_set, gamma);
      const double optimal = metrics::calibrate_threshold(test_set).val_er;
      ++cases;
      const double ratio = optimal > 0 ? er / optimal : 1.0;
      ratio_sum += ratio;
      min_optimal = std::min(min_optimal, optimal);
      if (er < 0.9 * optimal) ++er_fail;
      if (ratio < worst_ratio) {
        worst_ratio = ratio;
        worst = fmt("%s seed %llu", std::string(synth::preset_name(kind)).c_str(),
                    static_cast<unsigned long long>(seed));
      }
      for (const auto* set : {&val_set, &test_set}) {
        double prev = -1;
        for (int level = 0; level <= 100; ++level) {
          const double c = metrics::coverage_at_risk(*set, level / 100.0);
          if (c < prev) ++monotone_fail;
          prev = c;
        }
      }
    }
  }
  return {er_fail == 0 && monotone_fail == 0,
          fmt("%d preset x seed cases (n = 4000 split 2000/2000, lnc): ER(gamma*) < 0.9 x optimal "
              "in %d; worst ratio %.4f (%s); mean ratio %.4f; smallest optimal ER %.4f; "
              "coverage@risk decreases in %d sets",
              cases, er_fail, worst_ratio, worst.c_str(), ratio_sum / cases, min_optimal,
              monotone_fail)};
}

Outcome training_protocol() {
  auto p = synth::SynthPreset::defaults(synth::PresetKind::kNoiseFree);
  p.n = 100;
  p.seed = 81;
  p.hidden_width = 8;
  auto [tr, va] = split(synth::generate(p), {0.8, 82});
  learn::ScorerSpec spec;
  spec.kind = learn::ScorerKind::kLars;
  spec.d_model = 16;
  spec.layers = 1;
  spec.heads = 2;
  spec.d_ff = 32;
  spec.max_len = 16;
  std::string detail;
  bool ok = true;
  for (std::size_t patience : {1u, 2u, 5u}) {
    learn::TrainConfig c;
    c.lr = 0.0;
    c.batch_size = 4;
    c.epochs = 10;
    c.patience = patience;
    c.eval_interval = 1;
    const auto r = learn::train(spec, tr, va, c);
    ok = ok && r.early_stopped && r.steps_run == 1 + patience && r.checkpoint.best_step == 1;
    detail += fmt("flat loss patience %zu -> stopped at step %zu; ", patience, r.steps_run);
  }
  const std::vector<double> seq = {0.50, 0.61, 0.58, 0.74, 0.74, 0.70, 0.73, 0.69, 0.95};
  std::vector<std::vector<std::pair<std::string, tensor::Tensor>>> snaps;
  learn::TrainConfig c;
  c.lr = 1e-3;
  c.batch_size = 4;
  c.epochs = 1;
  c.patience = 4;
  c.eval_interval = 1;
  const auto r = learn::train(spec, tr, va, c, [&](const learn::Scorer& m, std::size_t step) {
    snaps.push_back(m.snapshot());
    return seq.at(step - 1);
  });
  const bool picked = r.checkpoint.best_step == 4 && r.checkpoint.best_val_auroc == 0.74 &&
                      r.steps_run == 8 && r.checkpoint.params == learn::round_to_float32(snaps.at(3));
  ok = ok && picked;
  detail += fmt("injected sequence -> best step %zu (want 4), auroc %.2f, stopped at %zu (want 8), "
                "params %s step-4 snapshot",
                r.checkpoint.best_step, r.checkpoint.best_val_auroc, r.steps_run,
                r.checkpoint.params == learn::round_to_float32(snaps.at(3)) ? "match" : "differ from");
  return {ok, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the whole CLI pipeline in `work` and returns every non-SVG artifact.
std::map<std::string, std::string> run_pipeline(const fs::path& work) {
  fs::remove_all(work);
  fs::create_directories(work);
  auto p = [&](const std::string& name) { return (work / name).string(); };
  const std::vector<std::vector<std::string>> steps = {
      {"synth", "--preset", "fused-signal", "--n", "600", "--seed", "3", "--hidden-width", "16",
       "--encoding", "b64", "--out", p("all.jsonl")},
      {"ingest", "--in", p("all.jsonl"), "--train-out", p("calib.jsonl"), "--test-out",
       p("test.jsonl"), "--seed", "4"},
      {"ingest", "--in", p("calib.jsonl"), "--train-out", p("fit.jsonl"), "--test-out",
       p("val.jsonl"), "--seed", "5"},
      {"train", "--scorer", "harmony", "--calib", p("fit.jsonl"), "--d-model", "16", "--layers",
       "1", "--heads", "2", "--d-ff", "32", "--max-len", "32", "--epochs", "2", "--eval-interval",
       "5", "--lr", "5e-4", "--seed", "6", "--out", p("harmony.ckpt")},
      {"score", "--in", p("val.jsonl"), "--method", "lnc,entropy",
       "--method", "checkpoint:" + p("harmony.ckpt"), "--out", p("val.csv")},
      {"score", "--in", p("test.jsonl"), "--method", "lnc,entropy",
       "--method", "checkpoint:" + p("harmony.ckpt"), "--out", p("test.csv")},
  };
  std::vector<std::vector<std::string>> all = steps;
  for (const std::string m : {"lnc", "entropy", "harmony"}) {
    all.push_back({"calibrate", "--scores", p("val.csv"), "--labels-from", p("val.jsonl"),
                   "--method", m, "--out", p(m + ".thr.json")});
    all.push_back({"eval", "--scores", p("test.csv"), "--labels-from", p("test.jsonl"), "--method",
                   m, "--threshold", p(m + ".thr.json"), "--out", p(m + ".report.json"),
                   "--curve-out", p(m + ".curve.csv"), "--svg", p(m + ".svg")});
  }
  all.push_back({"report", "--reports", p("lnc.report.json"), p("entropy.report.json"),
                 p("harmony.report.json"), "--out", p("table.csv")});
  for (const auto& args : all) {
    std::ostringstream out, err;
    if (cli::run(args, out, err) != 0) throw std::runtime_error(args[0] + " failed: " + err.str());
  }
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(work)) {
    if (e.path().extension() != ".svg") files[e.path().filename().string()] = slurp(e.path());
  }
  return files;
}

Outcome determinism() {
  const fs::path work = fs::temp_directory_path() / "uekit_acceptance_pipeline";
  const auto first = run_pipeline(work);
  const auto second = run_pipeline(work);
  const auto third = run_pipeline(work);
  int differing = 0;
  std::string names;
  for (const auto& [name, bytes] : first) {
    const bool same = second.count(name) && third.count(name) && second.at(name) == bytes &&
                      third.at(name) == bytes;
    if (!same) {
      ++differing;
      names += " " + name;
    }
  }
  fs::remove_all(work);
  return {differing == 0 && first.size() == second.size() && first.size() == third.size(),
          fmt("%zu CSV/JSON/JSONL/checkpoint artifacts across 3 identical pipeline runs, %d differ%s",
              first.size(), differing, names.c_str())};
}

}  // namespace

int main() {
  report("metric-oracles", metric_oracles);
  report("prr-endpoints", prr_endpoints);
  report("formula-spot-checks", formula_spot_checks);
  report("gradient-integrity", gradient_integrity);
  report("length-bias", length_bias);
  report("language-prior", language_prior);
  report("selective-prediction", selective_prediction);
  report("training-protocol", training_protocol);
  report("determinism", determinism);
  report("fusion-ordering", fusion_ordering);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
