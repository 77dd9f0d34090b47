#include "uekit/cli/commands.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "uekit/cli/config.hpp"
#include "uekit/cli/svg.hpp"
#include "uekit/error.hpp"
#include "uekit/ingest.hpp"
#include "uekit/learn/checkpoint.hpp"
#include "uekit/learn/scorer.hpp"
#include "uekit/learn/train.hpp"
#include "uekit/synth.hpp"

namespace uekit::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kExitCodes =
    "Exit codes:\n"
    "  0  success\n"
    "  2  usage error (bad or missing flags)\n"
    "  3  unknown method or scorer kind\n"
    "  4  malformed input file\n"
    "  5  missing channel (beams, hidden states, self-eval)\n"
    "  6  I/O failure\n"
    "  7  checkpoint error\n"
    "  8  domain error (metric undefined, invalid parameter)\n";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path);
}

void require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw Error(ErrorKind::kUsage, flag + " is required");
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& what) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw Error(ErrorKind::kMalformedInput, what + ": not a number '" + s + "'");
  }
  return v;
}

// Echoes the resolved configuration and its hash into a JSON artifact.
void stamp(ojson& artifact, const std::string& command, const ojson& config) {
  artifact["command"] = command;
  artifact["config"] = config;
  artifact["config_hash"] = config_hash(config);
}

// CSV artifacts carry their provenance in a `<path>.meta.json` sidecar.
void write_sidecar(const std::string& csv_path, const std::string& command,
                   const ojson& config) {
  ojson meta;
  stamp(meta, command, config);
  write_file(csv_path + ".meta.json", meta.dump(2) + "\n");
}

HiddenEncoding parse_encoding(const std::string& s) {
  if (s == "json") return HiddenEncoding::kJsonArray;
  if (s == "b64") return HiddenEncoding::kB64Float32;
  throw Error(ErrorKind::kUsage, "--encoding must be json or b64, got '" + s + "'");
}

std::string records_text(const Dataset& d, HiddenEncoding enc) {
  std::ostringstream ss;
  write_records(d, ss, enc);
  return ss.str();
}

// ---- synth ----

struct SynthArgs {
  std::string preset = "noise-free";
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  int k_min = 0, k_max = 0, l_min = 0, l_max = 0;
  std::size_t hidden_width = 0, beams = 0;
  double noise = 0, rho = 0, signal = 0;
  std::string encoding = "json";
  std::string out;
};

void cmd_synth(CLI::App& app, const SynthArgs& a, std::ostream& out) {
  require(a.out, "--out");
  synth::SynthPreset p = synth::SynthPreset::defaults(synth::parse_preset(a.preset));
  auto given = [&](const char* flag) { return app.get_option(flag)->count() > 0; };
  p.n = a.n;
  p.seed = a.seed;
  if (given("--k-min")) p.k_min = a.k_min;
  if (given("--k-max")) p.k_max = a.k_max;
  if (given("--l-min")) p.l_min = a.l_min;
  if (given("--l-max")) p.l_max = a.l_max;
  if (given("--hidden-width")) p.hidden_width = a.hidden_width;
  if (given("--beams")) p.beams = a.beams;
  if (given("--noise")) p.noise = a.noise;
  if (given("--rho")) p.rho = a.rho;
  if (given("--signal")) p.signal = a.signal;
  p.validate();
  const Dataset d = synth::generate(p);
  write_file(a.out, records_text(d, parse_encoding(a.encoding)));
  out << "wrote " << d.size() << " records to " << a.out << "\n";
}

// ---- ingest ----

struct IngestArgs {
  std::string in;
  std::string out;
  std::string encoding = "json";
  std::string train_out, test_out;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

void cmd_ingest(const IngestArgs& a, std::ostream& out) {
  require(a.in, "--in");
  const Dataset d = parse_records(fs::path(a.in));
  const HiddenEncoding enc = parse_encoding(a.encoding);
  if (!a.out.empty()) write_records(d, fs::path(a.out), enc);
  if (!a.train_out.empty() || !a.test_out.empty()) {
    require(a.train_out, "--train-out");
    require(a.test_out, "--test-out");
    auto [train, test] = split(d, SplitSpec{a.train_fraction, a.seed});
    write_file(a.train_out, records_text(train, enc));
    write_file(a.test_out, records_text(test, enc));
    out << "split " << d.size() << " records: " << train.size() << " train, " << test.size()
        << " test\n";
  }
  std::size_t with_hidden = 0, with_beams = 0, correct = 0;
  for (const auto& r : d.records) {
    with_hidden += r.hidden_states.has_value();
    with_beams += r.beams.has_value();
    correct += r.correctness;
  }
  out << d.size() << " valid records (" << correct << " correct, " << with_hidden
      << " with hidden states, " << with_beams << " with beams)\n";
}

// ---- score ----

struct ScoreArgs {
  std::vector<std::string> methods;
  std::string in;
  std::string out;
};

std::vector<ScoreRow> score_method(const std::string& method, const Dataset& d) {
  std::vector<ScoreRow> rows;
  rows.reserve(d.size());
  constexpr std::string_view kCkpt = "checkpoint:";
  if (method.rfind(kCkpt, 0) == 0) {
    const auto ckpt = learn::load_checkpoint(fs::path(method.substr(kCkpt.size())));
    const learn::Scorer scorer = ckpt.scorer();
    const std::vector<double> s = learn::score_all(scorer, d);
    const std::string name(learn::kind_name(ckpt.spec.kind));
    for (std::size_t i = 0; i < d.size(); ++i) {
      rows.push_back({d.records[i].id, name, Orientation::kConfidence, s[i]});
    }
    return rows;
  }
  const std::vector<UEScore> s = score_dataset(method, d);
  for (std::size_t i = 0; i < d.size(); ++i) {
    rows.push_back({d.records[i].id, s[i].method, s[i].orientation, s[i].value});
  }
  return rows;
}

void cmd_score(const ScoreArgs& a, const ojson& config, std::ostream& out) {
  require(a.in, "--in");
  require(a.out, "--out");
  if (a.methods.empty()) throw Error(ErrorKind::kUsage, "--method is required");
  const Dataset d = parse_records(fs::path(a.in));
  std::vector<ScoreRow> rows;
  for (const auto& m : a.methods) {
    auto part = score_method(m, d);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  write_file(a.out, scores_to_csv(rows));
  write_sidecar(a.out, "score", config);
  out << "wrote " << rows.size() << " scores to " << a.out << "\n";
}

// ---- train ----

struct TrainArgs {
  std::string scorer = "harmony";
  std::string calib;
  std::string out;
  learn::ScorerSpec spec;
  learn::TrainConfig train;
  std::size_t warmup_steps = 0;
  double train_fraction = 0.8;
  bool lr_sweep = false;
};

void cmd_train(CLI::App& app, TrainArgs a, const ojson& config, std::ostream& out,
               std::ostream& err) {
  require(a.calib, "--calib");
  require(a.out, "--out");
  a.spec.kind = learn::parse_kind(a.scorer);
  if (app.get_option("--warmup-steps")->count() > 0) a.train.warmup_steps = a.warmup_steps;
  const Dataset calib = parse_records(fs::path(a.calib));
  if (a.spec.uses_hidden()) {
    for (const auto& r : calib.records) {
      if (r.hidden_states) {
        a.spec.hidden_width = r.hidden_states->cols;
        break;
      }
    }
  }
  a.spec.validate();
  a.train.validate();
  auto [train_set, val_set] = split(calib, SplitSpec{a.train_fraction, a.train.seed});
  if (a.train.verbose) {
    err << "training " << a.scorer << " on " << train_set.size() << " records, validating on "
        << val_set.size() << "\n";
  }
  learn::TrainResult result = a.lr_sweep
                                  ? learn::train_lr_sweep(a.spec, train_set, val_set, a.train)
                                  : learn::train(a.spec, train_set, val_set, a.train);
  stamp(result.checkpoint.extra, "train", config);
  learn::save_checkpoint(result.checkpoint, fs::path(a.out));
  out << "trained " << a.scorer << ": best val AUROC " << result.checkpoint.best_val_auroc
      << " at step " << result.checkpoint.best_step << " of " << result.steps_run
      << (result.early_stopped ? " (early stop)" : "") << "; wrote " << a.out << "\n";
}

// ---- calibrate / eval ----

struct LabeledArgs {
  std::string scores;
  std::string labels_from;
  std::string method;
};

std::string pick_method(const std::vector<ScoreRow>& rows, const std::string& requested) {
  if (!requested.empty()) return requested;
  std::vector<std::string> seen;
  for (const auto& r : rows) {
    if (std::find(seen.begin(), seen.end(), r.method) == seen.end()) seen.push_back(r.method);
  }
  if (seen.size() != 1) {
    throw Error(ErrorKind::kUsage, "scores file holds " + std::to_string(seen.size()) +
                                       " methods; pass --method");
  }
  return seen.front();
}

metrics::ScoredRecordSet load_labeled(const LabeledArgs& a, std::string& method,
                                      std::string& dataset_name) {
  require(a.scores, "--scores");
  require(a.labels_from, "--labels-from");
  const auto rows = scores_from_csv(read_file(a.scores));
  const Dataset labels = parse_records(fs::path(a.labels_from));
  method = pick_method(rows, a.method);
  dataset_name = labels.name;
  return join_labels(rows, method, labels);
}

struct CalibrateArgs {
  LabeledArgs in;
  double cost = 1.0;
  std::string out;
};

void cmd_calibrate(const CalibrateArgs& a, const ojson& config, std::ostream& out) {
  require(a.out, "--out");
  std::string method, dataset;
  const auto set = load_labeled(a.in, method, dataset);
  const metrics::Calibration c = metrics::calibrate_threshold(set, a.cost);
  ojson j;
  j["gamma"] = c.gamma;
  j["val_er"] = c.val_er;
  j["method"] = method;
  j["dataset"] = dataset;
  j["n"] = set.size();
  j["cost"] = a.cost;
  stamp(j, "calibrate", config);
  write_file(a.out, j.dump(2) + "\n");
  out << method << ": gamma " << fmt17(c.gamma) << ", validation ER " << c.val_er << "\n";
}

struct EvalArgs {
  LabeledArgs in;
  std::string threshold;
  std::vector<double> risk_levels = {0.10, 0.20};
  double cost = 1.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string curve_out;
  std::string svg;
};

double resolve_threshold(const std::string& t) {
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (!t.empty() && end == t.c_str() + t.size()) return v;
  try {
    const auto j = nlohmann::json::parse(read_file(t));
    return j.at("gamma").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kMalformedInput, "threshold file " + t + ": " + e.what());
  }
}

void cmd_eval(const EvalArgs& a, const ojson& config, std::ostream& out) {
  require(a.out, "--out");
  require(a.threshold, "--threshold");
  std::string method, dataset;
  const auto set = load_labeled(a.in, method, dataset);
  metrics::EvalReport r =
      metrics::evaluate(set, resolve_threshold(a.threshold), a.risk_levels, a.cost);
  r.method = method;
  r.dataset = dataset;
  r.seed = a.seed;
  ojson j = metrics::report_to_json(r);
  stamp(j, "eval", config);
  write_file(a.out, j.dump(2) + "\n");
  if (!a.curve_out.empty()) {
    write_file(a.curve_out, metrics::curve_to_csv(r.curve));
    write_sidecar(a.curve_out, "eval", config);
  }
  if (!a.svg.empty()) write_file(a.svg, evaluation_svg(method + " on " + dataset, r.curve, set));
  out << method << " on " << dataset << ": AUROC " << r.auroc << ", PRR " << r.prr << ", ER "
      << r.er << " at coverage " << r.coverage << "\n";
}

// ---- report ----

struct ReportArgs {
  std::vector<std::string> reports;
  std::string out;
};

// One row per method, an (auroc, prr) column pair per dataset, both in order
// of first appearance.
void cmd_report(const ReportArgs& a, const ojson& config, std::ostream& out) {
  require(a.out, "--out");
  if (a.reports.empty()) throw Error(ErrorKind::kUsage, "--reports is required");
  std::vector<std::string> methods, datasets;
  std::map<std::pair<std::string, std::string>, metrics::EvalReport> cells;
  for (const auto& path : a.reports) {
    metrics::EvalReport r;
    try {
      r = metrics::report_from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kMalformedInput, path + ": " + e.what());
    }
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
      methods.push_back(r.method);
    }
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) {
      datasets.push_back(r.dataset);
    }
    if (!cells.emplace(std::pair{r.method, r.dataset}, r).second) {
      throw Error(ErrorKind::kMalformedInput,
                  "duplicate report for " + r.method + " on " + r.dataset);
    }
  }
  std::string csv = "method";
  for (const auto& d : datasets) csv += "," + d + " auroc," + d + " prr";
  csv += "\n";
  for (const auto& m : methods) {
    csv += m;
    for (const auto& d : datasets) {
      auto it = cells.find({m, d});
      if (it == cells.end()) {
        csv += ",,";
      } else {
        csv += "," + fmt17(it->second.auroc) + "," + fmt17(it->second.prr);
      }
    }
    csv += "\n";
  }
  write_file(a.out, csv);
  write_sidecar(a.out, "report", config);
  out << "wrote " << methods.size() << " methods x " << datasets.size() << " datasets to "
      << a.out << "\n";
}

}  // namespace

std::string scores_to_csv(const std::vector<ScoreRow>& rows) {
  std::string s = "id,method,orientation,value\n";
  for (const auto& r : rows) {
    s += r.id + "," + r.method + "," + std::string(orientation_name(r.orientation)) + "," +
         fmt17(r.value) + "\n";
  }
  return s;
}

std::vector<ScoreRow> scores_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "id,method,orientation,value") {
    throw Error(ErrorKind::kMalformedInput, "scores file: expected header id,method,orientation,value");
  }
  std::vector<ScoreRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1) {
      f.push_back(line.substr(start, pos - start));
    }
    f.push_back(line.substr(start));
    const std::string where = "scores file line " + std::to_string(lineno);
    if (f.size() != 4) throw Error(ErrorKind::kMalformedInput, where + ": expected 4 fields");
    ScoreRow r;
    r.id = f[0];
    r.method = f[1];
    try {
      r.orientation = parse_orientation(f[2]);
    } catch (const Error& e) {
      throw Error(ErrorKind::kMalformedInput, where + ": " + e.what());
    }
    r.value = parse_double(f[3], where);
    rows.push_back(std::move(r));
  }
  return rows;
}

metrics::ScoredRecordSet join_labels(const std::vector<ScoreRow>& rows, const std::string& method,
                                     const Dataset& labels) {
  std::map<std::string_view, int> by_id;
  for (const auto& r : labels.records) by_id[r.id] = r.correctness;
  metrics::ScoredRecordSet set;
  for (const auto& row : rows) {
    if (row.method != method) continue;
    auto it = by_id.find(row.id);
    if (it == by_id.end()) {
      throw Error(ErrorKind::kMalformedInput, "score id '" + row.id + "' not in labels file");
    }
    set.scores.push_back(row.orientation == Orientation::kConfidence ? row.value : -row.value);
    set.labels.push_back(it->second);
  }
  if (set.scores.empty()) {
    throw Error(ErrorKind::kUnknownMethod, "no scores for method '" + method + "'");
  }
  return set;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Uncertainty estimation toolkit for logged VLM generations.", "uekit"};
  app.footer(kExitCodes);
  app.require_subcommand(1);

  std::map<CLI::App*, std::string> config_paths;
  auto with_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_paths[sub],
                    "JSON config; keys are flag names, optionally under a section named after "
                    "the subcommand. Flags override it.");
    sub->footer(kExitCodes);
    return sub;
  };

  SynthArgs sa;
  auto* synth_cmd = with_config(app.add_subcommand("synth", "Generate a synthetic record file"));
  synth_cmd->add_option("--preset", sa.preset,
                        "noise-free|length-bias|language-prior|fused-signal|hidden-signal")
      ->capture_default_str();
  synth_cmd->add_option("--n", sa.n, "Number of records")->capture_default_str();
  synth_cmd->add_option("--seed", sa.seed)->capture_default_str();
  synth_cmd->add_option("--k-min", sa.k_min, "Minimum question length");
  synth_cmd->add_option("--k-max", sa.k_max, "Maximum question length");
  synth_cmd->add_option("--l-min", sa.l_min, "Minimum answer length");
  synth_cmd->add_option("--l-max", sa.l_max, "Maximum answer length");
  synth_cmd->add_option("--hidden-width", sa.hidden_width, "Hidden state width");
  synth_cmd->add_option("--beams", sa.beams, "Beams per record (0 = none)");
  synth_cmd->add_option("--noise", sa.noise, "Label flip probability");
  synth_cmd->add_option("--rho", sa.rho, "Share of confidently wrong records (language-prior)");
  synth_cmd->add_option("--signal", sa.signal, "Hidden grounding magnitude");
  synth_cmd->add_option("--encoding", sa.encoding, "Hidden state encoding: json|b64")
      ->capture_default_str();
  synth_cmd->add_option("--out", sa.out, "Output record file");

  IngestArgs ia;
  auto* ingest_cmd =
      with_config(app.add_subcommand("ingest", "Validate a record file, re-encode or split it"));
  ingest_cmd->add_option("--in", ia.in, "Input record file");
  ingest_cmd->add_option("--out", ia.out, "Re-encoded output");
  ingest_cmd->add_option("--encoding", ia.encoding, "json|b64")->capture_default_str();
  ingest_cmd->add_option("--train-out", ia.train_out, "Split: calibration part");
  ingest_cmd->add_option("--test-out", ia.test_out, "Split: test part");
  ingest_cmd->add_option("--train-fraction", ia.train_fraction)->capture_default_str();
  ingest_cmd->add_option("--seed", ia.seed)->capture_default_str();

  ScoreArgs sc;
  auto* score_cmd = with_config(app.add_subcommand("score", "Score records with UE methods"));
  score_cmd
      ->add_option("--method", sc.methods,
                   "lnc|seq-prob|entropy|semantic-entropy|semantic-entropy-printed|"
                   "cluster-entropy|first-token|self-eval|checkpoint:<path>; repeatable")
      ->delimiter(',');
  score_cmd->add_option("--in", sc.in, "Record file");
  score_cmd->add_option("--out", sc.out, "Scores CSV");

  TrainArgs ta;
  auto* train_cmd = with_config(app.add_subcommand("train", "Train a learned scorer"));
  train_cmd->add_option("--scorer", ta.scorer, "harmony|lars|msf|text-only")
      ->capture_default_str();
  train_cmd->add_option("--calib", ta.calib, "Calibration record file (split into train/val)");
  train_cmd->add_option("--out", ta.out, "Checkpoint path");
  train_cmd->add_option("--d-model", ta.spec.d_model)->capture_default_str();
  train_cmd->add_option("--layers", ta.spec.layers)->capture_default_str();
  train_cmd->add_option("--heads", ta.spec.heads)->capture_default_str();
  train_cmd->add_option("--d-ff", ta.spec.d_ff)->capture_default_str();
  train_cmd->add_option("--max-len", ta.spec.max_len)->capture_default_str();
  train_cmd->add_option("--prob-bins", ta.spec.prob_bins)->capture_default_str();
  train_cmd->add_option("--dropout", ta.spec.dropout)->capture_default_str();
  train_cmd->add_option("--vocab-size", ta.spec.vocab_size)->capture_default_str();
  train_cmd->add_option("--vocab-salt", ta.spec.vocab_salt)->capture_default_str();
  train_cmd->add_option("--lr", ta.train.lr)->capture_default_str();
  train_cmd->add_option("--batch-size", ta.train.batch_size)->capture_default_str();
  train_cmd->add_option("--epochs", ta.train.epochs)->capture_default_str();
  train_cmd->add_option("--patience", ta.train.patience)->capture_default_str();
  train_cmd->add_option("--eval-interval", ta.train.eval_interval)->capture_default_str();
  train_cmd->add_option("--warmup-steps", ta.warmup_steps, "Default: 10% of total steps");
  train_cmd->add_option("--weight-decay", ta.train.weight_decay)->capture_default_str();
  train_cmd->add_option("--seed", ta.train.seed)->capture_default_str();
  train_cmd->add_option("--train-fraction", ta.train_fraction)->capture_default_str();
  train_cmd->add_flag("--lr-sweep", ta.lr_sweep, "Train over the 5e-4,5e-5,5e-6 grid");
  train_cmd->add_flag("--verbose", ta.train.verbose);

  CalibrateArgs ca;
  auto* calib_cmd =
      with_config(app.add_subcommand("calibrate", "Pick the ER-maximizing threshold"));
  calib_cmd->add_option("--scores", ca.in.scores, "Scores CSV (validation records)");
  calib_cmd->add_option("--labels-from", ca.in.labels_from, "Record file with correctness");
  calib_cmd->add_option("--method", ca.in.method, "Method to use when the CSV has several");
  calib_cmd->add_option("--cost", ca.cost, "ER penalty for a wrong answer")->capture_default_str();
  calib_cmd->add_option("--out", ca.out, "Threshold JSON");

  EvalArgs ea;
  auto* eval_cmd = with_config(app.add_subcommand("eval", "Evaluate scores on a test set"));
  eval_cmd->add_option("--scores", ea.in.scores, "Scores CSV");
  eval_cmd->add_option("--labels-from", ea.in.labels_from, "Record file with correctness");
  eval_cmd->add_option("--method", ea.in.method, "Method to use when the CSV has several");
  eval_cmd->add_option("--threshold", ea.threshold, "Threshold JSON file or a number");
  eval_cmd->add_option("--risk-levels", ea.risk_levels)->delimiter(',')->capture_default_str();
  eval_cmd->add_option("--cost", ea.cost)->capture_default_str();
  eval_cmd->add_option("--seed", ea.seed, "Recorded in the report")->capture_default_str();
  eval_cmd->add_option("--out", ea.out, "Report JSON");
  eval_cmd->add_option("--curve-out", ea.curve_out, "Risk-coverage curve CSV");
  eval_cmd->add_option("--svg", ea.svg, "Risk-coverage and confidence histogram SVG");

  ReportArgs ra;
  auto* report_cmd =
      with_config(app.add_subcommand("report", "Merge eval reports into an AUROC/PRR table"));
  report_cmd->add_option("--reports", ra.reports, "Report JSON files")->delimiter(',');
  report_cmd->add_option("--out", ra.out, "Table CSV");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::Error& e) {
    err << "error[" << error_kind_name(ErrorKind::kUsage) << "]: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kUsage);
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (const std::string& cfg = config_paths[sub]; !cfg.empty()) {
      try {
        apply_config(*sub, load_config(fs::path(cfg)));
      } catch (const CLI::Error& e) {
        throw Error(ErrorKind::kUsage, std::string("config: ") + e.what());
      }
    }
    const std::string name = sub->get_name();
    if (name == "synth") {
      cmd_synth(*sub, sa, out);
    } else if (name == "ingest") {
      cmd_ingest(ia, out);
    } else if (name == "score") {
      ojson c;
      c["method"] = sc.methods;
      c["in"] = sc.in;
      c["out"] = sc.out;
      cmd_score(sc, c, out);
    } else if (name == "train") {
      ojson c;
      c["scorer"] = ta.scorer;
      c["calib"] = ta.calib;
      c["out"] = ta.out;
      learn::ScorerSpec spec = ta.spec;
      spec.kind = learn::parse_kind(ta.scorer);
      c["spec"] = spec.to_json();
      learn::TrainConfig tc = ta.train;
      if (train_cmd->get_option("--warmup-steps")->count() > 0) tc.warmup_steps = ta.warmup_steps;
      c["train"] = tc.to_json();
      c["train_fraction"] = ta.train_fraction;
      c["lr_sweep"] = ta.lr_sweep;
      cmd_train(*sub, ta, c, out, err);
    } else if (name == "calibrate") {
      ojson c;
      c["scores"] = ca.in.scores;
      c["labels_from"] = ca.in.labels_from;
      c["method"] = ca.in.method;
      c["cost"] = ca.cost;
      c["out"] = ca.out;
      cmd_calibrate(ca, c, out);
    } else if (name == "eval") {
      ojson c;
      c["scores"] = ea.in.scores;
      c["labels_from"] = ea.in.labels_from;
      c["method"] = ea.in.method;
      c["threshold"] = ea.threshold;
      c["risk_levels"] = ea.risk_levels;
      c["cost"] = ea.cost;
      c["seed"] = ea.seed;
      c["out"] = ea.out;
      c["curve_out"] = ea.curve_out;
      c["svg"] = ea.svg;
      cmd_eval(ea, c, out);
    } else if (name == "report") {
      ojson c;
      c["reports"] = ra.reports;
      c["out"] = ra.out;
      cmd_report(ra, c, out);
    }
    return 0;
  } catch (const Error& e) {
    err << "error[" << error_kind_name(e.kind()) << "]: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    err << "error[" << error_kind_name(ErrorKind::kIo) << "]: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kIo);
  }
}

}  // namespace uekit::cli
