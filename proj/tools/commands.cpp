#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "config_io.hpp"
#include "denn/checkpoint.hpp"
#include "denn/datastore.hpp"
#include "denn/error.hpp"
#include "denn/eval.hpp"
#include "denn/inference.hpp"
#include "denn/objective.hpp"
#include "denn/scoring.hpp"
#include "denn/trainer.hpp"

namespace denn::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

json kv_json(const KeyValueConfig& kv) {
  json j = json::object();
  for (const auto& [k, v] : kv.entries()) j[k] = v;
  return j;
}

/// Reproducibility record written next to every command's output.
class RunManifest {
 public:
  RunManifest(std::string command, const KeyValueConfig& config)
      : started_(utc_now()) {
    doc_["command"] = std::move(command);
    doc_["config"] = kv_json(config);
    doc_["inputs"] = json::object();
    doc_["artifacts"] = json::object();
  }
  void input(const std::string& name, const fs::path& p) { doc_["inputs"][name] = p.string(); }
  void artifact(const std::string& name, const fs::path& p) { doc_["artifacts"][name] = p.string(); }
  void set(const std::string& key, json value) { doc_[key] = std::move(value); }

  void write(const fs::path& path) {
    doc_["started_at"] = started_;
    doc_["finished_at"] = utc_now();
    std::ofstream out(path);
    if (!out) fail(Errc::io_error, "cannot write manifest '" + path.string() + "'");
    out << doc_.dump(2) << '\n';
  }

 private:
  json doc_;
  std::string started_;
};

fs::path manifest_path_for(const fs::path& artifact) {
  return fs::path(artifact.string() + ".manifest.json");
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) fail(Errc::io_error, what + " '" + p.string() + "' does not exist");
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
};

KeyValueConfig load_config(const GlobalOptions& g) {
  KeyValueConfig kv;
  if (!g.config_path.empty()) {
    kv = KeyValueConfig::load(g.config_path);
    reject_unknown_keys(kv);
  }
  if (g.seed) kv.set("seed", std::to_string(*g.seed));
  return kv;
}

std::string require_out(const GlobalOptions& g, const char* command) {
  if (g.out.empty()) fail(Errc::invalid_argument, std::string(command) + ": --out is required");
  return g.out;
}

json prf_json(const PRF& p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

std::string pct(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << 100.0 * v;
  return out.str();
}

// ---------------------------------------------------------------- gen-data

int cmd_gen_data(const GlobalOptions& g, std::ostream& out) {
  const auto kv = load_config(g);
  const auto cfg = dataset_config(kv);
  const fs::path dir = require_out(g, "gen-data");
  fs::create_directories(dir);
  const auto splits = generate_synthetic(cfg);
  save_jsonl(splits.train, dir / "train.jsonl");
  save_jsonl(splits.valid, dir / "valid.jsonl");
  save_jsonl(splits.test, dir / "test.jsonl");

  RunManifest m("gen-data", to_kv(cfg));
  m.set("seed", cfg.seed);
  m.artifact("train", dir / "train.jsonl");
  m.artifact("valid", dir / "valid.jsonl");
  m.artifact("test", dir / "test.jsonl");
  m.write(dir / "manifest.json");
  out << "wrote " << splits.train.size() << "/" << splits.valid.size() << "/"
      << splits.test.size() << " samples to " << dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string data_dir;
  std::string train_file;
  std::string valid_file;
  std::string history;
  std::string last;
  std::string resume;
};

json history_json(const HistoryRecord& r) {
  json j{{"iteration", r.iteration}, {"bce", r.bce}, {"con", r.con}, {"total", r.total}};
  j["valid_micro_f1"] = r.valid_micro_f1 ? json(*r.valid_micro_f1) : json(nullptr);
  return j;
}

int cmd_train(const GlobalOptions& g, const TrainArgs& a, std::ostream& out) {
  const auto kv = load_config(g);
  const auto cfg = train_config(kv);
  const fs::path model_path = require_out(g, "train");

  fs::path train_path = a.train_file;
  fs::path valid_path = a.valid_file;
  if (!a.data_dir.empty()) {
    if (train_path.empty()) train_path = fs::path(a.data_dir) / "train.jsonl";
    if (valid_path.empty() && fs::exists(fs::path(a.data_dir) / "valid.jsonl")) {
      valid_path = fs::path(a.data_dir) / "valid.jsonl";
    }
  }
  if (train_path.empty()) fail(Errc::invalid_argument, "train: give --data or --train");
  require_file(train_path, "training set");
  const Dataset train_set = load_jsonl(train_path);
  Dataset valid_set;
  if (!valid_path.empty()) {
    require_file(valid_path, "validation set");
    valid_set = load_jsonl(valid_path);
  }

  std::optional<ResumePoint> resume;
  if (!a.resume.empty()) {
    require_file(a.resume, "resume checkpoint");
    auto ckpt = load_checkpoint(a.resume);
    if (!ckpt.training) {
      fail(Errc::format_error, "checkpoint '" + a.resume + "' has no training state to resume");
    }
    resume = ResumePoint{std::move(ckpt.state), std::move(*ckpt.training)};
  }

  const fs::path history_path =
      a.history.empty() ? fs::path(model_path.string() + ".history.jsonl") : fs::path(a.history);
  ensure_parent(model_path);
  ensure_parent(history_path);
  std::ofstream history(history_path);
  if (!history) fail(Errc::io_error, "cannot write history '" + history_path.string() + "'");

  const auto result = train(
      train_set, valid_set, cfg,
      [&](const HistoryRecord& r) { history << history_json(r).dump() << '\n'; },
      std::move(resume));

  save_checkpoint({result.best_state, std::nullopt}, model_path);
  RunManifest m("train", to_kv(cfg));
  m.set("seed", cfg.seed);
  m.input("train", train_path);
  if (!valid_path.empty()) m.input("valid", valid_path);
  if (!a.resume.empty()) m.input("resume", a.resume);
  m.artifact("model", model_path);
  m.artifact("history", history_path);
  if (!a.last.empty()) {
    ensure_parent(a.last);
    save_checkpoint({result.last_state, result.last_snapshot}, a.last);
    m.artifact("last", a.last);
  }
  m.set("best_iteration", result.best_iteration);
  m.set("best_valid_micro_f1",
        result.best_valid_micro_f1 ? json(*result.best_valid_micro_f1) : json(nullptr));
  m.write(manifest_path_for(model_path));

  out << "trained " << result.history.size() << " iterations; best iteration "
      << result.best_iteration;
  if (result.best_valid_micro_f1) out << " (valid micro-F1 " << pct(*result.best_valid_micro_f1) << ")";
  out << "\nwrote " << model_path.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- build-store

struct StoreArgs {
  std::string model;
  std::string train_file;
  double fraction = 1.0;
};

int cmd_build_store(const GlobalOptions& g, const StoreArgs& a, std::ostream& out) {
  const auto kv = load_config(g);
  const fs::path store_path = require_out(g, "build-store");
  require_file(a.model, "model checkpoint");
  require_file(a.train_file, "training set");
  const auto ckpt = load_checkpoint(a.model);
  const auto train_set = load_jsonl(a.train_file);
  const auto store = build_datastore(ckpt.state, train_set, a.fraction);
  ensure_parent(store_path);
  save_datastore(store, store_path);

  KeyValueConfig snapshot = kv;
  snapshot.set("store_fraction", std::to_string(a.fraction));
  RunManifest m("build-store", snapshot);
  m.input("model", a.model);
  m.input("train", a.train_file);
  m.artifact("store", store_path);
  m.set("entries", store.size());
  m.write(manifest_path_for(store_path));
  out << "wrote " << store.size() << " entries (d=" << store.dim() << ", C=" << store.num_classes()
      << ") to " << store_path.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
  std::string model;
  std::string store;
  std::string test_file;
};

json bundle_json(const Sample& s, const PredictionBundle& b, double threshold) {
  json high = json::array();
  json predicted = json::array();
  for (std::size_t c = 0; c < b.high_conf_mask.size(); ++c) {
    if (b.high_conf_mask[c] != 0) high.push_back(c);
  }
  const auto decision = decide(b.y_final, threshold);
  for (std::size_t c = 0; c < decision.size(); ++c) {
    if (decision[c] != 0) predicted.push_back(c);
  }
  json neighbors = json::array();
  for (const auto& n : b.neighbors) {
    neighbors.push_back({{"index", n.index}, {"similarity", n.similarity}});
  }
  return {{"id", s.id},         {"y_clf", b.y_clf},     {"y_knn", b.y_knn},
          {"high_conf", high},  {"lambda", b.lambda},   {"y_final", b.y_final},
          {"predicted", predicted}, {"neighbors", neighbors}};
}

int cmd_predict(const GlobalOptions& g, const PredictArgs& a, std::ostream& out) {
  const auto kv = load_config(g);
  const auto cfg = inference_config(kv);
  const auto threads = static_cast<unsigned>(kv.get_uint("threads", 0));
  const fs::path out_path = require_out(g, "predict");
  require_file(a.model, "model checkpoint");
  require_file(a.store, "datastore");
  require_file(a.test_file, "test set");
  const auto ckpt = load_checkpoint(a.model);
  const auto store = load_datastore(a.store);
  const auto test = load_jsonl(a.test_file);
  if (test.num_classes != ckpt.state.config.num_classes ||
      test.vocab_size != ckpt.state.config.vocab_size) {
    fail(Errc::dimension_mismatch, "predict: test set dimensions do not match the model");
  }
  const auto bundles = predict_all(ckpt.state, store, test, cfg, threads);

  ensure_parent(out_path);
  std::ofstream file(out_path);
  if (!file) fail(Errc::io_error, "cannot write predictions '" + out_path.string() + "'");
  file << json{{"format", "denn-predictions"},
               {"version", 1},
               {"num_classes", test.num_classes},
               {"mode", to_string(cfg.mode)},
               {"k", cfg.k},
               {"decision_threshold", cfg.decision_threshold}}
              .dump()
       << '\n';
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    file << bundle_json(test.samples[i], bundles[i], cfg.decision_threshold).dump() << '\n';
  }
  if (!file) fail(Errc::io_error, "write failed for '" + out_path.string() + "'");

  RunManifest m("predict", to_kv(cfg));
  m.input("model", a.model);
  m.input("store", a.store);
  m.input("test", a.test_file);
  m.artifact("predictions", out_path);
  m.write(manifest_path_for(out_path));
  out << "wrote " << bundles.size() << " predictions to " << out_path.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string predictions;
  std::string gold;
  std::string train_file;
  std::size_t groups = 0;
  std::vector<double> thresholds;
};

struct PredictedLabels {
  std::size_t num_classes = 0;
  std::vector<std::uint64_t> ids;
  std::vector<LabelVector> labels;
};

// Accepts a predictions file ("predicted" per record) or a dataset file
// ("labels" per record).
PredictedLabels load_predicted(const fs::path& path) {
  require_file(path, "predictions");
  std::ifstream in(path);
  PredictedLabels p;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  auto bad = [&](const std::string& what) {
    fail(Errc::format_error, path.string() + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      bad("invalid JSON");
    }
    if (!header) {
      if (!j.contains("num_classes") || !j["num_classes"].is_number_unsigned()) {
        bad("expected header with num_classes");
      }
      p.num_classes = j["num_classes"].get<std::size_t>();
      header = true;
      continue;
    }
    const char* field = j.contains("predicted") ? "predicted" : "labels";
    if (!j.contains(field) || !j[field].is_array() || !j.contains("id")) {
      bad("record needs 'id' and 'predicted' (or 'labels')");
    }
    LabelVector v(p.num_classes, 0);
    for (const auto& l : j[field]) {
      if (!l.is_number_unsigned() || l.get<std::size_t>() >= p.num_classes) {
        bad("label index out of range");
      }
      v[l.get<std::size_t>()] = 1;
    }
    p.ids.push_back(j["id"].get<std::uint64_t>());
    p.labels.push_back(std::move(v));
  }
  if (!header) fail(Errc::format_error, path.string() + ": missing header line");
  return p;
}

int cmd_eval(const GlobalOptions& g, const EvalArgs& a, std::ostream& out) {
  const auto kv = load_config(g);
  const auto pred = load_predicted(a.predictions);
  require_file(a.gold, "gold set");
  const auto gold = load_jsonl(a.gold);
  if (pred.num_classes != gold.num_classes || pred.labels.size() != gold.size()) {
    fail(Errc::dimension_mismatch, "eval: predictions and gold differ in size or label count");
  }
  std::vector<LabelVector> gold_labels;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold.samples[i].id != pred.ids[i]) {
      fail(Errc::dimension_mismatch, "eval: record " + std::to_string(i) +
                                         " has id mismatch between predictions and gold");
    }
    gold_labels.push_back(gold.samples[i].labels);
  }
  const auto counts = confusion(gold_labels, pred.labels);
  const PRF micro = micro_prf(counts);
  const PRF macro = macro_prf(counts);

  json report{{"num_samples", counts.num_samples},
              {"num_classes", counts.num_classes()},
              {"micro", prf_json(micro)},
              {"macro", prf_json(macro)},
              {"avg_f1", 0.5 * (micro.f1 + macro.f1)},
              {"hamming_loss", hamming_loss(counts)}};

  out << "metric      precision   recall      F1\n";
  out << "micro       " << std::setw(9) << pct(micro.precision) << "   " << std::setw(9)
      << pct(micro.recall) << "   " << std::setw(6) << pct(micro.f1) << "\n";
  out << "macro       " << std::setw(9) << pct(macro.precision) << "   " << std::setw(9)
      << pct(macro.recall) << "   " << std::setw(6) << pct(macro.f1) << "\n";
  out << "hamming loss " << std::setprecision(6) << hamming_loss(counts) << "\n";

  if (!a.train_file.empty()) {
    require_file(a.train_file, "training set");
    const auto train_set = load_jsonl(a.train_file);
    if (train_set.num_classes != gold.num_classes) {
      fail(Errc::dimension_mismatch, "eval: training set label count differs from gold");
    }
    const auto freqs = label_frequencies(train_set);
    const std::size_t num_groups =
        !a.thresholds.empty() ? a.thresholds.size() + 1 : (a.groups > 0 ? a.groups : 4);
    const auto groups = !a.thresholds.empty()
                            ? frequency_groups_by_thresholds(freqs, a.thresholds)
                            : frequency_groups(train_set, num_groups);
    json group_rows = json::array();
    out << "group  labels  micro-F1\n";
    for (const auto& s : group_report(counts, groups, num_groups)) {
      group_rows.push_back({{"group", s.group},
                            {"num_labels", s.num_labels},
                            {"micro", prf_json(s.micro)},
                            {"empty", s.empty}});
      out << std::setw(5) << s.group + 1 << "  " << std::setw(6) << s.num_labels << "  "
          << std::setw(8) << pct(s.micro.f1) << (s.empty ? "  (no gold, no predictions)" : "")
          << "\n";
    }
    report["groups"] = group_rows;
  }

  if (!g.out.empty()) {
    ensure_parent(g.out);
    std::ofstream file(g.out);
    if (!file) fail(Errc::io_error, "cannot write metrics '" + g.out + "'");
    file << report.dump(2) << '\n';
    RunManifest m("eval", kv);
    m.input("predictions", a.predictions);
    m.input("gold", a.gold);
    if (!a.train_file.empty()) m.input("train", a.train_file);
    m.artifact("metrics", g.out);
    m.write(manifest_path_for(g.out));
  }
  return kExitOk;
}

// ---------------------------------------------------------------- ablate

struct AblateArgs {
  std::string data_dir;
};

struct AblationRow {
  std::string section;
  std::string setting;
  std::string variant;
  std::string mode;
  Scores scores;
};

int cmd_ablate(const GlobalOptions& g, const AblateArgs& a, std::ostream& out) {
  const auto kv = load_config(g);
  const auto base_train = train_config(kv);
  const auto base_infer = inference_config(kv);
  const fs::path out_dir = require_out(g, "ablate");
  const fs::path data_dir = a.data_dir;
  for (const char* f : {"train.jsonl", "valid.jsonl", "test.jsonl"}) {
    require_file(data_dir / f, "dataset split");
  }
  const auto train_set = load_jsonl(data_dir / "train.jsonl");
  const auto valid_set = load_jsonl(data_dir / "valid.jsonl");
  const auto test_set = load_jsonl(data_dir / "test.jsonl");

  std::vector<ContrastiveVariant> variants;
  for (const auto& name : split_list(kv.get_string("ablate_variants", "dcl,ucl,scl,wscl"))) {
    variants.push_back(variant_from_string(name));
  }
  if (variants.empty()) fail(Errc::config_error, "ablate_variants is empty");
  const auto sweep_k = kv.get_double_list("sweep_k", {});
  const auto sweep_gamma = kv.get_double_list("sweep_gamma", {});
  const auto sweep_fraction = kv.get_double_list("sweep_store_fraction", {});
  const double fixed_baseline = kv.get_double("fixed_lambda_baseline", base_infer.fixed_lambda);

  std::vector<AblationRow> rows;
  auto evaluate = [&](const EncoderState& state, const Datastore& store, InferenceConfig ic) {
    const auto bundles = predict_all(state, store, test_set, ic, 0);
    return score_predictions(bundles, test_set, ic.decision_threshold);
  };

  std::optional<EncoderState> sweep_model;
  for (const auto variant : variants) {
    TrainConfig tc = base_train;
    tc.variant = variant;
    const auto result = train(train_set, valid_set, tc);
    const auto store = build_datastore(result.best_state, train_set);
    const std::string vname(to_string(variant));
    if (!sweep_model || variant == ContrastiveVariant::dcl) sweep_model = result.best_state;

    if (variant == variants.front() || variant == ContrastiveVariant::dcl) {
      for (auto mode : {InferenceMode::classifier_only, InferenceMode::knn_only,
                        InferenceMode::fixed_lambda}) {
        InferenceConfig ic = base_infer;
        ic.mode = mode;
        ic.fixed_lambda = fixed_baseline;
        rows.push_back({"modes", "", vname, std::string(to_string(mode)),
                        evaluate(result.best_state, store, ic)});
      }
    }
    InferenceConfig ic = base_infer;
    ic.mode = InferenceMode::denn;
    rows.push_back({"modes", "", vname, "denn", evaluate(result.best_state, store, ic)});
  }

  const EncoderState& model = *sweep_model;
  const auto full_store = build_datastore(model, train_set);
  for (double k : sweep_k) {
    InferenceConfig ic = base_infer;
    ic.mode = InferenceMode::denn;
    ic.k = static_cast<std::size_t>(k);
    rows.push_back({"sweep_k", std::to_string(ic.k), "", "denn", evaluate(model, full_store, ic)});
  }
  for (double gamma : sweep_gamma) {
    InferenceConfig ic = base_infer;
    ic.mode = InferenceMode::denn;
    ic.gamma = gamma;
    std::ostringstream s;
    s << gamma;
    rows.push_back({"sweep_gamma", s.str(), "", "denn", evaluate(model, full_store, ic)});
  }
  for (double fraction : sweep_fraction) {
    InferenceConfig ic = base_infer;
    ic.mode = InferenceMode::denn;
    const auto store = build_datastore(model, train_set, fraction);
    std::ostringstream s;
    s << fraction;
    rows.push_back({"sweep_store_fraction", s.str(), "", "denn", evaluate(model, store, ic)});
  }

  fs::create_directories(out_dir);
  json table = json::array();
  std::ostringstream text;
  text << std::left << std::setw(22) << "section" << std::setw(10) << "setting" << std::setw(8)
       << "variant" << std::setw(17) << "mode" << std::right << std::setw(9) << "mi-F1"
       << std::setw(9) << "ma-F1" << std::setw(9) << "avg" << "\n";
  for (const auto& r : rows) {
    table.push_back({{"section", r.section},
                     {"setting", r.setting},
                     {"variant", r.variant},
                     {"mode", r.mode},
                     {"micro", prf_json(r.scores.micro)},
                     {"macro", prf_json(r.scores.macro)}});
    text << std::left << std::setw(22) << r.section << std::setw(10) << r.setting << std::setw(8)
         << r.variant << std::setw(17) << r.mode << std::right << std::setw(9)
         << pct(r.scores.micro.f1) << std::setw(9) << pct(r.scores.macro.f1) << std::setw(9)
         << pct(0.5 * (r.scores.micro.f1 + r.scores.macro.f1)) << "\n";
  }
  {
    std::ofstream jf(out_dir / "ablation.json");
    std::ofstream tf(out_dir / "ablation.txt");
    if (!jf || !tf) fail(Errc::io_error, "cannot write ablation outputs in " + out_dir.string());
    jf << table.dump(2) << '\n';
    tf << text.str();
  }
  KeyValueConfig snapshot = to_kv(base_train);
  snapshot.merge(to_kv(base_infer));
  snapshot.merge(kv);
  RunManifest m("ablate", snapshot);
  m.set("seed", base_train.seed);
  m.input("data", data_dir);
  m.artifact("table_json", out_dir / "ablation.json");
  m.artifact("table_text", out_dir / "ablation.txt");
  m.write(out_dir / "manifest.json");
  out << text.str();
  return kExitOk;
}

// ---------------------------------------------------------------- gradcheck

int cmd_gradcheck(const GlobalOptions& g, GradcheckConfig cfg, const std::string& activation,
                  const std::string& variant, std::ostream& out) {
  if (g.seed) cfg.seed = *g.seed;
  cfg.activation = activation_from_string(activation);
  cfg.objective.variant = variant_from_string(variant);
  const auto report = gradient_check(cfg);
  out << "gradcheck: vocab=" << cfg.vocab_size << " hidden=" << cfg.hidden_dim
      << " embed=" << cfg.embed_dim << " classes=" << cfg.num_classes
      << " batch=2x" << cfg.batch_size << " variant=" << variant << " seed=" << cfg.seed << "\n";
  out << "parameters checked: " << report.parameters_checked << "\n";
  out << std::scientific << std::setprecision(3);
  out << "max relative error: " << report.max_rel_error << "\n";
  out << "max absolute error: " << report.max_abs_error << "\n";
  out << "tolerance: rel " << cfg.rel_tolerance << " / abs " << cfg.abs_tolerance << "\n";
  out << (report.passed() ? "PASS" : "FAIL") << " (" << report.failures << " failures)\n";
  if (!g.out.empty()) {
    ensure_parent(g.out);
    std::ofstream file(g.out);
    file << json{{"parameters_checked", report.parameters_checked},
                 {"failures", report.failures},
                 {"max_rel_error", report.max_rel_error},
                 {"max_abs_error", report.max_abs_error},
                 {"passed", report.passed()}}
                .dump(2)
         << '\n';
  }
  return report.passed() ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Debiased nearest-neighbor multi-label classification", "denn"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "key = value configuration file");
  app.add_option("--seed", g.seed, "override the configured seed");
  app.add_option("--out", g.out, "output file or directory");

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic train/valid/test dataset");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train encoder and classifier");
  train_cmd->add_option("--data", train_args.data_dir, "directory with train.jsonl/valid.jsonl");
  train_cmd->add_option("--train", train_args.train_file, "training set file");
  train_cmd->add_option("--valid", train_args.valid_file, "validation set file");
  train_cmd->add_option("--history", train_args.history, "history output (JSON lines)");
  train_cmd->add_option("--last", train_args.last, "also save the final state with optimizer state");
  train_cmd->add_option("--resume", train_args.resume, "continue from a --last checkpoint");

  StoreArgs store_args;
  auto* store_cmd = app.add_subcommand("build-store", "build the kNN datastore");
  store_cmd->add_option("--model", store_args.model, "model checkpoint")->required();
  store_cmd->add_option("--train", store_args.train_file, "training set file")->required();
  store_cmd->add_option("--fraction", store_args.fraction, "use this leading fraction of the training set")
      ->check(CLI::Range(0.0, 1.0));

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "predict with classifier, kNN and their combination");
  predict_cmd->add_option("--model", predict_args.model, "model checkpoint")->required();
  predict_cmd->add_option("--store", predict_args.store, "datastore file")->required();
  predict_cmd->add_option("--test", predict_args.test_file, "test set file")->required();

  EvalArgs eval_args;
  std::string threshold_list;
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against gold labels");
  eval_cmd->add_option("--predictions", eval_args.predictions, "predictions file")->required();
  eval_cmd->add_option("--gold", eval_args.gold, "gold dataset file")->required();
  eval_cmd->add_option("--train", eval_args.train_file, "training set, enables frequency groups");
  eval_cmd->add_option("--groups", eval_args.groups, "number of frequency groups (default 4)");
  eval_cmd->add_option("--thresholds", threshold_list,
                       "descending frequency thresholds, e.g. 4500,1700,870");

  AblateArgs ablate_args;
  auto* ablate_cmd = app.add_subcommand("ablate", "compare inference modes, loss variants and sweeps");
  ablate_cmd->add_option("--data", ablate_args.data_dir, "directory with the three splits")->required();

  GradcheckConfig gc;
  std::string gc_activation = "tanh";
  std::string gc_variant = "dcl";
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of all gradients");
  grad_cmd->add_option("--vocab", gc.vocab_size);
  grad_cmd->add_option("--hidden", gc.hidden_dim);
  grad_cmd->add_option("--embed", gc.embed_dim);
  grad_cmd->add_option("--classes", gc.num_classes);
  grad_cmd->add_option("--batch", gc.batch_size, "N; the batch holds 2N views");
  grad_cmd->add_option("--alpha", gc.objective.alpha);
  grad_cmd->add_option("--tau1", gc.objective.tau1);
  grad_cmd->add_option("--dropout", gc.dropout_rate);
  grad_cmd->add_option("--activation", gc_activation);
  grad_cmd->add_option("--variant", gc_variant);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return cmd_gen_data(g, out);
    if (*train_cmd) return cmd_train(g, train_args, out);
    if (*store_cmd) return cmd_build_store(g, store_args, out);
    if (*predict_cmd) return cmd_predict(g, predict_args, out);
    if (*eval_cmd) {
      if (!threshold_list.empty()) {
        for (const auto& t : split_list(threshold_list)) {
          try {
            eval_args.thresholds.push_back(std::stod(t));
          } catch (const std::exception&) {
            fail(Errc::invalid_argument, "bad threshold '" + t + "'");
          }
        }
      }
      return cmd_eval(g, eval_args, out);
    }
    if (*ablate_cmd) return cmd_ablate(g, ablate_args, out);
    if (*grad_cmd) return cmd_gradcheck(g, gc, gc_activation, gc_variant, out);
  } catch (const Error& e) {
    err << "denn: " << to_string(e.code()) << ": " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "denn: " << to_string(Errc::io_error) << ": " << e.what() << "\n";
    return static_cast<int>(Errc::io_error);
  } catch (const std::exception& e) {
    err << "denn: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace denn::cli
