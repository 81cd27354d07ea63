// hyperrag: index / train / retrieve / eval over a persisted index directory.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 external client error. Logs go to stderr; stdout carries JSON only.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hyperrag/config.hpp"
#include "hyperrag/hyperrag.hpp"

namespace {

using hyperrag::AppConfig;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitClient = 3;

void log(const std::string& msg) { std::cerr << "[hyperrag] " << msg << '\n'; }

class Overrides {
 public:
  template <typename T>
  void add(CLI::App& app, const std::string& flag, T AppConfig::*field, const std::string& help) {
    auto holder = std::make_shared<T>();
    CLI::Option* opt = app.add_option(flag, *holder, help);
    appliers_.push_back([opt, holder, field](AppConfig& c) {
      if (opt->count() > 0) c.*field = *holder;
    });
  }

  void apply(AppConfig& c) const {
    for (const auto& f : appliers_) f(c);
  }

 private:
  std::vector<std::function<void(AppConfig&)>> appliers_;
};

json ranking_json(const hyperrag::RankingList& list) {
  json out = json::array();
  for (const auto& r : list) out.push_back({{"passage_id", r.passage_id}, {"score", r.score}});
  return out;
}

int cmd_index(const AppConfig& cfg) {
  if (cfg.corpus.empty()) throw hyperrag::ConfigError("no corpus given (--corpus or \"corpus\" key)");
  const auto build_cfg = cfg.index_build();
  const auto docs = hyperrag::parse_corpus_jsonl(hyperrag::io::read_file(cfg.corpus), cfg.corpus);
  const auto extractor = cfg.make_extractor();
  const auto encoder = cfg.make_encoder();
  log("indexing " + std::to_string(docs.size()) + " documents from " + cfg.corpus);
  const std::string extractor_name = cfg.extractor == "stub" ? "stub" : "http:" + cfg.extractor;
  hyperrag::IndexBundle index = hyperrag::build_index(docs, build_cfg, *extractor, extractor_name, *encoder);
  hyperrag::save_index(index, cfg.index_dir);
  log("index written to " + cfg.index_dir);
  std::cout << hyperrag::summarize(index, docs.size()).to_json().dump() << '\n';
  return kExitOk;
}

int cmd_train(const AppConfig& cfg, const std::string& trace_file) {
  const auto proj_cfg = cfg.projection();
  const auto train_cfg = cfg.training();
  hyperrag::IndexBundle index = hyperrag::load_index(cfg.index_dir);
  log("training projection on " + std::to_string(index.store.facts().size()) + " facts over " +
      std::to_string(train_cfg.epochs) + " epochs");
  const hyperrag::TrainResult result = hyperrag::train_index(index, proj_cfg, train_cfg);
  if (result.skipped_anchors > 0) {
    log("warning: " + std::to_string(result.skipped_anchors) + " anchors have no valid negative and were skipped");
  }
  hyperrag::save_index(index, cfg.index_dir);

  std::string lines;
  for (std::size_t e = 0; e < result.loss_trace.size(); ++e) {
    lines += json{{"epoch", e}, {"loss", result.loss_trace[e]}}.dump() + "\n";
  }
  std::cout << lines;
  if (!trace_file.empty()) hyperrag::io::write_file(trace_file, lines);
  log("projection written; loss " + std::to_string(result.loss_trace.front()) + " -> " +
      std::to_string(result.loss_trace.back()));
  return kExitOk;
}

int cmd_retrieve(const AppConfig& cfg, const std::string& question, const std::string& space,
                 std::size_t top) {
  const hyperrag::IndexBundle index = hyperrag::load_index(cfg.index_dir);
  const auto encoder = cfg.make_encoder();
  const hyperrag::RetrievalEngine engine(index, *encoder, cfg.retrieval());
  const bool needs_projection = space != "euclidean";
  if (needs_projection && !engine.hyperbolic_available()) {
    log("error: --space " + space + " needs a trained projection; run `train` first or use --space euclidean");
    return kExitUsage;
  }
  const hyperrag::DualRanking dual = engine.retrieve(question, needs_projection);
  for (const auto& w : dual.warnings) log("warning: " + w);

  json out;
  out["question"] = question;
  out["space"] = space;
  out["top"] = top;
  out["euclidean"] = ranking_json(dual.euclidean.ranking);
  out["hyperbolic"] = dual.hyperbolic ? ranking_json(dual.hyperbolic->ranking) : json(nullptr);

  hyperrag::RankingList chosen;
  if (space == "euclidean") {
    chosen = dual.euclidean.ranking;
  } else if (space == "hyperbolic") {
    chosen = dual.hyperbolic->ranking;
  } else {
    json fusion = json::array();
    for (const auto& h : hyperrag::fuse_detailed(dual.euclidean.ranking, dual.hyperbolic->ranking)) {
      fusion.push_back({{"passage_id", h.passage_id},
                        {"s_e", h.s_euclidean},
                        {"s_h", h.s_hyperbolic},
                        {"b", h.bonus},
                        {"hybrid", h.hybrid}});
      chosen.push_back({h.passage_id, h.hybrid});
    }
    out["fusion"] = std::move(fusion);
  }
  json results = json::array();
  const auto shown = hyperrag::truncate(chosen, top);
  for (std::size_t i = 0; i < shown.size(); ++i) {
    const auto& p = index.store.passages()[index.store.passage_index(shown[i].passage_id)];
    results.push_back({{"rank", i}, {"passage_id", p.passage_id}, {"score", shown[i].score}, {"text", p.text}});
    std::cerr << "  " << (i + 1) << ". [" << p.passage_id << "] " << p.text.substr(0, 100) << '\n';
  }
  out["results"] = std::move(results);
  std::cout << out.dump() << '\n';
  return kExitOk;
}

int cmd_eval(const AppConfig& cfg, const std::string& dataset_path, const std::string& report_path,
             bool no_hyperbolic) {
  const auto eval_cfg = cfg.evaluation(!no_hyperbolic);
  const hyperrag::IndexBundle index = hyperrag::load_index(cfg.index_dir);
  const auto encoder = cfg.make_encoder();
  const hyperrag::RetrievalEngine engine(index, *encoder, cfg.retrieval());
  if (eval_cfg.use_hyperbolic && !engine.hyperbolic_available()) {
    log("warning: no trained projection; evaluating the Euclidean branch only");
  }
  const auto dataset = hyperrag::parse_dataset_jsonl(hyperrag::io::read_file(dataset_path));
  for (const auto& bad : dataset.malformed) {
    log("warning: dataset line " + std::to_string(bad.line) + " skipped: " + bad.message);
  }
  const json report = hyperrag::run_eval(dataset, engine, eval_cfg, index.store);
  const std::string text = report.dump(2) + "\n";
  if (!report_path.empty()) hyperrag::io::write_file(report_path, text);
  std::cout << text;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-space (Euclidean + hyperbolic) graph retrieval engine"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file with flat keys")->check(CLI::ExistingFile);

  Overrides ov;
  ov.add(app, "--corpus", &AppConfig::corpus, "corpus JSONL ({doc_id, text} per line)");
  ov.add(app, "--index-dir", &AppConfig::index_dir, "index directory");
  ov.add(app, "--encoder", &AppConfig::encoder, "\"stub\" or encoder URL");
  ov.add(app, "--extractor", &AppConfig::extractor, "\"stub\" or extractor URL");
  ov.add(app, "--credentials-env", &AppConfig::credentials_env, "env var holding a bearer token");
  ov.add(app, "--dim", &AppConfig::dim, "embedding dimension");
  ov.add(app, "--curvature", &AppConfig::curvature, "ball curvature magnitude c");
  ov.add(app, "--alpha", &AppConfig::alpha, "radius offset");
  ov.add(app, "--beta", &AppConfig::beta, "radius scale");
  ov.add(app, "--gamma", &AppConfig::gamma, "contrastive margin");
  ov.add(app, "--tau-syn", &AppConfig::tau_syn, "synonymy cosine threshold");
  ov.add(app, "--damping", &AppConfig::damping, "PPR restart probability");
  ov.add(app, "--top-k-facts", &AppConfig::top_k_facts, "facts seeding entity mass");
  ov.add(app, "--seed-mix", &AppConfig::seed_mix, "entity share of the seed");
  ov.add(app, "--tol", &AppConfig::tol, "PPR L1 tolerance");
  ov.add(app, "--max-iter", &AppConfig::max_iter, "PPR iteration cap");
  ov.add(app, "--seed", &AppConfig::seed, "RNG seed");
  ov.add(app, "--recall-k", &AppConfig::recall_k, "k for Recall@k");
  ov.add(app, "--chunk-max-chars", &AppConfig::chunk_max_chars, "passage character budget");
  ov.add(app, "--learning-rate", &AppConfig::learning_rate, "gradient descent step");
  ov.add(app, "--epochs", &AppConfig::epochs, "training epochs");
  ov.add(app, "--negatives", &AppConfig::negatives, "negatives per positive");
  ov.add(app, "--batch-size", &AppConfig::batch_size, "terms per step (0 = full batch)");

  auto* index_cmd = app.add_subcommand("index", "chunk, extract, embed and build the graph");
  auto* train_cmd = app.add_subcommand("train", "train the hyperbolic projection");
  std::string trace_file;
  train_cmd->add_option("--trace-file", trace_file, "also write the loss trace (JSON lines) here");

  auto* retrieve_cmd = app.add_subcommand("retrieve", "rank passages for a question");
  std::string question;
  std::string space = "fused";
  std::size_t top = 0;
  retrieve_cmd->add_option("question", question, "query text")->required();
  retrieve_cmd->add_option("--space", space, "euclidean | hyperbolic | fused")
      ->check(CLI::IsMember({"euclidean", "hyperbolic", "fused"}));
  auto* top_opt = retrieve_cmd->add_option("--top", top, "number of passages to print");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate Recall@k (and EM/F1) on a dataset");
  std::string dataset_path;
  std::string report_path;
  bool no_hyperbolic = false;
  eval_cmd->add_option("--dataset", dataset_path, "dataset JSONL")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--report", report_path, "write the report JSON here");
  eval_cmd->add_flag("--no-hyperbolic", no_hyperbolic, "disable the hyperbolic branch (ablation)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    AppConfig cfg = config_path.empty() ? AppConfig{} : AppConfig::load(config_path);
    ov.apply(cfg);
    if (top_opt->count() == 0) top = cfg.top;
    if (index_cmd->parsed()) return cmd_index(cfg);
    if (train_cmd->parsed()) return cmd_train(cfg, trace_file);
    if (retrieve_cmd->parsed()) return cmd_retrieve(cfg, question, space, top);
    if (eval_cmd->parsed()) return cmd_eval(cfg, dataset_path, report_path, no_hyperbolic);
  } catch (const hyperrag::ConfigError& e) {
    log(std::string("configuration error: ") + e.what());
    return kExitUsage;
  } catch (const hyperrag::TransportError& e) {
    log(std::string("client error: ") + e.what());
    return kExitClient;
  } catch (const hyperrag::ParseError& e) {
    log(std::string("client response error: ") + e.what());
    return kExitClient;
  } catch (const std::exception& e) {
    // DataError, CorruptionError, DomainError and filesystem failures.
    log(std::string("data error: ") + e.what());
    return kExitData;
  }
  return kExitUsage;
}
