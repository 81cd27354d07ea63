#pragma once

// Retrieval evaluation over a JSONL dataset of
//   {query_id, question, gold_passage_ids: [...], gold_answers: [...],
//    generated_answer?: string}
// reporting Recall@k for the Euclidean, hyperbolic and fused rankings, and
// EM / token F1 for rows that carry a generated answer.

#include <cstddef>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyperrag/errors.hpp"
#include "hyperrag/fusion.hpp"
#include "hyperrag/metrics.hpp"
#include "hyperrag/ranking.hpp"
#include "hyperrag/retrieval.hpp"

namespace hyperrag {

struct EvalRecord {
  std::string query_id;
  std::string question;
  std::vector<std::string> gold_passage_ids;
  std::vector<std::string> gold_answers;
  std::optional<std::string> generated_answer;
};

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct EvalDataset {
  std::vector<EvalRecord> records;
  std::vector<RowError> malformed;
};

inline EvalDataset parse_dataset_jsonl(const std::string& content) {
  EvalDataset ds;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      EvalRecord r;
      r.query_id = j.at("query_id").get<std::string>();
      r.question = j.at("question").get<std::string>();
      r.gold_passage_ids = j.value("gold_passage_ids", std::vector<std::string>{});
      r.gold_answers = j.value("gold_answers", std::vector<std::string>{});
      if (j.contains("generated_answer") && !j.at("generated_answer").is_null()) {
        r.generated_answer = j.at("generated_answer").get<std::string>();
      }
      if (r.question.empty()) throw DataError("empty question");
      ds.records.push_back(std::move(r));
    } catch (const std::exception& e) {
      ds.malformed.push_back(RowError{line_no, e.what()});
    }
  }
  return ds;
}

struct EvalConfig {
  std::size_t recall_k = 5;
  bool use_hyperbolic = true;
};

namespace detail {

inline nlohmann::json mean_or_null(double sum, std::size_t n) {
  return n == 0 ? nlohmann::json(nullptr) : nlohmann::json(sum / static_cast<double>(n));
}

inline nlohmann::json top_ids(const RankingList& list, std::size_t k) {
  return ranking_ids(truncate(list, k));
}

}  // namespace detail

// Rows are evaluated in dataset order; the report is a pure function of the
// dataset, index and configuration.
inline nlohmann::json run_eval(const EvalDataset& dataset, const RetrievalEngine& engine,
                               const EvalConfig& cfg, const CorpusStore& store) {
  const bool hyperbolic = cfg.use_hyperbolic && engine.hyperbolic_available();
  nlohmann::json rows = nlohmann::json::array();
  double sum_e = 0.0, sum_h = 0.0, sum_f = 0.0, sum_em = 0.0, sum_f1 = 0.0;
  std::size_t evaluated = 0, answered = 0;

  for (const EvalRecord& r : dataset.records) {
    nlohmann::json row{{"query_id", r.query_id}};
    std::vector<std::string> unknown;
    for (const auto& id : r.gold_passage_ids) {
      if (!store.has_passage(id)) unknown.push_back(id);
    }
    if (r.gold_passage_ids.empty()) {
      row["error"] = "no gold passage ids";
    } else if (!unknown.empty()) {
      row["error"] = "unknown gold passage id(s): " + nlohmann::json(unknown).dump();
    } else {
      try {
        const DualRanking dual = engine.retrieve(r.question, hyperbolic);
        const RankingList& re = dual.euclidean.ranking;
        const RankingList rh = dual.hyperbolic ? dual.hyperbolic->ranking : RankingList{};
        const RankingList rf = fuse(re, rh);
        const std::set<std::string> gold(r.gold_passage_ids.begin(), r.gold_passage_ids.end());
        const double recall_e = recall_at_k(re, gold, cfg.recall_k);
        const double recall_f = recall_at_k(rf, gold, cfg.recall_k);
        row["recall"] = {{"euclidean", recall_e}, {"fused", recall_f}};
        row["retrieved"] = {{"euclidean", detail::top_ids(re, cfg.recall_k)},
                            {"fused", detail::top_ids(rf, cfg.recall_k)}};
        if (hyperbolic) {
          const double recall_h = recall_at_k(rh, gold, cfg.recall_k);
          row["recall"]["hyperbolic"] = recall_h;
          row["retrieved"]["hyperbolic"] = detail::top_ids(rh, cfg.recall_k);
          sum_h += recall_h;
        } else {
          row["recall"]["hyperbolic"] = nullptr;
          row["retrieved"]["hyperbolic"] = nullptr;
        }
        sum_e += recall_e;
        sum_f += recall_f;
        ++evaluated;
      } catch (const DomainError& e) {
        row["error"] = std::string("query could not be scored: ") + e.what();
      }
    }
    if (r.generated_answer) {
      const int em = exact_match(*r.generated_answer, r.gold_answers);
      const double f1 = token_f1(*r.generated_answer, r.gold_answers);
      row["em"] = em;
      row["f1"] = f1;
      sum_em += em;
      sum_f1 += f1;
      ++answered;
    }
    rows.push_back(std::move(row));
  }

  nlohmann::json malformed = nlohmann::json::array();
  for (const RowError& e : dataset.malformed) malformed.push_back({{"line", e.line}, {"message", e.message}});

  nlohmann::json report;
  report["queries"] = dataset.records.size();
  report["evaluated"] = evaluated;
  report["recall_k"] = cfg.recall_k;
  report["hyperbolic_enabled"] = hyperbolic;
  report["mean_recall"] = {{"euclidean", detail::mean_or_null(sum_e, evaluated)},
                           {"hyperbolic", hyperbolic ? detail::mean_or_null(sum_h, evaluated) : nullptr},
                           {"fused", detail::mean_or_null(sum_f, evaluated)}};
  if (answered > 0) {
    report["qa"] = {{"answered", answered},
                    {"mean_em", sum_em / static_cast<double>(answered)},
                    {"mean_f1", sum_f1 / static_cast<double>(answered)}};
  }
  report["rows"] = std::move(rows);
  report["malformed_rows"] = std::move(malformed);
  return report;
}

}  // namespace hyperrag
