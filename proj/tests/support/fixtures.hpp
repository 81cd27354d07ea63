#pragma once

// Frozen corpora shared by the unit tests and the acceptance binary.

#include <array>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hyperrag/hyperrag.hpp"

namespace fixtures {

// 20 one-sentence documents, four capitalized runs each, so the stub
// extractor yields exactly three triples per passage (60 facts).
inline std::vector<hyperrag::Document> toy_corpus() {
  static const std::array<const char*, 12> people = {
      "Alice Moreau", "Bruno Keller", "Chiara Rossi", "Dmitri Volkov", "Elena Sato", "Farid Haddad",
      "Greta Lind",   "Hugo Brandt",  "Ines Duarte",  "Jonas Weber",   "Kira Novak", "Liam Byrne"};
  static const std::array<const char*, 8> places = {"Lisbon", "Oslo",  "Kyoto", "Quito",
                                                    "Dakar",  "Perth", "Turin", "Bergen"};
  static const std::array<const char*, 6> orgs = {"Northwind Labs", "Helix Institute", "Orbital Press",
                                                  "Cedar Foundation", "Atlas Works", "Lumen Society"};
  static const std::array<const char*, 5> topics = {"Graph Theory", "Marine Biology", "Cryptography",
                                                    "Volcanology", "Linguistics"};
  std::vector<hyperrag::Document> docs;
  for (std::size_t i = 0; i < 20; ++i) {
    const std::string text = std::string(people[i % people.size()]) + " joined " +
                             orgs[(i * 5 + 1) % orgs.size()] + " in " + places[(i * 3) % places.size()] +
                             " to study " + topics[(i * 7 + 2) % topics.size()] + ".";
    char id[16];
    std::snprintf(id, sizeof id, "toy%02zu", i);
    docs.push_back({id, text, {}});
  }
  return docs;
}

struct HubLeafQuery {
  std::string query_id;
  std::string question;
  std::string gold_passage_id;
};

struct HubLeafCorpus {
  std::vector<hyperrag::Document> docs;
  std::vector<HubLeafQuery> queries;
};

// Synthetic leaf names built from fixed syllables; unique per (i < 100, role < 4).
inline std::string leaf_name(std::size_t i, std::size_t role) {
  static const std::array<const char*, 10> head = {"Kor", "Vel", "Mir", "Tas", "Quon",
                                                    "Dre", "Lun", "Fex", "Bal", "Zir"};
  static const std::array<const char*, 10> mid = {"an", "ov", "ip", "ul", "es",
                                                   "ar", "om", "yt", "und", "or"};
  static const std::array<const char*, 4> tail = {"ex", "ith", "oma", "uld"};
  return std::string(head[(i + role) % head.size()]) + mid[(i / 10 + 2 * role) % mid.size()] +
         tail[role % tail.size()];
}

// One generic hub entity ("Science Council") mentioned by all 30 passages;
// every passage also names one specific leaf project and its subject. The
// ten queries ask about leaf subjects; the gold is the leaf passage.
inline HubLeafCorpus hub_leaf_corpus() {
  HubLeafCorpus out;
  for (std::size_t i = 0; i < 30; ++i) {
    const std::string project = leaf_name(i, 0);
    const std::string subject = leaf_name(i, 1) + " " + leaf_name(i, 2);
    const std::string text = "Science Council funds " + project + " Project across " + leaf_name(i, 3) +
                             ". " + project + " Project studies " + subject + " with Science Council grants.";
    char id[16];
    std::snprintf(id, sizeof id, "hub%02zu", i);
    out.docs.push_back({id, text, {}});
    if (i % 3 == 0) {
      out.queries.push_back({"q" + std::to_string(i / 3),
                             "Which Science Council project studies " + subject + "?",
                             std::string(id) + "#0"});
    }
  }
  return out;
}

inline std::string dataset_jsonl(const std::vector<HubLeafQuery>& queries) {
  std::string out;
  for (const auto& q : queries) {
    nlohmann::json row{{"query_id", q.query_id},
                       {"question", q.question},
                       {"gold_passage_ids", {q.gold_passage_id}},
                       {"gold_answers", nlohmann::json::array()}};
    out += row.dump() + "\n";
  }
  return out;
}

inline std::string corpus_jsonl(const std::vector<hyperrag::Document>& docs) {
  std::string out;
  for (const auto& d : docs) out += nlohmann::json{{"doc_id", d.doc_id}, {"text", d.text}}.dump() + "\n";
  return out;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("hyperrag-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
