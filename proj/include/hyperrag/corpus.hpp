#pragma once

// Documents -> passages -> (entities, facts). Extraction goes through the
// ExtractorClient interface; StubExtractor is the deterministic offline
// implementation used by tests and the default CLI configuration.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hyperrag/errors.hpp"
#include "hyperrag/text.hpp"

namespace hyperrag {

enum class NodeKind : std::uint8_t { passage = 0, entity = 1, fact = 2 };

inline const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::passage: return "passage";
    case NodeKind::entity: return "entity";
    case NodeKind::fact: return "fact";
  }
  return "unknown";
}

struct Document {
  std::string doc_id;
  std::string text;
  std::map<std::string, std::string> metadata;
};

struct Passage {
  std::string passage_id;
  std::string doc_id;
  std::uint32_t ordinal = 0;
  std::string text;

  friend bool operator==(const Passage&, const Passage&) = default;
};

struct Entity {
  std::string entity_id;
  std::string canonical_name;

  friend bool operator==(const Entity&, const Entity&) = default;
};

struct Fact {
  std::string fact_id;
  std::string subject;  // entity_id
  std::string relation;
  std::string object;   // entity_id
  std::string source_passage;
  std::string text;     // "subject relation object" over canonical names

  friend bool operator==(const Fact&, const Fact&) = default;
};

struct Triple {
  std::string subject;
  std::string relation;
  std::string object;

  friend bool operator==(const Triple&, const Triple&) = default;
};

struct Extraction {
  std::vector<std::string> entities;
  std::vector<Triple> triples;
};

struct ChunkConfig {
  std::size_t max_chars = 1200;
};

inline std::string make_passage_id(std::string_view doc_id, std::uint32_t ordinal) {
  return std::string(doc_id) + "#" + std::to_string(ordinal);
}

// Greedy sentence packing. Sentences longer than the budget are hard split
// into budget-sized pieces.
inline std::vector<Passage> chunk_document(const Document& doc, const ChunkConfig& cfg) {
  if (cfg.max_chars == 0) throw DomainError("chunk budget must be positive");
  const std::string_view body = doc.text;
  std::vector<Passage> out;
  auto emit = [&](std::string_view piece) {
    piece = text::trim(piece);
    if (piece.empty()) return;
    const auto ordinal = static_cast<std::uint32_t>(out.size());
    out.push_back(Passage{make_passage_id(doc.doc_id, ordinal), doc.doc_id, ordinal,
                          std::string(piece)});
  };

  std::optional<std::pair<std::size_t, std::size_t>> open;
  auto flush = [&] {
    if (open) emit(body.substr(open->first, open->second - open->first));
    open.reset();
  };

  for (const auto& [begin, end] : text::sentence_spans(body)) {
    if (end - begin > cfg.max_chars) {
      flush();
      for (std::size_t at = begin; at < end; at += cfg.max_chars) {
        emit(body.substr(at, std::min(cfg.max_chars, end - at)));
      }
    } else if (!open) {
      open.emplace(begin, end);
    } else if (end - open->first <= cfg.max_chars) {
      open->second = end;
    } else {
      flush();
      open.emplace(begin, end);
    }
  }
  flush();
  return out;
}

class ExtractorClient {
 public:
  virtual ~ExtractorClient() = default;
  // Must be safe to call concurrently.
  virtual Extraction extract(const Passage& passage) const = 0;
};

// Entities are maximal runs of capitalized tokens; a token carrying trailing
// punctuation closes its run. Each pair of consecutive runs inside a sentence
// that is separated by a non-empty span of other tokens yields the triple
// (run, span, next run).
class StubExtractor final : public ExtractorClient {
 public:
  Extraction extract(const Passage& passage) const override {
    Extraction result;
    const std::string_view body = passage.text;
    for (const auto& [begin, end] : text::sentence_spans(body)) {
      extract_sentence(body.substr(begin, end - begin), result);
    }
    return result;
  }

 private:
  struct Token {
    std::string core;
    bool capitalized = false;
    bool leading_punct = false;
    bool trailing_punct = false;
  };

  static std::vector<Token> tokenize(std::string_view sentence) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < sentence.size()) {
      while (i < sentence.size() && text::is_space(sentence[i])) ++i;
      const std::size_t start = i;
      while (i < sentence.size() && !text::is_space(sentence[i])) ++i;
      std::string_view raw = sentence.substr(start, i - start);
      if (raw.empty()) continue;
      std::size_t b = 0;
      std::size_t e = raw.size();
      while (b < e && !text::is_alnum(raw[b])) ++b;
      while (e > b && !text::is_alnum(raw[e - 1])) --e;
      Token tok;
      tok.core = std::string(raw.substr(b, e - b));
      tok.leading_punct = b > 0;
      tok.trailing_punct = e < raw.size();
      tok.capitalized = !tok.core.empty() && text::is_upper(tok.core.front());
      tokens.push_back(std::move(tok));
    }
    return tokens;
  }

  static void add_entity(Extraction& out, const std::string& surface) {
    if (std::find(out.entities.begin(), out.entities.end(), surface) == out.entities.end()) {
      out.entities.push_back(surface);
    }
  }

  static void extract_sentence(std::string_view sentence, Extraction& out) {
    struct Run {
      std::string surface;
      std::size_t first = 0;
      std::size_t last = 0;  // inclusive token positions
    };
    const std::vector<Token> tokens = tokenize(sentence);
    std::vector<Run> runs;
    std::optional<Run> open;
    auto close = [&] {
      if (open) runs.push_back(std::move(*open));
      open.reset();
    };
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const Token& tok = tokens[i];
      if (!tok.capitalized) {
        close();
        continue;
      }
      if (open && tok.leading_punct) close();
      if (!open) {
        open = Run{tok.core, i, i};
      } else {
        open->surface += " " + tok.core;
        open->last = i;
      }
      if (tok.trailing_punct) close();
    }
    close();

    for (const Run& run : runs) add_entity(out, run.surface);
    for (std::size_t r = 0; r + 1 < runs.size(); ++r) {
      std::string relation;
      for (std::size_t i = runs[r].last + 1; i < runs[r + 1].first; ++i) {
        if (tokens[i].core.empty()) continue;
        if (!relation.empty()) relation += ' ';
        relation += tokens[i].core;
      }
      if (relation.empty()) continue;
      out.triples.push_back(Triple{runs[r].surface, std::move(relation), runs[r + 1].surface});
    }
  }
};

// Runs the client and enforces that every triple endpoint is listed among the
// returned entities.
inline Extraction extract(const Passage& passage, const ExtractorClient& extractor) {
  Extraction result = extractor.extract(passage);
  for (const Triple& t : result.triples) {
    for (const std::string* endpoint : {&t.subject, &t.object}) {
      if (std::find(result.entities.begin(), result.entities.end(), *endpoint) ==
          result.entities.end()) {
        result.entities.push_back(*endpoint);
      }
    }
  }
  return result;
}

// Passages, canonical entities and facts, plus the passage -> entity mention
// table. Vectors are in creation order; ids resolve through the lookup maps.
class CorpusStore {
 public:
  CorpusStore() = default;
  CorpusStore(std::vector<Passage> passages, std::vector<Entity> entities,
              std::vector<Fact> facts, std::vector<std::vector<std::uint32_t>> mentions)
      : passages_(std::move(passages)),
        entities_(std::move(entities)),
        facts_(std::move(facts)),
        mentions_(std::move(mentions)) {
    reindex();
  }

  const std::vector<Passage>& passages() const noexcept { return passages_; }
  const std::vector<Entity>& entities() const noexcept { return entities_; }
  const std::vector<Fact>& facts() const noexcept { return facts_; }
  // Sorted, de-duplicated entity indices mentioned by each passage.
  const std::vector<std::vector<std::uint32_t>>& mentions() const noexcept { return mentions_; }

  std::uint32_t passage_index(const std::string& id) const { return lookup(passage_ix_, id, "passage"); }
  std::uint32_t entity_index(const std::string& id) const { return lookup(entity_ix_, id, "entity"); }
  bool has_passage(const std::string& id) const { return passage_ix_.count(id) != 0; }
  bool has_entity(const std::string& id) const { return entity_ix_.count(id) != 0; }

  const std::vector<std::uint32_t>& fact_subjects() const noexcept { return fact_subject_; }
  const std::vector<std::uint32_t>& fact_objects() const noexcept { return fact_object_; }
  const std::vector<std::uint32_t>& fact_passages() const noexcept { return fact_passage_; }

 private:
  static std::uint32_t lookup(const std::unordered_map<std::string, std::uint32_t>& map,
                              const std::string& id, const char* kind) {
    auto it = map.find(id);
    if (it == map.end()) throw DataError(std::string("unknown ") + kind + " id '" + id + "'");
    return it->second;
  }

  void reindex() {
    if (mentions_.size() != passages_.size()) {
      throw DataError("mention table size does not match passage count");
    }
    for (std::uint32_t i = 0; i < passages_.size(); ++i) {
      if (!passage_ix_.emplace(passages_[i].passage_id, i).second) {
        throw DataError("duplicate passage id '" + passages_[i].passage_id + "'");
      }
    }
    for (std::uint32_t i = 0; i < entities_.size(); ++i) {
      if (!entity_ix_.emplace(entities_[i].entity_id, i).second) {
        throw DataError("duplicate entity id '" + entities_[i].entity_id + "'");
      }
    }
    for (const auto& row : mentions_) {
      for (std::uint32_t e : row) {
        if (e >= entities_.size()) throw DataError("mention refers to a missing entity");
      }
    }
    fact_subject_.clear();
    fact_object_.clear();
    fact_passage_.clear();
    for (const Fact& f : facts_) {
      fact_subject_.push_back(entity_index(f.subject));
      fact_object_.push_back(entity_index(f.object));
      fact_passage_.push_back(passage_index(f.source_passage));
    }
  }

  std::vector<Passage> passages_;
  std::vector<Entity> entities_;
  std::vector<Fact> facts_;
  std::vector<std::vector<std::uint32_t>> mentions_;
  std::unordered_map<std::string, std::uint32_t> passage_ix_;
  std::unordered_map<std::string, std::uint32_t> entity_ix_;
  std::vector<std::uint32_t> fact_subject_;
  std::vector<std::uint32_t> fact_object_;
  std::vector<std::uint32_t> fact_passage_;
};

struct CorpusBuildStats {
  std::size_t dropped_entities = 0;  // surfaces empty after normalization
  std::size_t dropped_triples = 0;
};

// Chunks every document, extracts (optionally on several threads) and merges
// the per-passage results in passage order on the calling thread.
inline CorpusStore build_corpus(const std::vector<Document>& docs, const ChunkConfig& chunk_cfg,
                                const ExtractorClient& extractor, unsigned threads = 1,
                                CorpusBuildStats* stats = nullptr) {
  std::vector<Passage> passages;
  {
    std::unordered_map<std::string, bool> seen;
    for (const Document& doc : docs) {
      if (!seen.emplace(doc.doc_id, true).second) {
        throw DataError("duplicate doc_id '" + doc.doc_id + "'");
      }
      for (Passage& p : chunk_document(doc, chunk_cfg)) passages.push_back(std::move(p));
    }
  }

  std::vector<Extraction> extractions(passages.size());
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(passages.size())));
  if (threads <= 1) {
    for (std::size_t i = 0; i < passages.size(); ++i) extractions[i] = extract(passages[i], extractor);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < passages.size(); i += threads) {
            extractions[i] = extract(passages[i], extractor);
          }
        } catch (...) {
          failures[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
  }

  CorpusBuildStats local_stats;
  std::vector<Entity> entities;
  std::unordered_map<std::string, std::uint32_t> by_name;
  std::vector<Fact> facts;
  std::vector<std::vector<std::uint32_t>> mentions(passages.size());

  auto canonical = [](const std::string& surface) -> std::optional<std::string> {
    std::string name = text::collapse_lower(surface);
    if (name.empty()) return std::nullopt;
    return name;
  };
  auto intern = [&](const std::string& name) {
    auto [it, inserted] = by_name.emplace(name, static_cast<std::uint32_t>(entities.size()));
    if (inserted) entities.push_back(Entity{"e" + std::to_string(entities.size()), name});
    return it->second;
  };

  for (std::size_t i = 0; i < passages.size(); ++i) {
    auto& row = mentions[i];
    for (const std::string& surface : extractions[i].entities) {
      auto name = canonical(surface);
      if (!name) {
        ++local_stats.dropped_entities;
        continue;
      }
      row.push_back(intern(*name));
    }
    for (const Triple& t : extractions[i].triples) {
      auto subj = canonical(t.subject);
      auto obj = canonical(t.object);
      if (!subj || !obj) {
        ++local_stats.dropped_triples;
        continue;
      }
      const std::uint32_t s = intern(*subj);
      const std::uint32_t o = intern(*obj);
      row.push_back(s);
      row.push_back(o);
      facts.push_back(Fact{"f" + std::to_string(facts.size()), entities[s].entity_id, t.relation,
                           entities[o].entity_id, passages[i].passage_id,
                           *subj + " " + t.relation + " " + *obj});
    }
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  if (stats) *stats = local_stats;
  return CorpusStore(std::move(passages), std::move(entities), std::move(facts),
                     std::move(mentions));
}

}  // namespace hyperrag
