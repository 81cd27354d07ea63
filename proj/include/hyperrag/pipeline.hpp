#pragma once

// End-to-end orchestration: corpus -> index bundle -> trained projection.

#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyperrag/corpus.hpp"
#include "hyperrag/embedding.hpp"
#include "hyperrag/errors.hpp"
#include "hyperrag/graph.hpp"
#include "hyperrag/index_store.hpp"
#include "hyperrag/projection.hpp"

namespace hyperrag {

struct IndexBuildConfig {
  ChunkConfig chunk;
  GraphConfig graph;
  std::size_t encoder_batch_size = 64;
  unsigned extraction_threads = 1;
  double curvature = 1.0;
};

struct IndexSummary {
  std::size_t documents = 0;
  std::size_t passages = 0;
  std::size_t entities = 0;
  std::size_t facts = 0;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t entity_entity_edges = 0;
  std::size_t passage_entity_edges = 0;
  std::size_t synonymy_edges = 0;

  nlohmann::json to_json() const {
    return nlohmann::json{{"documents", documents},
                          {"passages", passages},
                          {"entities", entities},
                          {"facts", facts},
                          {"nodes", nodes},
                          {"edges", edges},
                          {"entity_entity_edges", entity_entity_edges},
                          {"passage_entity_edges", passage_entity_edges},
                          {"synonymy_edges", synonymy_edges}};
  }
};

inline IndexSummary summarize(const IndexBundle& index, std::size_t documents) {
  IndexSummary s;
  s.documents = documents;
  s.passages = index.store.passages().size();
  s.entities = index.store.entities().size();
  s.facts = index.store.facts().size();
  s.nodes = index.graph.num_nodes();
  s.edges = index.graph.edges().size();
  s.entity_entity_edges = index.graph.count_edges(EdgeKind::entity_entity);
  s.passage_entity_edges = index.graph.count_edges(EdgeKind::passage_entity);
  s.synonymy_edges = index.graph.count_edges(EdgeKind::synonymy);
  return s;
}

// One {doc_id, text[, metadata]} object per line. Blank lines are skipped.
inline std::vector<Document> parse_corpus_jsonl(const std::string& content, const std::string& source) {
  std::vector<Document> docs;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Document d;
      d.doc_id = j.at("doc_id").get<std::string>();
      d.text = j.at("text").get<std::string>();
      if (j.contains("metadata")) {
        for (const auto& [k, v] : j.at("metadata").items()) {
          d.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
      }
      docs.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return docs;
}

inline IndexBundle build_index(const std::vector<Document>& docs, const IndexBuildConfig& cfg,
                               const ExtractorClient& extractor, const std::string& extractor_name,
                               const EncoderClient& encoder) {
  if (docs.empty()) throw DataError("corpus contains no documents");
  CorpusStore store = build_corpus(docs, cfg.chunk, extractor, cfg.extraction_threads);
  if (store.passages().empty()) throw DataError("corpus produced no passages");

  EmbeddingCache cache(encoder.dimension(), encoder.fingerprint());
  auto encode_kind = [&](NodeKind kind, const std::vector<std::string>& ids,
                         const std::vector<std::string>& texts) {
    auto vecs = encode_all(texts, encoder, cfg.encoder_batch_size);
    for (std::size_t i = 0; i < ids.size(); ++i) cache.put(kind, ids[i], std::move(vecs[i]));
  };
  {
    std::vector<std::string> ids, texts;
    for (const auto& p : store.passages()) {
      ids.push_back(p.passage_id);
      texts.push_back(p.text);
    }
    encode_kind(NodeKind::passage, ids, texts);
  }
  {
    std::vector<std::string> ids, texts;
    for (const auto& e : store.entities()) {
      ids.push_back(e.entity_id);
      texts.push_back(e.canonical_name);
    }
    encode_kind(NodeKind::entity, ids, texts);
  }
  {
    std::vector<std::string> ids, texts;
    for (const auto& f : store.facts()) {
      ids.push_back(f.fact_id);
      texts.push_back(f.text);
    }
    encode_kind(NodeKind::fact, ids, texts);
  }

  HeterogeneousGraph graph = build_graph(store, cache, cfg.graph);
  IndexMeta meta;
  meta.dim = encoder.dimension();
  meta.curvature = cfg.curvature;
  meta.encoder_fingerprint = encoder.fingerprint();
  meta.extractor = extractor_name;
  meta.synonymy_threshold = cfg.graph.synonymy_threshold;
  meta.chunk_max_chars = cfg.chunk.max_chars;
  return IndexBundle{std::move(store), std::move(graph), std::move(cache), std::nullopt, std::move(meta)};
}

// Trains the projection on the bundle's passage/fact containment pairs and
// stores the result in the bundle.
inline TrainResult train_index(IndexBundle& index, const ProjectionConfig& proj_cfg, const TrainConfig& cfg) {
  ProjectionConfig pc = proj_cfg;
  pc.dim = index.meta.dim;
  TrainResult result = train(index.vectors(NodeKind::passage), index.vectors(NodeKind::fact),
                             Associations::from_store(index.store), pc, cfg);
  index.projection = result.params;
  index.meta.curvature = pc.curvature;
  index.meta.train_seed = cfg.seed;
  return result;
}

}  // namespace hyperrag
