#pragma once

// On-disk index directory:
//   meta.json          versions, dimension, curvature, fingerprints, counts
//   passages.jsonl     {passage_id, doc_id, ordinal, text, entities: [entity_id]}
//   entities.jsonl     {entity_id, canonical_name}
//   facts.jsonl        {fact_id, subject, relation, object, source_passage, text}
//   graph.bin          HeterogeneousGraph
//   emb_euclidean.bin  EmbeddingCache
//   projection.bin     ProjectionParams, present once trained
// Every file is written canonically, so saving a loaded index reproduces it
// byte for byte.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hyperrag/binary_io.hpp"
#include "hyperrag/corpus.hpp"
#include "hyperrag/embedding.hpp"
#include "hyperrag/errors.hpp"
#include "hyperrag/graph.hpp"
#include "hyperrag/projection.hpp"

namespace hyperrag {

inline constexpr std::uint32_t kIndexFormatVersion = 1;

struct IndexMeta {
  std::uint32_t format_version = kIndexFormatVersion;
  std::size_t dim = 0;
  double curvature = 1.0;
  std::string encoder_fingerprint;
  std::string extractor;
  double synonymy_threshold = 0.8;
  std::size_t chunk_max_chars = 1200;
  std::optional<std::uint64_t> train_seed;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["format_version"] = format_version;
    j["dim"] = dim;
    j["curvature"] = curvature;
    j["encoder_fingerprint"] = encoder_fingerprint;
    j["extractor"] = extractor;
    j["synonymy_threshold"] = synonymy_threshold;
    j["chunk_max_chars"] = chunk_max_chars;
    j["train_seed"] = train_seed ? nlohmann::json(*train_seed) : nlohmann::json(nullptr);
    return j;
  }

  static IndexMeta from_json(const nlohmann::json& j) {
    IndexMeta m;
    m.format_version = j.at("format_version").get<std::uint32_t>();
    if (m.format_version != kIndexFormatVersion) {
      throw ConfigError("index format version " + std::to_string(m.format_version) +
                        " is not supported (expected " + std::to_string(kIndexFormatVersion) +
                        "); rebuild the index");
    }
    m.dim = j.at("dim").get<std::size_t>();
    m.curvature = j.at("curvature").get<double>();
    m.encoder_fingerprint = j.at("encoder_fingerprint").get<std::string>();
    m.extractor = j.at("extractor").get<std::string>();
    m.synonymy_threshold = j.at("synonymy_threshold").get<double>();
    m.chunk_max_chars = j.at("chunk_max_chars").get<std::size_t>();
    if (!j.at("train_seed").is_null()) m.train_seed = j.at("train_seed").get<std::uint64_t>();
    return m;
  }
};

struct IndexBundle {
  CorpusStore store;
  HeterogeneousGraph graph;
  EmbeddingCache embeddings;
  std::optional<ProjectionParams> projection;
  IndexMeta meta;

  // Dense per-kind embedding tables in store order.
  std::vector<EuclideanVector> vectors(NodeKind kind) const {
    std::vector<EuclideanVector> out;
    auto take = [&](const std::string& id) {
      auto v = embeddings.get(kind, id);
      if (!v) throw DataError(std::string("missing ") + to_string(kind) + " embedding for '" + id + "'");
      out.push_back(std::move(*v));
    };
    switch (kind) {
      case NodeKind::passage:
        for (const auto& p : store.passages()) take(p.passage_id);
        break;
      case NodeKind::entity:
        for (const auto& e : store.entities()) take(e.entity_id);
        break;
      case NodeKind::fact:
        for (const auto& f : store.facts()) take(f.fact_id);
        break;
    }
    return out;
  }
};

namespace index_files {
inline constexpr const char* kMeta = "meta.json";
inline constexpr const char* kPassages = "passages.jsonl";
inline constexpr const char* kEntities = "entities.jsonl";
inline constexpr const char* kFacts = "facts.jsonl";
inline constexpr const char* kGraph = "graph.bin";
inline constexpr const char* kEmbeddings = "emb_euclidean.bin";
inline constexpr const char* kProjection = "projection.bin";
}  // namespace index_files

namespace detail {

inline std::string path_in(const std::filesystem::path& dir, const char* name) {
  return (dir / name).string();
}

template <typename RowFn>
void read_jsonl(const std::string& path, RowFn&& fn) {
  const std::string content = io::read_file(path);
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      fn(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw CorruptionError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace detail

inline void save_index(const IndexBundle& index, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string passages;
  for (std::size_t i = 0; i < index.store.passages().size(); ++i) {
    const Passage& p = index.store.passages()[i];
    nlohmann::json ents = nlohmann::json::array();
    for (std::uint32_t e : index.store.mentions()[i]) ents.push_back(index.store.entities()[e].entity_id);
    nlohmann::json row{{"passage_id", p.passage_id}, {"doc_id", p.doc_id},
                       {"ordinal", p.ordinal},       {"text", p.text},
                       {"entities", std::move(ents)}};
    passages += row.dump() + "\n";
  }
  std::string entities;
  for (const Entity& e : index.store.entities()) {
    entities += nlohmann::json{{"entity_id", e.entity_id}, {"canonical_name", e.canonical_name}}.dump() + "\n";
  }
  std::string facts;
  for (const Fact& f : index.store.facts()) {
    facts += nlohmann::json{{"fact_id", f.fact_id},   {"subject", f.subject},
                            {"relation", f.relation}, {"object", f.object},
                            {"source_passage", f.source_passage}, {"text", f.text}}
                 .dump() +
             "\n";
  }
  io::write_file(detail::path_in(dir, index_files::kPassages), passages);
  io::write_file(detail::path_in(dir, index_files::kEntities), entities);
  io::write_file(detail::path_in(dir, index_files::kFacts), facts);
  io::write_file(detail::path_in(dir, index_files::kGraph), index.graph.serialize());
  io::write_file(detail::path_in(dir, index_files::kEmbeddings), index.embeddings.serialize());
  const auto projection_path = dir / index_files::kProjection;
  if (index.projection) {
    io::write_file(projection_path.string(), index.projection->serialize());
  } else {
    std::filesystem::remove(projection_path);
  }
  io::write_file(detail::path_in(dir, index_files::kMeta), index.meta.to_json().dump(2) + "\n");
}

inline IndexBundle load_index(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw DataError("index directory '" + dir.string() + "' does not exist");
  }
  IndexMeta meta;
  {
    const std::string path = detail::path_in(dir, index_files::kMeta);
    try {
      meta = IndexMeta::from_json(nlohmann::json::parse(io::read_file(path)));
    } catch (const nlohmann::json::exception& e) {
      throw CorruptionError(path + ": " + e.what());
    }
  }

  std::vector<Entity> entities;
  detail::read_jsonl(detail::path_in(dir, index_files::kEntities), [&](const nlohmann::json& j) {
    entities.push_back(Entity{j.at("entity_id").get<std::string>(), j.at("canonical_name").get<std::string>()});
  });
  std::unordered_map<std::string, std::uint32_t> entity_ix;
  for (std::uint32_t i = 0; i < entities.size(); ++i) entity_ix.emplace(entities[i].entity_id, i);

  std::vector<Passage> passages;
  std::vector<std::vector<std::uint32_t>> mentions;
  detail::read_jsonl(detail::path_in(dir, index_files::kPassages), [&](const nlohmann::json& j) {
    passages.push_back(Passage{j.at("passage_id").get<std::string>(), j.at("doc_id").get<std::string>(),
                               j.at("ordinal").get<std::uint32_t>(), j.at("text").get<std::string>()});
    std::vector<std::uint32_t> row;
    for (const auto& id : j.at("entities")) {
      auto it = entity_ix.find(id.get<std::string>());
      if (it == entity_ix.end()) throw CorruptionError("passage mentions unknown entity " + id.dump());
      row.push_back(it->second);
    }
    mentions.push_back(std::move(row));
  });

  std::vector<Fact> facts;
  detail::read_jsonl(detail::path_in(dir, index_files::kFacts), [&](const nlohmann::json& j) {
    facts.push_back(Fact{j.at("fact_id").get<std::string>(), j.at("subject").get<std::string>(),
                         j.at("relation").get<std::string>(), j.at("object").get<std::string>(),
                         j.at("source_passage").get<std::string>(), j.at("text").get<std::string>()});
  });

  CorpusStore store = [&] {
    try {
      return CorpusStore(std::move(passages), std::move(entities), std::move(facts), std::move(mentions));
    } catch (const CorruptionError&) {
      throw;
    } catch (const DataError& e) {
      throw CorruptionError(dir.string() + ": inconsistent stores: " + e.what());
    }
  }();

  const std::string graph_path = detail::path_in(dir, index_files::kGraph);
  HeterogeneousGraph graph = HeterogeneousGraph::deserialize(io::read_file(graph_path), graph_path);
  if (graph.num_passages() != store.passages().size() || graph.num_entities() != store.entities().size()) {
    throw CorruptionError(graph_path + ": node counts do not match the passage/entity stores");
  }

  const std::string emb_path = detail::path_in(dir, index_files::kEmbeddings);
  EmbeddingCache embeddings = EmbeddingCache::load(emb_path, meta.encoder_fingerprint);
  if (embeddings.dimension() != meta.dim) {
    throw CorruptionError(emb_path + ": dimension does not match meta.json");
  }

  std::optional<ProjectionParams> projection;
  const auto projection_path = dir / index_files::kProjection;
  if (std::filesystem::exists(projection_path)) {
    projection = ProjectionParams::deserialize(io::read_file(projection_path.string()),
                                               projection_path.string());
    if (projection->dim() != meta.dim) {
      throw CorruptionError(projection_path.string() + ": dimension does not match meta.json");
    }
  }

  return IndexBundle{std::move(store), std::move(graph), std::move(embeddings), std::move(projection),
                     std::move(meta)};
}

}  // namespace hyperrag
