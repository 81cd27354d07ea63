#include <gtest/gtest.h>

#include <filesystem>

#include "hyperrag/pipeline.hpp"
#include "support/fixtures.hpp"

using namespace hyperrag;
namespace fs = std::filesystem;

namespace {

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    out[entry.path().filename().string()] = io::read_file(entry.path().string());
  }
  return out;
}

IndexBundle toy_index() {
  return build_index(fixtures::toy_corpus(), IndexBuildConfig{}, StubExtractor{}, "stub", HashingEncoder());
}

}  // namespace

TEST(BinaryIo, RoundTripAndTruncation) {
  io::BinaryWriter w;
  w.u8(7);
  w.u32(0xdeadbeef);
  w.u64(1ull << 40);
  w.f64(-0.1);
  w.str("hello");
  io::BinaryReader r(w.bytes(), "mem");
  EXPECT_EQ(r.u8(), 7);
  EXPECT_EQ(r.u32(), 0xdeadbeefu);
  EXPECT_EQ(r.u64(), 1ull << 40);
  EXPECT_EQ(r.f64(), -0.1);
  EXPECT_EQ(r.str(), "hello");
  EXPECT_NO_THROW(r.expect_end());
  const std::string cut = w.bytes().substr(0, 10);
  io::BinaryReader short_reader(cut, "mem");
  short_reader.u8();
  short_reader.u32();
  EXPECT_THROW(short_reader.u64(), CorruptionError);
}

TEST(IndexStore, SaveLoadSaveIsByteIdentical) {
  auto idx = toy_index();
  TrainConfig tc;
  tc.epochs = 3;
  train_index(idx, ProjectionConfig{}, tc);
  fixtures::TempDir a("idx-a"), b("idx-b");
  save_index(idx, a.path());
  save_index(load_index(a.path()), b.path());
  const auto first = snapshot(a.path());
  EXPECT_EQ(first, snapshot(b.path()));
  EXPECT_EQ(first.size(), 7u);
}

TEST(IndexStore, LoadPreservesContent) {
  const auto idx = toy_index();
  fixtures::TempDir dir("idx");
  save_index(idx, dir.path());
  const auto back = load_index(dir.path());
  EXPECT_FALSE(back.projection.has_value());
  EXPECT_FALSE(fs::exists(dir.path() / "projection.bin"));
  EXPECT_EQ(back.store.passages().size(), idx.store.passages().size());
  EXPECT_EQ(back.store.mentions(), idx.store.mentions());
  EXPECT_EQ(back.graph.serialize(), idx.graph.serialize());
  EXPECT_EQ(back.meta.encoder_fingerprint, HashingEncoder().fingerprint());
}

TEST(IndexStore, MissingDirectoryIsDataError) {
  EXPECT_THROW(load_index("/nonexistent/hyperrag-index"), DataError);
}

TEST(IndexStore, TruncatedGraphIsCorruption) {
  fixtures::TempDir dir("idx");
  save_index(toy_index(), dir.path());
  const auto path = (dir.path() / "graph.bin").string();
  const std::string bytes = io::read_file(path);
  io::write_file(path, bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(load_index(dir.path()), CorruptionError);
}

TEST(IndexStore, BrokenJsonlIsCorruption) {
  fixtures::TempDir dir("idx");
  save_index(toy_index(), dir.path());
  io::write_file((dir.path() / "facts.jsonl").string(), "{not json\n");
  EXPECT_THROW(load_index(dir.path()), CorruptionError);
}

TEST(IndexStore, VersionMismatchAsksForRebuild) {
  fixtures::TempDir dir("idx");
  save_index(toy_index(), dir.path());
  const auto meta_path = (dir.path() / "meta.json").string();
  auto meta = nlohmann::json::parse(io::read_file(meta_path));
  meta["format_version"] = 99;
  io::write_file(meta_path, meta.dump());
  try {
    load_index(dir.path());
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("rebuild"), std::string::npos);
  }
}

TEST(Pipeline, TwoDocumentCounts) {
  const std::vector<Document> docs = {{"a", "Paris is the capital of France.", {}},
                                      {"b", "Lyon lies in France. Rome is old.", {}}};
  const auto idx = build_index(docs, IndexBuildConfig{}, StubExtractor{}, "stub", HashingEncoder());
  const auto s = summarize(idx, docs.size());
  EXPECT_EQ(s.passages, 2u);
  EXPECT_EQ(s.entities, 4u);  // paris, france, lyon, rome
  EXPECT_EQ(s.facts, 2u);
  EXPECT_EQ(s.entity_entity_edges, 2u);
  EXPECT_EQ(s.passage_entity_edges, 5u);
}

TEST(Pipeline, EmptyCorpusIsDataError) {
  EXPECT_THROW(build_index({}, IndexBuildConfig{}, StubExtractor{}, "stub", HashingEncoder()), DataError);
  EXPECT_THROW(parse_corpus_jsonl("{\"doc_id\": 1}\n", "mem"), DataError);
}

TEST(Pipeline, RebuildIsByteIdentical) {
  fixtures::TempDir a("idx-a"), b("idx-b");
  save_index(toy_index(), a.path());
  save_index(toy_index(), b.path());
  EXPECT_EQ(snapshot(a.path()), snapshot(b.path()));
}
