#pragma once

// Flat JSON application config shared by all CLI subcommands. Command-line
// flags override file values; every module config is re-validated on use.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <set>
#include <string>

#include <json.hpp>

#include "hyperrag/binary_io.hpp"
#include "hyperrag/clients.hpp"
#include "hyperrag/corpus.hpp"
#include "hyperrag/embedding.hpp"
#include "hyperrag/errors.hpp"
#include "hyperrag/eval.hpp"
#include "hyperrag/pipeline.hpp"
#include "hyperrag/projection.hpp"
#include "hyperrag/retrieval.hpp"

namespace hyperrag {

struct AppConfig {
  std::string corpus;
  std::string index_dir = "index";
  std::string encoder = "stub";    // "stub" or an http:// URL
  std::string extractor = "stub";  // "stub" or an http:// URL
  std::string credentials_env;     // env var holding a bearer token for the clients
  std::size_t dim = 256;
  double curvature = 1.0;
  double alpha = 0.4;
  double beta = 0.5;
  double gamma = 0.1;
  double tau_syn = 0.8;
  double damping = 0.5;
  std::size_t top_k_facts = 5;
  double seed_mix = 0.5;
  double tol = 1e-8;
  std::size_t max_iter = 1000;
  std::size_t passage_prior_limit = 50;
  std::uint64_t seed = 42;
  std::size_t top = 5;
  std::size_t recall_k = 5;
  std::size_t chunk_max_chars = 1200;
  double learning_rate = 0.05;
  std::size_t epochs = 200;
  std::size_t negatives = 1;
  std::size_t batch_size = 0;
  std::size_t encoder_batch_size = 64;
  unsigned extraction_threads = 1;

  static AppConfig from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    AppConfig c;
    static const std::set<std::string> known = {
        "corpus", "index_dir", "encoder", "extractor", "credentials_env", "dim", "curvature",
        "alpha", "beta", "gamma", "tau_syn", "damping", "top_k_facts", "seed_mix", "tol",
        "max_iter", "passage_prior_limit", "seed", "top", "recall_k", "chunk_max_chars",
        "learning_rate", "epochs", "negatives", "batch_size", "encoder_batch_size",
        "extraction_threads"};
    for (const auto& [key, value] : j.items()) {
      if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
    try {
      auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
      };
      get("corpus", c.corpus);
      get("index_dir", c.index_dir);
      get("encoder", c.encoder);
      get("extractor", c.extractor);
      get("credentials_env", c.credentials_env);
      get("dim", c.dim);
      get("curvature", c.curvature);
      get("alpha", c.alpha);
      get("beta", c.beta);
      get("gamma", c.gamma);
      get("tau_syn", c.tau_syn);
      get("damping", c.damping);
      get("top_k_facts", c.top_k_facts);
      get("seed_mix", c.seed_mix);
      get("tol", c.tol);
      get("max_iter", c.max_iter);
      get("passage_prior_limit", c.passage_prior_limit);
      get("seed", c.seed);
      get("top", c.top);
      get("recall_k", c.recall_k);
      get("chunk_max_chars", c.chunk_max_chars);
      get("learning_rate", c.learning_rate);
      get("epochs", c.epochs);
      get("negatives", c.negatives);
      get("batch_size", c.batch_size);
      get("encoder_batch_size", c.encoder_batch_size);
      get("extraction_threads", c.extraction_threads);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("invalid config value: ") + e.what());
    }
    return c;
  }

  static AppConfig load(const std::string& path) {
    try {
      return from_json(nlohmann::json::parse(io::read_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(path + ": " + e.what());
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
  }

  ProjectionConfig projection() const {
    ProjectionConfig p{dim, alpha, beta, curvature};
    ProjectionParams check(p);  // throws on alpha/beta/curvature violations
    (void)check;
    return p;
  }

  TrainConfig training() const {
    TrainConfig t{gamma, learning_rate, epochs, negatives, seed, batch_size};
    t.validate();
    return t;
  }

  RetrievalConfig retrieval() const {
    RetrievalConfig r{top_k_facts, seed_mix, damping, tol, max_iter, passage_prior_limit};
    r.validate();
    return r;
  }

  IndexBuildConfig index_build() const {
    if (chunk_max_chars == 0) throw ConfigError("chunk_max_chars must be positive");
    if (!(tau_syn > 0.0 && tau_syn <= 1.0)) throw ConfigError("tau_syn must lie in (0, 1]");
    if (encoder_batch_size == 0) throw ConfigError("encoder_batch_size must be positive");
    if (!(curvature > 0.0)) throw ConfigError("curvature must be positive");
    IndexBuildConfig b;
    b.chunk.max_chars = chunk_max_chars;
    b.graph.synonymy_threshold = tau_syn;
    b.encoder_batch_size = encoder_batch_size;
    b.extraction_threads = extraction_threads == 0 ? 1 : extraction_threads;
    b.curvature = curvature;
    return b;
  }

  EvalConfig evaluation(bool use_hyperbolic) const {
    if (recall_k == 0) throw ConfigError("recall_k must be positive");
    return EvalConfig{recall_k, use_hyperbolic};
  }

  void validate_all() const {
    (void)projection();
    (void)training();
    (void)retrieval();
    (void)index_build();
    (void)evaluation(true);
    if (dim == 0) throw ConfigError("dim must be positive");
  }

  std::unique_ptr<EncoderClient> make_encoder() const {
    if (encoder == "stub") return std::make_unique<HashingEncoder>(dim);
    return std::make_unique<HttpEncoder>(HttpJsonClient(encoder, credential_from_env(credentials_env)), dim);
  }

  std::unique_ptr<ExtractorClient> make_extractor() const {
    if (extractor == "stub") return std::make_unique<StubExtractor>();
    return std::make_unique<HttpExtractor>(HttpJsonClient(extractor, credential_from_env(credentials_env)));
  }
};

}  // namespace hyperrag
