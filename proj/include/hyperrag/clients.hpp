#pragma once

// HTTP-backed extractor and encoder clients.
//
// Extractor: POST {passage_id, text} -> {entities: [string], triples: [[s, r, o]]}
// Encoder:   POST {texts: [string]}  -> {vectors: [[number]]}
//
// An optional bearer token is read from an environment variable named in the
// configuration. Connection failures and non-2xx replies raise
// TransportError; replies that break the contract raise ParseError carrying
// the raw body.

#include <chrono>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "hyperrag/corpus.hpp"
#include "hyperrag/embedding.hpp"
#include "hyperrag/errors.hpp"

namespace hyperrag {

struct HttpEndpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/'

  static HttpEndpoint parse(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("client URL '" + url + "' has no scheme");
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http") {
      throw ConfigError("client URL '" + url + "': only plain http endpoints are supported");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    HttpEndpoint ep;
    ep.origin = url.substr(0, path_start);
    ep.path = path_start == std::string::npos ? "/" : url.substr(path_start);
    if (ep.origin.size() <= scheme_end + 3) throw ConfigError("client URL '" + url + "' has no host");
    return ep;
  }
};

inline std::optional<std::string> credential_from_env(const std::string& env_var) {
  if (env_var.empty()) return std::nullopt;
  const char* value = std::getenv(env_var.c_str());
  if (value == nullptr || *value == '\0') {
    throw ConfigError("credential environment variable '" + env_var + "' is not set");
  }
  return std::string(value);
}

class HttpJsonClient {
 public:
  HttpJsonClient(std::string url, std::optional<std::string> bearer_token,
                 std::chrono::seconds timeout = std::chrono::seconds(60))
      : url_(std::move(url)), endpoint_(HttpEndpoint::parse(url_)),
        token_(std::move(bearer_token)), timeout_(timeout) {}

  const std::string& url() const noexcept { return url_; }

  // A fresh connection per call keeps the client safe to share across threads.
  nlohmann::json post(const nlohmann::json& body) const {
    httplib::Client client(endpoint_.origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    httplib::Headers headers;
    if (token_) headers.emplace("Authorization", "Bearer " + *token_);
    auto res = client.Post(endpoint_.path, headers, body.dump(), "application/json");
    if (!res) {
      throw TransportError("POST " + url_ + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
      throw TransportError("POST " + url_ + " returned HTTP " + std::to_string(res->status));
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("response from " + url_ + " is not JSON: " + e.what(), res->body);
    }
  }

 private:
  std::string url_;
  HttpEndpoint endpoint_;
  std::optional<std::string> token_;
  std::chrono::seconds timeout_;
};

inline Extraction parse_extraction_response(const nlohmann::json& j) {
  const std::string raw = j.dump();
  try {
    Extraction out;
    for (const auto& e : j.at("entities")) out.entities.push_back(e.get<std::string>());
    for (const auto& t : j.at("triples")) {
      if (!t.is_array() || t.size() != 3) throw ParseError("triple must be a 3-element array", raw);
      out.triples.push_back(Triple{t[0].get<std::string>(), t[1].get<std::string>(), t[2].get<std::string>()});
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed extractor response: ") + e.what(), raw);
  }
}

class HttpExtractor final : public ExtractorClient {
 public:
  explicit HttpExtractor(HttpJsonClient client) : client_(std::move(client)) {}

  Extraction extract(const Passage& passage) const override {
    return parse_extraction_response(
        client_.post({{"passage_id", passage.passage_id}, {"text", passage.text}}));
  }

 private:
  HttpJsonClient client_;
};

class HttpEncoder final : public EncoderClient {
 public:
  HttpEncoder(HttpJsonClient client, std::size_t dim) : client_(std::move(client)), dim_(dim) {
    if (dim_ == 0) throw ConfigError("encoder dimension must be positive");
  }

  std::size_t dimension() const override { return dim_; }
  std::string fingerprint() const override {
    return "http:" + client_.url() + ":d=" + std::to_string(dim_);
  }

  std::vector<EuclideanVector> encode_batch(const std::vector<std::string>& texts) const override {
    const nlohmann::json response = client_.post({{"texts", texts}});
    std::vector<EuclideanVector> out;
    try {
      for (const auto& row : response.at("vectors")) out.push_back(row.get<EuclideanVector>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed encoder response: ") + e.what(), response.dump());
    }
    check_encoder_output(out, texts.size(), dim_);
    return out;
  }

 private:
  HttpJsonClient client_;
  std::size_t dim_;
};

}  // namespace hyperrag
