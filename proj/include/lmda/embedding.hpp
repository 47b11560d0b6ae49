#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lmda/http.hpp"

namespace lmda {

// Text encoder producing L2-normalized vectors of a fixed dimensionality.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;
  // Longest token sequence encoded as a single window.
  virtual std::size_t max_tokens() const = 0;

  virtual std::vector<std::string> tokenize(std::string_view text) const;
  virtual std::string detokenize(std::span<const std::string> tokens) const;

  virtual std::vector<Eigen::VectorXd> embed(std::span<const std::string> texts) const = 0;

  Eigen::VectorXd embed_one(const std::string& text) const;
};

// Throws if the vector has zero norm.
Eigen::VectorXd l2_normalize(const Eigen::VectorXd& v);
double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Offline provider: each token hashes (FNV-1a, seeded) to a Rademacher
// +-1 vector; a text is the normalized sum over its token counts, i.e. a
// seeded random projection of hashed bag-of-words counts.
class HashProjectionProvider final : public EmbeddingProvider {
 public:
  explicit HashProjectionProvider(std::size_t dimension = 384, std::uint64_t seed = 20240601,
                                  std::size_t max_tokens = 256);

  std::string name() const override;
  std::size_t dimension() const override { return dimension_; }
  std::size_t max_tokens() const override { return max_tokens_; }
  std::vector<Eigen::VectorXd> embed(std::span<const std::string> texts) const override;

 private:
  void accumulate(std::string_view token, double weight, Eigen::VectorXd& out) const;

  std::size_t dimension_;
  std::uint64_t seed_;
  std::size_t max_tokens_;
};

struct RemoteEmbeddingConfig {
  std::string base_url;  // e.g. http://localhost:8080/v1
  std::string path = "/embeddings";
  std::string model;
  std::string auth_env;  // bearer token variable, optional
  std::size_t dimension = 384;
  std::size_t max_tokens = 256;
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;
  HttpOptions http;
};

// POST {"model", "input": [texts]}; accepts {"embeddings": [[...]]} or
// {"data": [{"index", "embedding"}]} responses.
class RemoteEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit RemoteEmbeddingProvider(RemoteEmbeddingConfig config);

  std::string name() const override { return "remote:" + config_.model; }
  std::size_t dimension() const override { return config_.dimension; }
  std::size_t max_tokens() const override { return config_.max_tokens; }
  std::vector<Eigen::VectorXd> embed(std::span<const std::string> texts) const override;

 private:
  std::vector<Eigen::VectorXd> embed_batch(std::span<const std::string> texts) const;

  RemoteEmbeddingConfig config_;
};

}  // namespace lmda
