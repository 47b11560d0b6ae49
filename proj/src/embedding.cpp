#include "lmda/embedding.hpp"

#include <cmath>
#include <map>
#include <nlohmann/json.hpp>

#include "lmda/parallel.hpp"
#include "lmda/textprep.hpp"

namespace lmda {

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::string_view kEmptyToken = "\x01<empty>";

}  // namespace

std::vector<std::string> EmbeddingProvider::tokenize(std::string_view text) const {
  std::vector<std::string> out;
  for (auto& t : lmda::tokenize(text)) out.push_back(std::move(t.text));
  return out;
}

std::string EmbeddingProvider::detokenize(std::span<const std::string> tokens) const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

Eigen::VectorXd EmbeddingProvider::embed_one(const std::string& text) const {
  return embed(std::span<const std::string>(&text, 1)).front();
}

Eigen::VectorXd l2_normalize(const Eigen::VectorXd& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw Error("cannot normalize a zero or non-finite vector");
  return v / n;
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw Error("cosine: dimension mismatch");
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

HashProjectionProvider::HashProjectionProvider(std::size_t dimension, std::uint64_t seed,
                                               std::size_t max_tokens)
    : dimension_(dimension), seed_(seed), max_tokens_(max_tokens) {
  if (dimension_ == 0) throw Error("embedding dimension must be positive");
  if (max_tokens_ == 0) throw Error("max_tokens must be positive");
}

std::string HashProjectionProvider::name() const {
  return "hash-projection-d" + std::to_string(dimension_) + "-s" + std::to_string(seed_);
}

void HashProjectionProvider::accumulate(std::string_view token, double weight,
                                        Eigen::VectorXd& out) const {
  std::uint64_t state = fnv1a(token, seed_);
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < dimension_; ++i) {
    if (i % 64 == 0) bits = splitmix64(state);
    out(static_cast<Eigen::Index>(i)) += (bits & 1ULL) ? weight : -weight;
    bits >>= 1;
  }
}

std::vector<Eigen::VectorXd> HashProjectionProvider::embed(std::span<const std::string> texts) const {
  std::vector<Eigen::VectorXd> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    std::map<std::string, double> counts;
    for (auto& t : tokenize(text)) counts[std::move(t)] += 1.0;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension_));
    if (counts.empty()) {
      accumulate(kEmptyToken, 1.0, v);
    } else {
      for (const auto& [token, count] : counts) accumulate(token, count, v);
    }
    if (v.squaredNorm() == 0.0) accumulate(kEmptyToken, 1.0, v);
    out.push_back(l2_normalize(v));
  }
  return out;
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(RemoteEmbeddingConfig config)
    : config_(std::move(config)) {
  if (config_.base_url.empty()) throw Error("remote embedding provider: base_url is required");
  if (config_.batch_size == 0) config_.batch_size = 1;
}

std::vector<Eigen::VectorXd> RemoteEmbeddingProvider::embed_batch(
    std::span<const std::string> texts) const {
  nlohmann::json body;
  body["model"] = config_.model;
  body["input"] = std::vector<std::string>(texts.begin(), texts.end());
  Headers headers;
  if (!config_.auth_env.empty()) {
    headers.emplace_back("Authorization", "Bearer " + secret_from_env(config_.auth_env));
  }
  const auto response = nlohmann::json::parse(
      post_json(config_.base_url, config_.path, body.dump(), headers, config_.http));
  std::vector<Eigen::VectorXd> out(texts.size());
  auto to_vector = [&](const nlohmann::json& arr) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    if (static_cast<std::size_t>(v.size()) != config_.dimension) {
      throw Error("remote embedding: expected dimension " + std::to_string(config_.dimension) +
                  ", got " + std::to_string(v.size()));
    }
    return l2_normalize(v);
  };
  if (response.contains("embeddings")) {
    const auto& e = response.at("embeddings");
    if (e.size() != texts.size()) throw Error("remote embedding: batch size mismatch");
    for (std::size_t i = 0; i < e.size(); ++i) out[i] = to_vector(e[i]);
  } else if (response.contains("data")) {
    const auto& d = response.at("data");
    if (d.size() != texts.size()) throw Error("remote embedding: batch size mismatch");
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto index = d[i].value("index", i);
      if (index >= out.size()) throw Error("remote embedding: index out of range");
      out[index] = to_vector(d[i].at("embedding"));
    }
  } else {
    throw Error("remote embedding: response has neither 'embeddings' nor 'data'");
  }
  return out;
}

std::vector<Eigen::VectorXd> RemoteEmbeddingProvider::embed(std::span<const std::string> texts) const {
  const std::size_t batches = (texts.size() + config_.batch_size - 1) / config_.batch_size;
  std::vector<std::vector<Eigen::VectorXd>> results(batches);
  parallel_for(batches, config_.max_in_flight, [&](std::size_t b) {
    const auto begin = b * config_.batch_size;
    const auto count = std::min(config_.batch_size, texts.size() - begin);
    results[b] = embed_batch(texts.subspan(begin, count));
  });
  std::vector<Eigen::VectorXd> out;
  out.reserve(texts.size());
  for (auto& r : results) {
    for (auto& v : r) out.push_back(std::move(v));
  }
  return out;
}

}  // namespace lmda
