#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lmda/embedding.hpp"
#include "lmda/llmgate.hpp"
#include "lmda/promptgen.hpp"

namespace lmda {

struct EmbeddingConfig {
  std::string kind = "hash";  // "hash" or "remote"
  std::size_t dimension = 384;
  std::uint64_t seed = 20240601;
  std::size_t max_tokens = 256;
  std::string base_url;
  std::string path = "/embeddings";
  std::string model;
  std::string auth_env;
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;

  friend bool operator==(const EmbeddingConfig&, const EmbeddingConfig&) = default;
};

std::unique_ptr<EmbeddingProvider> make_provider(const EmbeddingConfig& config);

// Empty paths select the bundled data.
struct PathsConfig {
  std::string corpus_root;
  std::string manifest;
  std::string stopwords;
  std::string lexicon;
  std::string templates;
  std::string descriptors;
  std::string questions;
  std::string work_dir = "lmda-work";

  friend bool operator==(const PathsConfig&, const PathsConfig&) = default;
};

struct Thresholds {
  double min_ll = 3.84;
  std::optional<std::size_t> keyword_top_n;
  std::size_t span = 4;
  std::string span_axis = "content";
  double min_d = 7.0;
  std::size_t top_n = 500;
  std::optional<std::size_t> n_factors;  // unset: eigenvalues above the non-zero mean
  std::vector<int> dimensions{1, 2, 3};  // rotated factors kept as dimensions
  double cutoff = 0.30;
  std::size_t exemplars_k = 5;
  std::size_t vocabulary_size = 10;
  std::size_t chunk_size = 300;
  std::size_t chunk_overlap = 50;
  std::size_t k = 3;
  int repeats = 5;
  std::size_t window = 256;
  std::size_t overlap = 64;

  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

struct RunConfig {
  PathsConfig paths;
  Thresholds thresholds;
  EmbeddingConfig retrieval_embedding;
  EmbeddingConfig evaluation_embedding;
  std::vector<EndpointConfig> models;
  std::vector<PromptMode> modes = all_prompt_modes();
  // "fixed" stamps every record with 1970-01-01T00:00:00Z.
  std::string clock = "system";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Throws naming the offending key on invalid values.
void validate(const RunConfig& config);

RunConfig parse_config(std::string_view json_text);
std::string serialize_config(const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);

// A config equal to the defaults with four mock models and the fixed clock.
RunConfig demo_config();

}  // namespace lmda
