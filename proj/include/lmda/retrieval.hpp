#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lmda/common.hpp"
#include "lmda/embedding.hpp"

namespace lmda {

// One exemplar text attached to a (dimension, pole).
struct ExemplarDoc {
  DimPole dp;
  std::size_t rank = 0;  // 0-based within its pole
  std::string doc_id;
  Subset subset = Subset::Endorsed;
  double score = 0.0;
  std::string text;

  friend bool operator==(const ExemplarDoc&, const ExemplarDoc&) = default;
};

struct ExemplarSet {
  std::vector<ExemplarDoc> docs;  // grouped by DimPole, rank order within

  std::vector<DimPole> poles() const;
  std::vector<const ExemplarDoc*> at(DimPole dp) const;
  // Texts of the pole's exemplars in rank order, joined by a blank line.
  std::string reference_text(DimPole dp) const;

  friend bool operator==(const ExemplarSet&, const ExemplarSet&) = default;
};

std::string exemplars_to_json(const ExemplarSet& set);
ExemplarSet exemplars_from_json(std::string_view text);

struct Chunk {
  std::string chunk_id;
  std::string doc_id;
  DimPole dp;
  std::string text;
  std::size_t word_begin = 0;
  std::size_t word_end = 0;
  Eigen::VectorXd embedding;  // empty until indexed
};

struct Query {
  std::string text;
  DimPole dp;
  Eigen::VectorXd embedding;
};

Query make_query(std::string text, DimPole dp, const EmbeddingProvider& provider);

// Half-open word ranges of sliding windows over `n` words with stride
// size - overlap. A trailing window shorter than a quarter of `size` is
// folded into its predecessor.
std::vector<std::pair<std::size_t, std::size_t>> window_ranges(std::size_t n, std::size_t size,
                                                               std::size_t overlap);

// Words are whitespace-delimited. Chunk ids are "<doc>@<dim><sign>#<i>".
std::vector<Chunk> chunk_documents(const ExemplarSet& exemplars, std::size_t size = 300,
                                   std::size_t overlap = 50);

class NoContextError : public Error {
 public:
  using Error::Error;
};

struct ScoredChunk {
  const Chunk* chunk = nullptr;
  double similarity = 0.0;
};

// Exact filtered cosine search; immutable after construction.
class ChunkIndex {
 public:
  ChunkIndex() = default;
  ChunkIndex(std::string provider_name, std::size_t dimension, std::vector<Chunk> chunks);

  static ChunkIndex build(std::vector<Chunk> chunks, const EmbeddingProvider& provider);

  const std::string& provider_name() const { return provider_; }
  std::size_t dimension() const { return dimension_; }
  const std::vector<Chunk>& chunks() const { return chunks_; }
  std::size_t count(DimPole dp) const;

  // Filters to q.dp, then ranks by cosine descending, ties by chunk_id.
  // Throws NoContextError when no chunk carries q.dp.
  std::vector<ScoredChunk> retrieve(const Query& q, std::size_t k = 3) const;

  std::string serialize() const;
  static ChunkIndex deserialize(std::string_view bytes);

 private:
  std::string provider_;
  std::size_t dimension_ = 0;
  std::vector<Chunk> chunks_;
};

}  // namespace lmda
