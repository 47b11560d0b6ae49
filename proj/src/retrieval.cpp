#include "lmda/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

namespace lmda {

namespace {

constexpr std::string_view kIndexMagic = "LMDAINDX";
constexpr std::uint32_t kIndexVersion = 1;

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) words.push_back(std::move(w));
  return words;
}

std::string dp_tag(DimPole dp) { return std::to_string(dp.dim) + std::string(pole_sign(dp.pole)); }

}  // namespace

std::vector<DimPole> ExemplarSet::poles() const {
  std::set<DimPole> seen;
  for (const auto& d : docs) seen.insert(d.dp);
  return {seen.begin(), seen.end()};
}

std::vector<const ExemplarDoc*> ExemplarSet::at(DimPole dp) const {
  std::vector<const ExemplarDoc*> out;
  for (const auto& d : docs) {
    if (d.dp == dp) out.push_back(&d);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ExemplarDoc* a, const ExemplarDoc* b) { return a->rank < b->rank; });
  return out;
}

std::string ExemplarSet::reference_text(DimPole dp) const {
  std::string out;
  for (const auto* d : at(dp)) {
    if (!out.empty()) out += "\n\n";
    out += d->text;
  }
  return out;
}

std::string exemplars_to_json(const ExemplarSet& set) {
  nlohmann::json j;
  j["format"] = "lmda-exemplars";
  j["version"] = 1;
  auto& arr = j["exemplars"] = nlohmann::json::array();
  for (const auto& d : set.docs) {
    arr.push_back({{"dim", d.dp.dim},
                   {"pole", std::string(to_string(d.dp.pole))},
                   {"rank", d.rank},
                   {"doc_id", d.doc_id},
                   {"subset", std::string(to_string(d.subset))},
                   {"score", d.score},
                   {"text", d.text}});
  }
  return j.dump(2) + "\n";
}

ExemplarSet exemplars_from_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  if (j.value("format", "") != "lmda-exemplars" || j.value("version", 0) != 1) {
    throw Error("not an lmda-exemplars v1 document");
  }
  ExemplarSet set;
  for (const auto& e : j.at("exemplars")) {
    ExemplarDoc d;
    d.dp.dim = e.at("dim").get<int>();
    d.dp.pole = parse_pole(e.at("pole").get<std::string>());
    d.rank = e.at("rank").get<std::size_t>();
    d.doc_id = e.at("doc_id").get<std::string>();
    d.subset = parse_subset(e.at("subset").get<std::string>());
    d.score = e.at("score").get<double>();
    d.text = e.at("text").get<std::string>();
    set.docs.push_back(std::move(d));
  }
  return set;
}

Query make_query(std::string text, DimPole dp, const EmbeddingProvider& provider) {
  Query q{std::move(text), dp, {}};
  q.embedding = provider.embed_one(q.text);
  return q;
}

std::vector<std::pair<std::size_t, std::size_t>> window_ranges(std::size_t n, std::size_t size,
                                                               std::size_t overlap) {
  if (size == 0 || overlap >= size) throw Error("chunking requires size > overlap >= 0");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (n == 0) return out;
  const std::size_t stride = size - overlap;
  for (std::size_t start = 0;; start += stride) {
    const std::size_t end = std::min(start + size, n);
    out.emplace_back(start, end);
    if (end == n) break;
  }
  if (out.size() > 1) {
    const auto [b, e] = out.back();
    if (4 * (e - b) < size) {
      out.pop_back();
      out.back().second = n;
    }
  }
  return out;
}

std::vector<Chunk> chunk_documents(const ExemplarSet& exemplars, std::size_t size,
                                   std::size_t overlap) {
  std::vector<Chunk> out;
  for (const auto& dp : exemplars.poles()) {
    for (const auto* doc : exemplars.at(dp)) {
      const auto words = split_words(doc->text);
      const auto ranges = window_ranges(words.size(), size, overlap);
      for (std::size_t i = 0; i < ranges.size(); ++i) {
        Chunk c;
        c.chunk_id = doc->doc_id + "@" + dp_tag(dp) + "#" + std::to_string(i);
        c.doc_id = doc->doc_id;
        c.dp = dp;
        c.word_begin = ranges[i].first;
        c.word_end = ranges[i].second;
        for (std::size_t w = c.word_begin; w < c.word_end; ++w) {
          if (w > c.word_begin) c.text.push_back(' ');
          c.text += words[w];
        }
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

ChunkIndex::ChunkIndex(std::string provider_name, std::size_t dimension, std::vector<Chunk> chunks)
    : provider_(std::move(provider_name)), dimension_(dimension), chunks_(std::move(chunks)) {
  std::set<std::string> ids;
  for (const auto& c : chunks_) {
    if (static_cast<std::size_t>(c.embedding.size()) != dimension_) {
      throw Error("chunk '" + c.chunk_id + "' has wrong embedding dimension");
    }
    if (std::abs(c.embedding.norm() - 1.0) > 1e-6) {
      throw Error("chunk '" + c.chunk_id + "' embedding is not unit-norm");
    }
    if (!ids.insert(c.chunk_id).second) throw Error("duplicate chunk id '" + c.chunk_id + "'");
  }
}

ChunkIndex ChunkIndex::build(std::vector<Chunk> chunks, const EmbeddingProvider& provider) {
  std::vector<std::string> texts;
  texts.reserve(chunks.size());
  for (const auto& c : chunks) texts.push_back(c.text);
  auto vectors = provider.embed(texts);
  if (vectors.size() != chunks.size()) throw Error("embedding provider returned wrong batch size");
  for (std::size_t i = 0; i < chunks.size(); ++i) chunks[i].embedding = std::move(vectors[i]);
  return ChunkIndex(provider.name(), provider.dimension(), std::move(chunks));
}

std::size_t ChunkIndex::count(DimPole dp) const {
  return static_cast<std::size_t>(
      std::count_if(chunks_.begin(), chunks_.end(), [&](const Chunk& c) { return c.dp == dp; }));
}

std::vector<ScoredChunk> ChunkIndex::retrieve(const Query& q, std::size_t k) const {
  std::vector<ScoredChunk> candidates;
  for (const auto& c : chunks_) {
    if (c.dp == q.dp) candidates.push_back({&c, 0.0});
  }
  if (candidates.empty()) {
    throw NoContextError("no context available for dimension " + dp_tag(q.dp));
  }
  if (static_cast<std::size_t>(q.embedding.size()) != dimension_) {
    throw Error("query embedding dimension does not match the index");
  }
  for (auto& s : candidates) s.similarity = cosine(q.embedding, s.chunk->embedding);
  const auto better = [](const ScoredChunk& a, const ScoredChunk& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.chunk->chunk_id < b.chunk->chunk_id;
  };
  const auto take = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                    candidates.end(), better);
  candidates.resize(take);
  return candidates;
}

std::string ChunkIndex::serialize() const {
  nlohmann::json j;
  j["provider"] = provider_;
  j["dimension"] = dimension_;
  auto& arr = j["chunks"] = nlohmann::json::array();
  for (const auto& c : chunks_) {
    std::vector<double> v(c.embedding.data(), c.embedding.data() + c.embedding.size());
    arr.push_back({{"id", c.chunk_id},
                   {"doc", c.doc_id},
                   {"dim", c.dp.dim},
                   {"pole", std::string(to_string(c.dp.pole))},
                   {"text", c.text},
                   {"begin", c.word_begin},
                   {"end", c.word_end},
                   {"embedding", v}});
  }
  const auto cbor = nlohmann::json::to_cbor(j);
  return wrap_artifact(kIndexMagic, kIndexVersion, {reinterpret_cast<const char*>(cbor.data()), cbor.size()});
}

ChunkIndex ChunkIndex::deserialize(std::string_view bytes) {
  const auto payload = unwrap_artifact(kIndexMagic, kIndexVersion, bytes);
  const auto j = nlohmann::json::from_cbor(payload);
  std::vector<Chunk> chunks;
  for (const auto& e : j.at("chunks")) {
    Chunk c;
    c.chunk_id = e.at("id").get<std::string>();
    c.doc_id = e.at("doc").get<std::string>();
    c.dp = {e.at("dim").get<int>(), parse_pole(e.at("pole").get<std::string>())};
    c.text = e.at("text").get<std::string>();
    c.word_begin = e.at("begin").get<std::size_t>();
    c.word_end = e.at("end").get<std::size_t>();
    const auto v = e.at("embedding").get<std::vector<double>>();
    c.embedding = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    chunks.push_back(std::move(c));
  }
  return ChunkIndex(j.at("provider").get<std::string>(), j.at("dimension").get<std::size_t>(),
                    std::move(chunks));
}

}  // namespace lmda
