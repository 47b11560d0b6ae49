#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lmda/common.hpp"

namespace lmda {

struct Document {
  std::string id;
  Subset subset = Subset::Endorsed;
  std::string title;
  int year = 0;
  std::string body;  // NFC-normalized, "\n" line endings
  std::size_t word_count = 0;

  friend bool operator==(const Document&, const Document&) = default;
};

// Immutable once loaded; safe to share across readers.
struct Corpus {
  std::vector<Document> documents;
  std::string provenance;

  bool empty() const { return documents.empty(); }
  std::size_t size() const { return documents.size(); }
  bool has_both_subsets() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

// Unicode NFC plus CRLF/CR -> LF.
std::string normalize_text(std::string_view text);

struct ManifestRow {
  std::string id;
  std::string subset;
  std::string title;
  std::string year;
  std::string path;
};

// Header row required; columns: id,subset,title,year,path (RFC 4180 quoting).
std::vector<ManifestRow> parse_manifest(std::string_view text);

// Paths in the manifest are resolved against `root`.
Corpus load_corpus(const std::filesystem::path& root, const std::filesystem::path& manifest);

Corpus subset(const Corpus& corpus, Subset which);

std::string serialize_corpus(const Corpus& corpus);
Corpus deserialize_corpus(std::string_view bytes);

}  // namespace lmda
