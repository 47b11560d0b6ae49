#include "lmda/corpus.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <charconv>
#include <nlohmann/json.hpp>
#include <unordered_set>

#include "lmda/textprep.hpp"

namespace lmda {

namespace {

constexpr std::string_view kCorpusMagic = "LMDACORP";
constexpr std::uint32_t kCorpusVersion = 1;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    const bool blank = row.size() == 1 && trim(row[0]).empty();
    if (!blank) rows.push_back(std::move(row));
    row.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_row();
    } else if (c == '\r') {
      // CRLF handled by the following '\n'
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw Error("manifest: unterminated quoted field");
  if (!field.empty() || !row.empty()) end_row();
  return rows;
}

}  // namespace

bool Corpus::has_both_subsets() const {
  bool e = false, c = false;
  for (const auto& d : documents) (d.subset == Subset::Endorsed ? e : c) = true;
  return e && c;
}

std::string normalize_text(std::string_view text) {
  std::string unified;
  unified.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\r') {
      unified.push_back('\n');
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
    } else {
      unified.push_back(text[i]);
    }
  }
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  const auto src = icu::UnicodeString::fromUTF8(unified);
  const icu::UnicodeString out = nfc->normalize(src, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");
  std::string result;
  out.toUTF8String(result);
  return result;
}

std::vector<ManifestRow> parse_manifest(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  const auto rows = parse_csv(text);
  if (rows.empty()) throw Error("manifest: empty");
  const std::vector<std::string> expected{"id", "subset", "title", "year", "path"};
  std::vector<std::string> header;
  for (const auto& h : rows[0]) header.push_back(trim(h));
  if (header != expected) {
    throw Error("manifest: header must be 'id,subset,title,year,path'");
  }
  std::vector<ManifestRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 5) {
      throw Error("manifest: row " + std::to_string(i + 1) + " has " + std::to_string(r.size()) +
                  " fields, expected 5");
    }
    out.push_back({trim(r[0]), trim(r[1]), trim(r[2]), trim(r[3]), trim(r[4])});
  }
  return out;
}

Corpus load_corpus(const std::filesystem::path& root, const std::filesystem::path& manifest) {
  const auto rows = parse_manifest(read_file(manifest));
  Corpus corpus;
  corpus.provenance = "manifest:" + manifest.string();
  std::unordered_set<std::string> seen;
  for (const auto& row : rows) {
    if (row.id.empty()) throw Error("manifest: empty document id");
    if (!seen.insert(row.id).second) throw Error("duplicate document id '" + row.id + "'");
    Document doc;
    doc.id = row.id;
    try {
      doc.subset = parse_subset(row.subset);
    } catch (const Error&) {
      throw Error("document '" + row.id + "': unknown subset label '" + row.subset + "'");
    }
    doc.title = row.title;
    if (!row.year.empty()) {
      const auto* first = row.year.data();
      const auto* last = first + row.year.size();
      auto [ptr, ec] = std::from_chars(first, last, doc.year);
      if (ec != std::errc{} || ptr != last) {
        throw Error("document '" + row.id + "': invalid year '" + row.year + "'");
      }
    }
    const auto path = root / row.path;
    if (!std::filesystem::is_regular_file(path)) {
      throw Error("document '" + row.id + "': missing file '" + row.path + "'");
    }
    doc.body = normalize_text(read_file(path));
    doc.word_count = tokenize(doc.body).size();
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

Corpus subset(const Corpus& corpus, Subset which) {
  Corpus out;
  out.provenance = corpus.provenance + "|subset:" + std::string(to_string(which));
  for (const auto& d : corpus.documents) {
    if (d.subset == which) out.documents.push_back(d);
  }
  return out;
}

std::string serialize_corpus(const Corpus& corpus) {
  nlohmann::json j;
  j["provenance"] = corpus.provenance;
  auto& docs = j["documents"] = nlohmann::json::array();
  for (const auto& d : corpus.documents) {
    docs.push_back({{"id", d.id},
                    {"subset", to_string(d.subset)},
                    {"title", d.title},
                    {"year", d.year},
                    {"body", d.body},
                    {"word_count", d.word_count}});
  }
  const auto cbor = nlohmann::json::to_cbor(j);
  return wrap_artifact(kCorpusMagic, kCorpusVersion,
                       std::string_view(reinterpret_cast<const char*>(cbor.data()), cbor.size()));
}

Corpus deserialize_corpus(std::string_view bytes) {
  const auto payload = unwrap_artifact(kCorpusMagic, kCorpusVersion, bytes);
  const auto j = nlohmann::json::from_cbor(payload);
  Corpus corpus;
  corpus.provenance = j.at("provenance").get<std::string>();
  for (const auto& d : j.at("documents")) {
    Document doc;
    doc.id = d.at("id").get<std::string>();
    doc.subset = parse_subset(d.at("subset").get<std::string>());
    doc.title = d.at("title").get<std::string>();
    doc.year = d.at("year").get<int>();
    doc.body = d.at("body").get<std::string>();
    doc.word_count = d.at("word_count").get<std::size_t>();
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace lmda
