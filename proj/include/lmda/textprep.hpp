#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lmda/common.hpp"

namespace lmda {

struct Corpus;

enum class PartOfSpeech { Noun, Verb, Adjective, Adverb, Other };

std::string_view to_string(PartOfSpeech pos);
bool is_content(PartOfSpeech pos);

struct SurfaceToken {
  std::string text;  // lowercased
  std::size_t position = 0;

  friend bool operator==(const SurfaceToken&, const SurfaceToken&) = default;
};

struct Token {
  std::string surface;
  std::string lemma;
  PartOfSpeech pos = PartOfSpeech::Other;
  std::size_t position = 0;

  friend bool operator==(const Token&, const Token&) = default;
};

struct ContentStream {
  std::string doc_id;
  Subset subset = Subset::Endorsed;
  std::vector<Token> tokens;  // content POS only, original positions kept
  std::size_t total_tokens = 0;

  friend bool operator==(const ContentStream&, const ContentStream&) = default;
};

// Maximal runs of letters/digits, joined by internal '-' or apostrophes,
// lowercased. Positions run 0..n-1.
std::vector<SurfaceToken> tokenize(std::string_view body);

class AnnotationError : public Error {
 public:
  using Error::Error;
};

class Annotator {
 public:
  virtual ~Annotator() = default;
  virtual std::vector<Token> annotate(std::span<const SurfaceToken> tokens) const = 0;
  virtual std::string name() const = 0;
};

// Deterministic lexicon lookup with suffix rules for unknown words.
//
// Lexicon lines are `surface<TAB>lemma<TAB>TAG`; repeated surfaces list
// alternative readings in preference order. TAG is one of NOUN, VERB, ADJ,
// ADV, AUX, DET, PREP, PRON, CONJ, NUM, OTHER. When a surface has a noun
// reading and follows a determiner, preposition or adjective, the noun
// reading wins; otherwise the first reading is used.
class RuleLexiconAnnotator final : public Annotator {
 public:
  explicit RuleLexiconAnnotator(std::string_view lexicon_text);
  static RuleLexiconAnnotator from_file(const std::filesystem::path& path);

  std::vector<Token> annotate(std::span<const SurfaceToken> tokens) const override;
  std::string name() const override { return "rule-lexicon-v1"; }

  std::size_t entry_count() const { return lexicon_.size(); }

 private:
  enum class Tag { Noun, Verb, Adj, Adv, Aux, Det, Prep, Pron, Conj, Num, Other };
  struct Reading {
    std::string lemma;
    Tag tag;
  };

  Reading guess(const std::string& surface) const;
  static PartOfSpeech to_pos(Tag tag);

  std::map<std::string, std::vector<Reading>, std::less<>> lexicon_;
};

std::vector<Token> tag_and_lemmatize(std::span<const SurfaceToken> tokens,
                                     const Annotator& annotator);

using StopwordSet = std::set<std::string, std::less<>>;

// One lemma per line; '#' starts a comment.
StopwordSet parse_stopwords(std::string_view text);
StopwordSet load_stopwords(const std::filesystem::path& path);

std::filesystem::path default_stopwords_path();
std::filesystem::path default_lexicon_path();

ContentStream filter_content(std::span<const Token> tokens, const StopwordSet& stopwords);

struct PreparedCorpus {
  std::vector<ContentStream> streams;  // manifest order
  std::vector<std::string> warnings;
  std::string annotator;
};

// Documents whose annotation fails are skipped with a warning.
PreparedCorpus prepare_corpus(const Corpus& corpus, const Annotator& annotator,
                              const StopwordSet& stopwords);

std::string serialize_prepared(const PreparedCorpus& prepared);
PreparedCorpus deserialize_prepared(std::string_view bytes);

}  // namespace lmda
