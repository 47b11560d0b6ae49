#include "lmda/textprep.hpp"

#include <unicode/locid.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cctype>
#include <nlohmann/json.hpp>
#include <sstream>

#include "lmda/corpus.hpp"

namespace lmda {

namespace {

constexpr std::string_view kPrepMagic = "LMDAPREP";
constexpr std::uint32_t kPrepVersion = 1;

bool is_joiner(UChar32 c) {
  return c == '-' || c == '\'' || c == 0x2019 || c == 0x2010 || c == 0x2011;
}

bool is_word_char(UChar32 c) { return u_isalnum(c) != 0; }

std::string lowercase(std::string_view utf8) {
  auto u = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  u.toLower(icu::Locale::getRoot());
  std::string out;
  u.toUTF8String(out);
  return out;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

// Undo consonant doubling ("stopped" -> "stop") and restore a dropped final
// 'e' for a handful of stem endings ("reduced" -> "reduce").
std::string repair_stem(std::string stem) {
  const auto n = stem.size();
  if (n >= 3 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) && stem[n - 1] != 'l' &&
      stem[n - 1] != 's' && stem[n - 1] != 'z') {
    stem.pop_back();
    return stem;
  }
  if (ends_with(stem, "c") || ends_with(stem, "v") || ends_with(stem, "iz") ||
      ends_with(stem, "bl") || ends_with(stem, "ur") || ends_with(stem, "at")) {
    stem.push_back('e');
  }
  return stem;
}

}  // namespace

std::string_view to_string(PartOfSpeech pos) {
  switch (pos) {
    case PartOfSpeech::Noun: return "Noun";
    case PartOfSpeech::Verb: return "Verb";
    case PartOfSpeech::Adjective: return "Adjective";
    case PartOfSpeech::Adverb: return "Adverb";
    case PartOfSpeech::Other: return "Other";
  }
  return "Other";
}

bool is_content(PartOfSpeech pos) { return pos != PartOfSpeech::Other; }

std::vector<SurfaceToken> tokenize(std::string_view body) {
  std::vector<SurfaceToken> out;
  const auto* s = reinterpret_cast<const uint8_t*>(body.data());
  const auto length = static_cast<int32_t>(body.size());
  int32_t i = 0;
  int32_t start = -1;  // byte offset of the current run
  int32_t run_end = -1;
  auto flush = [&] {
    if (start >= 0) {
      out.push_back({lowercase(body.substr(start, run_end - start)), out.size()});
    }
    start = -1;
  };
  while (i < length) {
    const int32_t at = i;
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c >= 0 && is_word_char(c)) {
      if (start < 0) start = at;
      run_end = i;
      continue;
    }
    if (c >= 0 && start >= 0 && is_joiner(c) && i < length) {
      int32_t peek = i;
      UChar32 next;
      U8_NEXT(s, peek, length, next);
      if (next >= 0 && is_word_char(next)) {
        run_end = peek;
        i = peek;
        continue;
      }
    }
    flush();
  }
  flush();
  return out;
}

RuleLexiconAnnotator::RuleLexiconAnnotator(std::string_view lexicon_text) {
  std::istringstream in{std::string(lexicon_text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw Error("lexicon line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
    }
    const auto surface = line.substr(0, t1);
    const auto lemma = line.substr(t1 + 1, t2 - t1 - 1);
    const auto tag_text = line.substr(t2 + 1);
    Tag tag;
    if (tag_text == "NOUN") tag = Tag::Noun;
    else if (tag_text == "VERB") tag = Tag::Verb;
    else if (tag_text == "ADJ") tag = Tag::Adj;
    else if (tag_text == "ADV") tag = Tag::Adv;
    else if (tag_text == "AUX") tag = Tag::Aux;
    else if (tag_text == "DET") tag = Tag::Det;
    else if (tag_text == "PREP") tag = Tag::Prep;
    else if (tag_text == "PRON") tag = Tag::Pron;
    else if (tag_text == "CONJ") tag = Tag::Conj;
    else if (tag_text == "NUM") tag = Tag::Num;
    else if (tag_text == "OTHER") tag = Tag::Other;
    else throw Error("lexicon line " + std::to_string(line_no) + ": unknown tag '" + tag_text + "'");
    if (surface.empty() || lemma.empty()) {
      throw Error("lexicon line " + std::to_string(line_no) + ": empty surface or lemma");
    }
    lexicon_[lowercase(surface)].push_back({lowercase(lemma), tag});
  }
}

RuleLexiconAnnotator RuleLexiconAnnotator::from_file(const std::filesystem::path& path) {
  return RuleLexiconAnnotator(read_file(path));
}

PartOfSpeech RuleLexiconAnnotator::to_pos(Tag tag) {
  switch (tag) {
    case Tag::Noun: return PartOfSpeech::Noun;
    case Tag::Verb:
    case Tag::Aux: return PartOfSpeech::Verb;
    case Tag::Adj: return PartOfSpeech::Adjective;
    case Tag::Adv: return PartOfSpeech::Adverb;
    default: return PartOfSpeech::Other;
  }
}

RuleLexiconAnnotator::Reading RuleLexiconAnnotator::guess(const std::string& w) const {
  const bool has_letter = std::any_of(w.begin(), w.end(), [](unsigned char c) {
    return std::isalpha(c) || c >= 0x80;
  });
  if (!has_letter) return {w, Tag::Num};
  if (w.size() == 1) return {w, Tag::Other};
  // Hyphenated or digit-bearing terms ("covid-19", "sars-cov-2") are names.
  if (w.find('-') != std::string::npos ||
      std::any_of(w.begin(), w.end(), [](unsigned char c) { return std::isdigit(c); })) {
    return {w, Tag::Noun};
  }
  const auto n = w.size();
  if (n > 4 && ends_with(w, "ly")) return {w, Tag::Adv};
  for (std::string_view suf : {"tion", "sion", "ment", "ness", "ity", "ance", "ence", "ism", "ogy"}) {
    if (n > suf.size() + 2 && ends_with(w, suf)) return {w, Tag::Noun};
  }
  for (std::string_view suf : {"tions", "sions", "ments", "ities", "ances", "ences", "isms"}) {
    if (n > suf.size() + 2 && ends_with(w, suf)) {
      if (ends_with(w, "ities")) return {w.substr(0, n - 3) + "y", Tag::Noun};
      return {w.substr(0, n - 1), Tag::Noun};
    }
  }
  for (std::string_view suf : {"ical", "ous", "ive", "ful", "able", "ible", "less", "ant", "ent", "ary"}) {
    if (n > suf.size() + 2 && ends_with(w, suf)) return {w, Tag::Adj};
  }
  if (n > 5 && ends_with(w, "ing")) return {repair_stem(w.substr(0, n - 3)), Tag::Verb};
  if (n > 4 && ends_with(w, "ied")) return {w.substr(0, n - 3) + "y", Tag::Verb};
  if (n > 4 && ends_with(w, "ed")) return {repair_stem(w.substr(0, n - 2)), Tag::Verb};
  if (n > 4 && ends_with(w, "ies")) return {w.substr(0, n - 3) + "y", Tag::Noun};
  for (std::string_view suf : {"sses", "xes", "ches", "shes", "zzes"}) {
    if (n > suf.size() + 1 && ends_with(w, suf)) return {w.substr(0, n - 2), Tag::Noun};
  }
  if (n > 3 && ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") &&
      !ends_with(w, "is")) {
    return {w.substr(0, n - 1), Tag::Noun};
  }
  return {w, Tag::Noun};
}

std::vector<Token> RuleLexiconAnnotator::annotate(std::span<const SurfaceToken> tokens) const {
  std::vector<Token> out;
  out.reserve(tokens.size());
  Tag prev = Tag::Other;
  for (const auto& t : tokens) {
    if (t.text.empty()) throw AnnotationError("empty surface token at position " + std::to_string(t.position));
    Reading chosen;
    if (const auto it = lexicon_.find(t.text); it != lexicon_.end()) {
      const auto& readings = it->second;
      chosen = readings.front();
      if (prev == Tag::Det || prev == Tag::Prep || prev == Tag::Adj) {
        const auto noun = std::find_if(readings.begin(), readings.end(),
                                       [](const Reading& r) { return r.tag == Tag::Noun; });
        if (noun != readings.end()) chosen = *noun;
      }
    } else {
      chosen = guess(t.text);
    }
    out.push_back({t.text, chosen.lemma, to_pos(chosen.tag), t.position});
    prev = chosen.tag;
  }
  return out;
}

std::vector<Token> tag_and_lemmatize(std::span<const SurfaceToken> tokens,
                                     const Annotator& annotator) {
  auto out = annotator.annotate(tokens);
  if (out.size() != tokens.size()) {
    throw AnnotationError(annotator.name() + ": token count changed during annotation");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].lemma.empty()) {
      throw AnnotationError(annotator.name() + ": empty lemma for '" + tokens[i].text + "'");
    }
    if (out[i].position != tokens[i].position) {
      throw AnnotationError(annotator.name() + ": positions not preserved");
    }
  }
  return out;
}

StopwordSet parse_stopwords(std::string_view text) {
  StopwordSet out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    out.insert(lowercase(line.substr(b, e - b + 1)));
  }
  return out;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
  return parse_stopwords(read_file(path));
}

std::filesystem::path default_stopwords_path() {
  return std::filesystem::path(LMDA_DATA_DIR) / "stopwords" / "en-v1.txt";
}

std::filesystem::path default_lexicon_path() {
  return std::filesystem::path(LMDA_DATA_DIR) / "lexicon" / "en-v1.tsv";
}

ContentStream filter_content(std::span<const Token> tokens, const StopwordSet& stopwords) {
  ContentStream out;
  out.total_tokens = tokens.size();
  for (const auto& t : tokens) {
    if (is_content(t.pos) && !stopwords.contains(t.lemma)) out.tokens.push_back(t);
  }
  return out;
}

PreparedCorpus prepare_corpus(const Corpus& corpus, const Annotator& annotator,
                              const StopwordSet& stopwords) {
  PreparedCorpus out;
  out.annotator = annotator.name();
  for (const auto& doc : corpus.documents) {
    try {
      const auto surface = tokenize(doc.body);
      const auto tagged = tag_and_lemmatize(surface, annotator);
      auto stream = filter_content(tagged, stopwords);
      stream.doc_id = doc.id;
      stream.subset = doc.subset;
      out.streams.push_back(std::move(stream));
    } catch (const AnnotationError& e) {
      out.warnings.push_back("document '" + doc.id + "' skipped: " + e.what());
      log_warning(out.warnings.back());
    }
  }
  return out;
}

std::string serialize_prepared(const PreparedCorpus& prepared) {
  nlohmann::json j;
  j["annotator"] = prepared.annotator;
  j["warnings"] = prepared.warnings;
  auto& streams = j["streams"] = nlohmann::json::array();
  for (const auto& s : prepared.streams) {
    nlohmann::json tokens = nlohmann::json::array();
    for (const auto& t : s.tokens) {
      tokens.push_back({t.surface, t.lemma, static_cast<int>(t.pos), t.position});
    }
    streams.push_back({{"doc_id", s.doc_id},
                       {"subset", to_string(s.subset)},
                       {"total_tokens", s.total_tokens},
                       {"tokens", std::move(tokens)}});
  }
  const auto cbor = nlohmann::json::to_cbor(j);
  return wrap_artifact(kPrepMagic, kPrepVersion,
                       std::string_view(reinterpret_cast<const char*>(cbor.data()), cbor.size()));
}

PreparedCorpus deserialize_prepared(std::string_view bytes) {
  const auto j = nlohmann::json::from_cbor(unwrap_artifact(kPrepMagic, kPrepVersion, bytes));
  PreparedCorpus out;
  out.annotator = j.at("annotator").get<std::string>();
  out.warnings = j.at("warnings").get<std::vector<std::string>>();
  for (const auto& s : j.at("streams")) {
    ContentStream cs;
    cs.doc_id = s.at("doc_id").get<std::string>();
    cs.subset = parse_subset(s.at("subset").get<std::string>());
    cs.total_tokens = s.at("total_tokens").get<std::size_t>();
    for (const auto& t : s.at("tokens")) {
      cs.tokens.push_back({t.at(0).get<std::string>(), t.at(1).get<std::string>(),
                           static_cast<PartOfSpeech>(t.at(2).get<int>()),
                           t.at(3).get<std::size_t>()});
    }
    out.streams.push_back(std::move(cs));
  }
  return out;
}

}  // namespace lmda
