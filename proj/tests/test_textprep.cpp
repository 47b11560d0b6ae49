#include <doctest.h>

#include <random>
#include <set>

#include "lmda/textprep.hpp"
#include "oracles.hpp"

using namespace lmda;

namespace {

const RuleLexiconAnnotator& bundled() {
  static const auto annotator = RuleLexiconAnnotator::from_file(default_lexicon_path());
  return annotator;
}

std::vector<Token> annotate(std::string_view text) {
  const auto surface = tokenize(text);
  return tag_and_lemmatize(surface, bundled());
}

}  // namespace

TEST_CASE("tokenize lowercases and keeps hyphenated terms") {
  const auto t = tokenize("COVID-19 works.");
  REQUIRE(t.size() == 2);
  CHECK(t[0].text == "covid-19");
  CHECK(t[1].text == "works");
  CHECK(t[0].position == 0);
  CHECK(t[1].position == 1);
  CHECK(tokenize("").empty());
  CHECK(tokenize("  ...  ").empty());
}

TEST_CASE("tokenize count equals a regex scan on synthetic text") {
  std::mt19937 rng(5);
  const std::vector<std::string> words{"drug", "trial", "covid-19", "patient's", "a", "data",
                                       "x2",   "sars-cov-2", "dose", "isn't"};
  const std::vector<std::string> seps{" ", ", ", ". ", " - ", "\n", " (", ") ", "; "};
  std::string text;
  for (int i = 0; i < 1000; ++i) {
    text += words[rng() % words.size()];
    text += seps[rng() % seps.size()];
  }
  CHECK(tokenize(text).size() == oracle::regex_token_count(text));
}

TEST_CASE("lexicon readings") {
  auto t = annotate("She studies mortality");
  REQUIRE(t.size() == 3);
  CHECK(t[1].lemma == "study");
  CHECK(t[1].pos == PartOfSpeech::Verb);
  CHECK(t[2].lemma == "mortality");
  CHECK(t[2].pos == PartOfSpeech::Noun);

  t = annotate("the studies");
  CHECK(t[1].lemma == "study");
  CHECK(t[1].pos == PartOfSpeech::Noun);
}

TEST_CASE("suffix rules for words outside the lexicon") {
  const auto t = annotate("vaccinations quickly escalating reinfections");
  CHECK(t[0].lemma == "vaccination");
  CHECK(t[0].pos == PartOfSpeech::Noun);
  CHECK(t[1].pos == PartOfSpeech::Adverb);
  CHECK(t[2].pos == PartOfSpeech::Verb);
  CHECK(t[3].lemma == "reinfection");
}

TEST_CASE("annotation is deterministic and lemmas are lowercase") {
  const std::string sample =
      "Early treatment with hydroxychloroquine was studied in several trials during the pandemic and "
      "the results were compared with placebo groups by independent reviewers who examined mortality "
      "hospital stays viral clearance adverse events cardiac effects dosage regimens outpatient "
      "protocols and the quality of published evidence across many countries in two years of work";
  const auto a = annotate(sample);
  const auto b = annotate(sample);
  CHECK(a == b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK_FALSE(a[i].lemma.empty());
    for (char c : a[i].lemma) CHECK_FALSE((c >= 'A' && c <= 'Z'));
    if (i) CHECK(a[i].position > a[i - 1].position);
  }
}

TEST_CASE("lexicon parse errors carry line numbers") {
  CHECK_THROWS_WITH_AS(RuleLexiconAnnotator("a\tb\n"), doctest::Contains("line 1"), Error);
  CHECK_THROWS_WITH_AS(RuleLexiconAnnotator("# c\nx\tx\tBOGUS\n"), doctest::Contains("line 2"), Error);
}

TEST_CASE("filter_content drops stopwords and function words") {
  const std::vector<Token> tokens{{"the", "the", PartOfSpeech::Other, 0},
                                  {"drug", "drug", PartOfSpeech::Noun, 1},
                                  {"works", "work", PartOfSpeech::Verb, 2}};
  const auto out = filter_content(tokens, StopwordSet{"the"});
  REQUIRE(out.tokens.size() == 2);
  CHECK(out.tokens[0].surface == "drug");
  CHECK(out.tokens[1].surface == "works");
  CHECK(out.total_tokens == 3);

  const std::vector<Token> stops{{"the", "the", PartOfSpeech::Noun, 0}, {"of", "of", PartOfSpeech::Noun, 1}};
  const auto empty = filter_content(stops, StopwordSet{"the", "of"});
  CHECK(empty.tokens.empty());
  CHECK(empty.total_tokens == 2);
}

TEST_CASE("filter_content matches a set-membership filter") {
  std::mt19937 rng(9);
  const std::vector<std::string> lemmas{"a", "b", "c", "d", "e", "f", "g"};
  const StopwordSet stop{"b", "e"};
  std::vector<Token> tokens;
  for (std::size_t i = 0; i < 500; ++i) {
    const auto& l = lemmas[rng() % lemmas.size()];
    tokens.push_back({l, l, static_cast<PartOfSpeech>(rng() % 5), i});
  }
  const auto out = filter_content(tokens, stop);
  std::vector<Token> expected;
  for (const auto& t : tokens) {
    if (t.pos != PartOfSpeech::Other && !stop.count(t.lemma)) expected.push_back(t);
  }
  CHECK(out.tokens == expected);
}

TEST_CASE("bundled stopwords load") {
  const auto stop = load_stopwords(default_stopwords_path());
  CHECK(stop.count("the"));
  CHECK(stop.count("of"));
  CHECK_FALSE(stop.count("mortality"));
  CHECK(parse_stopwords("# comment\nA\n\n b \n") == StopwordSet{"a", "b"});
}
