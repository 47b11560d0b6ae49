#include <doctest.h>

#include <random>

#include "lmda/common.hpp"
#include "lmda/corpus.hpp"
#include "test_support.hpp"

using namespace lmda;

namespace {

void write_two_doc_corpus(const testing::TempDir& dir) {
  write_file(dir / "a.txt", "Hydroxychloroquine cut mortality.\r\nSecond line.");
  write_file(dir / "b.txt", "Anxiety rose during lockdown.");
  write_file(dir / "manifest.csv",
             "id,subset,title,year,path\n"
             "A1,endorsed,\"Title, with comma\",2020,a.txt\n"
             "B1,controversial,Other,2021,b.txt\n");
}

}  // namespace

TEST_CASE("load_corpus keeps manifest order and normalizes line endings") {
  testing::TempDir dir("corpus");
  write_two_doc_corpus(dir);
  const auto corpus = load_corpus(dir.path(), dir / "manifest.csv");
  REQUIRE(corpus.size() == 2);
  CHECK(corpus.documents[0].id == "A1");
  CHECK(corpus.documents[0].subset == Subset::Endorsed);
  CHECK(corpus.documents[0].title == "Title, with comma");
  CHECK(corpus.documents[0].body.find('\r') == std::string::npos);
  CHECK(corpus.documents[0].word_count == 5);
  CHECK(corpus.documents[1].subset == Subset::Controversial);
  CHECK(corpus.has_both_subsets());
}

TEST_CASE("load_corpus names a missing file") {
  testing::TempDir dir("corpus-missing");
  write_file(dir / "manifest.csv", "id,subset,title,year,path\nX,endorsed,t,2020,x.txt\n");
  CHECK_THROWS_WITH_AS(load_corpus(dir.path(), dir / "manifest.csv"), doctest::Contains("x.txt"), Error);
}

TEST_CASE("load_corpus rejects duplicate ids and unknown subsets") {
  testing::TempDir dir("corpus-bad");
  write_file(dir / "a.txt", "text");
  write_file(dir / "dup.csv", "id,subset,title,year,path\nA,endorsed,t,2020,a.txt\nA,endorsed,t,2020,a.txt\n");
  CHECK_THROWS_WITH_AS(load_corpus(dir.path(), dir / "dup.csv"), doctest::Contains("duplicate"), Error);
  write_file(dir / "sub.csv", "id,subset,title,year,path\nA,neutral,t,2020,a.txt\n");
  CHECK_THROWS_WITH_AS(load_corpus(dir.path(), dir / "sub.csv"), doctest::Contains("neutral"), Error);
  write_file(dir / "hdr.csv", "id,title\nA,t\n");
  CHECK_THROWS_AS(load_corpus(dir.path(), dir / "hdr.csv"), Error);
}

TEST_CASE("normalize_text composes to NFC") {
  // "e" + combining acute becomes a single code point.
  CHECK(normalize_text("caf\x65\xcc\x81") == "caf\xc3\xa9");
  CHECK(normalize_text("a\r\nb\rc") == "a\nb\nc");
}

TEST_CASE("subset filters, is idempotent and matches a linear filter") {
  testing::TempDir dir("corpus-subset");
  write_two_doc_corpus(dir);
  const auto corpus = load_corpus(dir.path(), dir / "manifest.csv");
  const auto e = subset(corpus, Subset::Endorsed);
  CHECK(e.size() == 1);
  CHECK(subset(e, Subset::Endorsed).documents == e.documents);

  std::mt19937 rng(11);
  Corpus random;
  for (int i = 0; i < 20; ++i) {
    Document d;
    d.id = "D" + std::to_string(i);
    d.subset = rng() % 2 ? Subset::Endorsed : Subset::Controversial;
    d.body = "body " + std::to_string(i);
    random.documents.push_back(d);
  }
  for (auto which : {Subset::Endorsed, Subset::Controversial}) {
    std::vector<Document> expected;
    for (const auto& d : random.documents) {
      if (d.subset == which) expected.push_back(d);
    }
    CHECK(subset(random, which).documents == expected);
  }
}

TEST_CASE("corpus serialization round-trips") {
  testing::TempDir dir("corpus-serial");
  write_two_doc_corpus(dir);
  const auto corpus = load_corpus(dir.path(), dir / "manifest.csv");
  CHECK(deserialize_corpus(serialize_corpus(corpus)) == corpus);
  CHECK_THROWS_AS(deserialize_corpus("garbage"), Error);
}
