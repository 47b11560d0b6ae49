#include <doctest.h>

#include <cmath>
#include <random>

#include "lmda/lexstats.hpp"
#include "oracles.hpp"

using namespace lmda;

TEST_CASE("log-likelihood closed form cases") {
  CHECK(log_likelihood(2, 1, 100, 50) == 0.0);
  CHECK(log_likelihood(10, 0, 1000, 1000) == doctest::Approx(2.0 * 10.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(log_likelihood(0, 0, 10, 10) == 0.0);
}

TEST_CASE("log-likelihood matches the contingency-table oracle") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Count c = 1 + rng() % 100000, d = 1 + rng() % 100000;
    const Count a = rng() % (c + 1), b = rng() % (d + 1);
    const double got = log_likelihood(a, b, c, d);
    const double want = oracle::contingency_ll(a, b, c, d);
    CHECK(std::abs(got - want) <= 1e-9 * std::max(1.0, std::abs(want)));
    CHECK(got >= 0.0);
  }
}

TEST_CASE("keyness keeps overused lemmas above the threshold") {
  std::vector<std::string> target, reference;
  for (int i = 0; i < 30; ++i) target.push_back("hcq");
  for (int i = 0; i < 200; ++i) target.push_back(i % 2 ? "trial" : "data");
  for (int i = 0; i < 200; ++i) reference.push_back(i % 2 ? "trial" : "data");
  for (int i = 0; i < 30; ++i) reference.push_back("anxiety");
  const std::vector<ContentStream> t{oracle::make_stream("t", Subset::Endorsed, target)};
  const std::vector<ContentStream> r{oracle::make_stream("r", Subset::Controversial, reference)};
  const auto kw = keyness(t, r);
  REQUIRE(kw.size() == 1);
  CHECK(kw[0].lemma == "hcq");
  CHECK(kw[0].freq_target == 30);
  CHECK(kw[0].freq_reference == 0);

  KeynessOptions strict;
  strict.min_ll = 1e9;
  CHECK(keyness(t, r, strict).empty());
}

TEST_CASE("log-Dice values") {
  CHECK(log_dice(7, 7, 7) == 14.0);
  CHECK(log_dice(1, 2, 2) == doctest::Approx(13.0).epsilon(1e-15));
  CHECK(log_dice(1, 1000, 1000) < 7.0);
}

TEST_CASE("window pair counts equal an O(n^2) scan") {
  std::mt19937 rng(3);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e", "f"};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> lemmas;
    for (int i = 0; i < 200; ++i) lemmas.push_back(vocab[rng() % vocab.size()]);
    auto stream = oracle::make_stream("s", Subset::Endorsed, lemmas);
    // Gaps in surface positions exercise the surface axis.
    std::size_t pos = 0;
    for (auto& t : stream.tokens) {
      t.position = pos;
      pos += 1 + rng() % 3;
    }
    const std::set<std::string> nodes{"a", "c", "e"};
    for (auto axis : {SpanAxis::Content, SpanAxis::Surface}) {
      CHECK(count_window_pairs(stream, nodes, 4, axis) == oracle::window_scan(stream, nodes, 4, axis));
    }
  }
}

TEST_CASE("collocations filter by D and keep the top n") {
  std::vector<std::string> lemmas;
  for (int i = 0; i < 50; ++i) {
    for (const char* w : {"x", "y", "filler1", "filler2", "filler3", "filler4", "filler5"}) lemmas.push_back(w);
  }
  const std::vector<ContentStream> streams{oracle::make_stream("s", Subset::Endorsed, lemmas)};
  CollocationOptions o;
  o.top_n = 3;
  const auto r = collocations(streams, {"x"}, Subset::Endorsed, o);
  CHECK(r.pairs.size() == 3);
  for (std::size_t i = 1; i < r.pairs.size(); ++i) CHECK(r.pairs[i - 1].log_dice >= r.pairs[i].log_dice);
  const auto scan = oracle::window_scan(streams[0], {"x"}, 4, SpanAxis::Content);
  for (const auto& p : r.pairs) {
    CHECK(p.log_dice >= 7.0);
    CHECK(p.joint_freq == scan.at({p.node, p.collocate}));
    CHECK(p.log_dice == log_dice(p.joint_freq, p.node_freq, p.collocate_freq));
  }
  CHECK(r.pairs[0].id().rfind("E:x|", 0) == 0);
  CHECK(r.eligible >= r.pairs.size());
  CHECK(r.candidates >= r.eligible);
}

TEST_CASE("build_matrix normalizes per thousand words and standardizes") {
  std::vector<std::string> one(600, "w");
  for (int i = 0; i < 3; ++i) {
    one[static_cast<std::size_t>(i * 100)] = "x";
    one[static_cast<std::size_t>(i * 100 + 1)] = "y";
  }
  CollocationPair f;
  f.node = "x";
  f.collocate = "y";
  const std::vector<ContentStream> s1{oracle::make_stream("d", Subset::Endorsed, one)};
  const std::vector<CollocationPair> feats{f};
  const auto m1 = build_matrix(s1, feats);
  CHECK(m1.raw(0, 0) == 3.0);
  CHECK(m1.normalized(0, 0) == doctest::Approx(5.0).epsilon(1e-12));

  std::mt19937 rng(4);
  std::vector<std::string> raw_ids{"f1", "f2", "f3", "const"};
  Eigen::MatrixXd raw(10, 4);
  std::vector<std::string> ids;
  std::vector<std::size_t> words;
  for (int d = 0; d < 10; ++d) {
    ids.push_back("d" + std::to_string(d));
    words.push_back(1000);
    for (int j = 0; j < 3; ++j) raw(d, j) = static_cast<double>(rng() % 9);
    raw(d, 3) = 2.0;
  }
  const auto m = standardize(ids, words, raw_ids, raw);
  CHECK(m.raw.rows() == m.z.rows());
  CHECK(m.normalized.cols() == m.z.cols());
  for (int j = 0; j < 3; ++j) {
    const auto col = m.z.col(j);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / 9.0);
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(sd - 1.0) < 1e-9);
  }
  CHECK_FALSE(m.active[3]);
  CHECK(m.z.col(3).isZero());
  CHECK_FALSE(m.audit.empty());
}

TEST_CASE("matrix csv round-trips") {
  Eigen::MatrixXd raw(2, 2);
  raw << 1, 2, 3, 0;
  const auto m = standardize({"a", "b"}, {100, 200}, {"E:x|y", "C:p|q"}, raw);
  const auto back = matrix_from_csv(matrix_to_csv(m));
  CHECK(back.doc_ids == m.doc_ids);
  CHECK(back.feature_ids == m.feature_ids);
  CHECK(back.raw == m.raw);
  CHECK(back.content_words == m.content_words);
}
