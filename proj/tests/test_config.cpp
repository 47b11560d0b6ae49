#include <doctest.h>

#include "lmda/config.hpp"

using namespace lmda;

TEST_CASE("config round-trips through JSON") {
  auto c = demo_config();
  c.thresholds.n_factors = 4;
  c.thresholds.dimensions = {2, 1, 3};
  c.paths.work_dir = "elsewhere";
  c.models.push_back({});
  c.models.back().name = "live";
  c.models.back().api = ChatApi::OpenAI;
  c.models.back().base_url = "https://example.invalid/v1";
  c.models.back().auth_env = "LIVE_KEY";
  CHECK(parse_config(serialize_config(c)) == c);
  CHECK(parse_config(serialize_config(RunConfig{})) == RunConfig{});
}

TEST_CASE("defaults") {
  const RunConfig c = parse_config("{}");
  CHECK(c.thresholds.min_ll == 3.84);
  CHECK(c.thresholds.span == 4);
  CHECK(c.thresholds.min_d == 7.0);
  CHECK(c.thresholds.top_n == 500);
  CHECK_FALSE(c.thresholds.n_factors);
  CHECK(c.thresholds.cutoff == 0.30);
  CHECK(c.thresholds.exemplars_k == 5);
  CHECK(c.thresholds.chunk_size == 300);
  CHECK(c.thresholds.chunk_overlap == 50);
  CHECK(c.thresholds.k == 3);
  CHECK(c.thresholds.repeats == 5);
  CHECK(c.modes.size() == 4);
  const auto demo = demo_config();
  CHECK(demo.models.size() == 4);
  CHECK(demo.clock == "fixed");
}

TEST_CASE("invalid configs name the offending key") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"thresholds": {"spam": 1}})"), doctest::Contains("spam"), Error);
  CHECK_THROWS_WITH_AS(parse_config(R"({"thresholds": {"span": 0}})"), doctest::Contains("span"), Error);
  CHECK_THROWS_WITH_AS(parse_config(R"({"thresholds": {"cutoff": 1.5}})"), doctest::Contains("cutoff"), Error);
  CHECK_THROWS_WITH_AS(parse_config(R"({"thresholds": {"chunk_size": 50, "chunk_overlap": 50}})"),
                       doctest::Contains("chunk_overlap"), Error);
  CHECK_THROWS_WITH_AS(parse_config(R"({"modes": ["sideways"]})"), doctest::Contains("sideways"), Error);
  CHECK_THROWS_AS(parse_config("{"), Error);
  auto dup = demo_config();
  dup.models.push_back(dup.models.front());
  CHECK_THROWS_WITH_AS(validate(dup), doctest::Contains(dup.models.front().name.c_str()), Error);
}

TEST_CASE("providers come from the embedding config") {
  EmbeddingConfig e;
  const auto hash = make_provider(e);
  CHECK(hash->dimension() == 384);
  CHECK(hash->max_tokens() == 256);
  e.kind = "nope";
  CHECK_THROWS_AS(make_provider(e), Error);
}
