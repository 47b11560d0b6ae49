#include "lmda/config.hpp"

#include <nlohmann/json.hpp>
#include <set>

namespace lmda {

namespace {

using ojson = nlohmann::ordered_json;

void reject_unknown(const nlohmann::json& j, std::string_view where, std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) throw Error("config: '" + std::string(where) + "' must be an object");
  const std::set<std::string_view> known(keys);
  for (const auto& [k, _] : j.items()) {
    if (!known.count(k)) throw Error("config: unknown key '" + std::string(where) + "." + k + "'");
  }
}

template <typename T>
void read(const nlohmann::json& j, std::string_view key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(std::string(key)).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error("config: key '" + std::string(key) + "' has the wrong type");
  }
}

template <typename T>
void read_optional(const nlohmann::json& j, std::string_view key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(std::string(key)).is_null()) {
    out.reset();
    return;
  }
  T v{};
  read(j, key, v);
  out = v;
}

ojson embedding_json(const EmbeddingConfig& e) {
  ojson j;
  j["kind"] = e.kind;
  j["dimension"] = e.dimension;
  j["seed"] = e.seed;
  j["max_tokens"] = e.max_tokens;
  j["base_url"] = e.base_url;
  j["path"] = e.path;
  j["model"] = e.model;
  j["auth_env"] = e.auth_env;
  j["batch_size"] = e.batch_size;
  j["max_in_flight"] = e.max_in_flight;
  return j;
}

EmbeddingConfig parse_embedding(const nlohmann::json& j, std::string_view where) {
  reject_unknown(j, where,
                 {"kind", "dimension", "seed", "max_tokens", "base_url", "path", "model", "auth_env",
                  "batch_size", "max_in_flight"});
  EmbeddingConfig e;
  read(j, "kind", e.kind);
  read(j, "dimension", e.dimension);
  read(j, "seed", e.seed);
  read(j, "max_tokens", e.max_tokens);
  read(j, "base_url", e.base_url);
  read(j, "path", e.path);
  read(j, "model", e.model);
  read(j, "auth_env", e.auth_env);
  read(j, "batch_size", e.batch_size);
  read(j, "max_in_flight", e.max_in_flight);
  return e;
}

ojson endpoint_json(const EndpointConfig& m) {
  ojson j;
  j["name"] = m.name;
  j["api"] = std::string(to_string(m.api));
  j["base_url"] = m.base_url;
  j["model"] = m.model;
  j["auth_env"] = m.auth_env;
  j["temperature"] = m.temperature;
  j["max_tokens"] = m.max_tokens;
  j["max_in_flight"] = m.max_in_flight;
  j["retry_attempts"] = m.http.retry.attempts;
  j["retry_base_delay_ms"] = m.http.retry.base_delay.count();
  j["timeout_s"] = m.http.timeout.count();
  return j;
}

EndpointConfig parse_endpoint(const nlohmann::json& j) {
  reject_unknown(j, "models[]",
                 {"name", "api", "base_url", "model", "auth_env", "temperature", "max_tokens",
                  "max_in_flight", "retry_attempts", "retry_base_delay_ms", "timeout_s"});
  EndpointConfig m;
  read(j, "name", m.name);
  std::string api = "mock";
  read(j, "api", api);
  m.api = parse_chat_api(api);
  read(j, "base_url", m.base_url);
  read(j, "model", m.model);
  read(j, "auth_env", m.auth_env);
  read(j, "temperature", m.temperature);
  read(j, "max_tokens", m.max_tokens);
  read(j, "max_in_flight", m.max_in_flight);
  read(j, "retry_attempts", m.http.retry.attempts);
  long long delay = m.http.retry.base_delay.count();
  read(j, "retry_base_delay_ms", delay);
  m.http.retry.base_delay = std::chrono::milliseconds(delay);
  long long timeout = m.http.timeout.count();
  read(j, "timeout_s", timeout);
  m.http.timeout = std::chrono::seconds(timeout);
  return m;
}

}  // namespace

std::unique_ptr<EmbeddingProvider> make_provider(const EmbeddingConfig& config) {
  if (config.kind == "hash") {
    return std::make_unique<HashProjectionProvider>(config.dimension, config.seed, config.max_tokens);
  }
  if (config.kind == "remote") {
    RemoteEmbeddingConfig r;
    r.base_url = config.base_url;
    r.path = config.path;
    r.model = config.model;
    r.auth_env = config.auth_env;
    r.dimension = config.dimension;
    r.max_tokens = config.max_tokens;
    r.batch_size = config.batch_size;
    r.max_in_flight = config.max_in_flight;
    return std::make_unique<RemoteEmbeddingProvider>(r);
  }
  throw Error("unknown embedding provider kind '" + config.kind + "'");
}

void validate(const RunConfig& c) {
  const auto& t = c.thresholds;
  auto positive = [](bool ok, std::string_view key) {
    if (!ok) throw Error("config: thresholds." + std::string(key) + " must be positive");
  };
  positive(t.min_ll > 0, "min_ll");
  positive(!t.keyword_top_n || *t.keyword_top_n > 0, "keyword_top_n");
  positive(t.span > 0, "span");
  positive(t.min_d > 0, "min_d");
  positive(t.top_n > 0, "top_n");
  positive(!t.n_factors || *t.n_factors > 0, "n_factors");
  positive(t.cutoff > 0 && t.cutoff < 1, "cutoff");
  positive(t.exemplars_k > 0, "exemplars_k");
  positive(t.vocabulary_size > 0, "vocabulary_size");
  positive(t.chunk_size > 0, "chunk_size");
  positive(t.k > 0, "k");
  positive(t.repeats > 0, "repeats");
  positive(t.window > 0, "window");
  if (t.chunk_overlap >= t.chunk_size) throw Error("config: thresholds.chunk_overlap must be below chunk_size");
  if (t.overlap >= t.window) throw Error("config: thresholds.overlap must be below window");
  if (t.span_axis != "content" && t.span_axis != "surface") {
    throw Error("config: thresholds.span_axis must be 'content' or 'surface'");
  }
  if (t.dimensions.empty()) throw Error("config: thresholds.dimensions must not be empty");
  std::set<int> dims;
  for (int d : t.dimensions) {
    if (d < 1 || !dims.insert(d).second) throw Error("config: thresholds.dimensions must be distinct factor numbers >= 1");
  }
  std::set<std::string> names;
  for (const auto& m : c.models) {
    if (m.name.empty()) throw Error("config: every model needs a name");
    if (!names.insert(m.name).second) throw Error("config: duplicate model name '" + m.name + "'");
    if (m.max_in_flight == 0) throw Error("config: model '" + m.name + "' needs max_in_flight >= 1");
  }
  if (c.clock != "system" && c.clock != "fixed") throw Error("config: clock must be 'system' or 'fixed'");
  for (const auto* e : {&c.retrieval_embedding, &c.evaluation_embedding}) {
    if (e->kind != "hash" && e->kind != "remote") throw Error("config: embedding kind must be 'hash' or 'remote'");
    if (e->dimension == 0 || e->max_tokens == 0) throw Error("config: embedding dimension and max_tokens must be positive");
  }
  if (t.window > c.evaluation_embedding.max_tokens) {
    throw Error("config: thresholds.window exceeds the evaluation provider's max_tokens");
  }
}

RunConfig parse_config(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config: invalid JSON: ") + e.what());
  }
  reject_unknown(j, "config",
                 {"paths", "thresholds", "retrieval_embedding", "evaluation_embedding", "models", "modes", "clock"});
  RunConfig c;
  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    reject_unknown(p, "paths",
                   {"corpus_root", "manifest", "stopwords", "lexicon", "templates", "descriptors", "questions",
                    "work_dir"});
    read(p, "corpus_root", c.paths.corpus_root);
    read(p, "manifest", c.paths.manifest);
    read(p, "stopwords", c.paths.stopwords);
    read(p, "lexicon", c.paths.lexicon);
    read(p, "templates", c.paths.templates);
    read(p, "descriptors", c.paths.descriptors);
    read(p, "questions", c.paths.questions);
    read(p, "work_dir", c.paths.work_dir);
  }
  if (j.contains("thresholds")) {
    const auto& t = j.at("thresholds");
    reject_unknown(t, "thresholds",
                   {"min_ll", "keyword_top_n", "span", "span_axis", "min_d", "top_n", "n_factors", "dimensions",
                    "cutoff", "exemplars_k", "vocabulary_size", "chunk_size", "chunk_overlap", "k", "repeats",
                    "window", "overlap"});
    auto& d = c.thresholds;
    read(t, "min_ll", d.min_ll);
    read_optional(t, "keyword_top_n", d.keyword_top_n);
    read(t, "span", d.span);
    read(t, "span_axis", d.span_axis);
    read(t, "min_d", d.min_d);
    read(t, "top_n", d.top_n);
    read_optional(t, "n_factors", d.n_factors);
    read(t, "dimensions", d.dimensions);
    read(t, "cutoff", d.cutoff);
    read(t, "exemplars_k", d.exemplars_k);
    read(t, "vocabulary_size", d.vocabulary_size);
    read(t, "chunk_size", d.chunk_size);
    read(t, "chunk_overlap", d.chunk_overlap);
    read(t, "k", d.k);
    read(t, "repeats", d.repeats);
    read(t, "window", d.window);
    read(t, "overlap", d.overlap);
  }
  if (j.contains("retrieval_embedding")) c.retrieval_embedding = parse_embedding(j.at("retrieval_embedding"), "retrieval_embedding");
  if (j.contains("evaluation_embedding")) c.evaluation_embedding = parse_embedding(j.at("evaluation_embedding"), "evaluation_embedding");
  if (j.contains("models")) {
    for (const auto& m : j.at("models")) c.models.push_back(parse_endpoint(m));
  }
  if (j.contains("modes")) {
    c.modes.clear();
    for (const auto& m : j.at("modes")) c.modes.push_back(parse_prompt_mode(m.get<std::string>()));
  }
  read(j, "clock", c.clock);
  validate(c);
  return c;
}

std::string serialize_config(const RunConfig& c) {
  ojson j;
  auto& p = j["paths"];
  p["corpus_root"] = c.paths.corpus_root;
  p["manifest"] = c.paths.manifest;
  p["stopwords"] = c.paths.stopwords;
  p["lexicon"] = c.paths.lexicon;
  p["templates"] = c.paths.templates;
  p["descriptors"] = c.paths.descriptors;
  p["questions"] = c.paths.questions;
  p["work_dir"] = c.paths.work_dir;
  auto& t = j["thresholds"];
  const auto& d = c.thresholds;
  t["min_ll"] = d.min_ll;
  t["keyword_top_n"] = d.keyword_top_n ? ojson(*d.keyword_top_n) : ojson(nullptr);
  t["span"] = d.span;
  t["span_axis"] = d.span_axis;
  t["min_d"] = d.min_d;
  t["top_n"] = d.top_n;
  t["n_factors"] = d.n_factors ? ojson(*d.n_factors) : ojson(nullptr);
  t["dimensions"] = d.dimensions;
  t["cutoff"] = d.cutoff;
  t["exemplars_k"] = d.exemplars_k;
  t["vocabulary_size"] = d.vocabulary_size;
  t["chunk_size"] = d.chunk_size;
  t["chunk_overlap"] = d.chunk_overlap;
  t["k"] = d.k;
  t["repeats"] = d.repeats;
  t["window"] = d.window;
  t["overlap"] = d.overlap;
  j["retrieval_embedding"] = embedding_json(c.retrieval_embedding);
  j["evaluation_embedding"] = embedding_json(c.evaluation_embedding);
  j["models"] = ojson::array();
  for (const auto& m : c.models) j["models"].push_back(endpoint_json(m));
  j["modes"] = ojson::array();
  for (auto m : c.modes) j["modes"].push_back(std::string(to_string(m)));
  j["clock"] = c.clock;
  return j.dump(2) + "\n";
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

RunConfig demo_config() {
  RunConfig c;
  for (const auto* name : {"mock-a", "mock-b", "mock-c", "mock-d"}) {
    EndpointConfig m;
    m.name = name;
    m.api = ChatApi::Mock;
    m.temperature = 0.0;
    m.max_tokens = 0;
    c.models.push_back(m);
  }
  c.clock = "fixed";
  return c;
}

}  // namespace lmda
