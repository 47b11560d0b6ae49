#include "lmda/pipeline.hpp"

#include <algorithm>
#include <functional>
#include <iostream>
#include <nlohmann/json.hpp>
#include <set>

#include "lmda/digest.hpp"
#include "lmda/evalstat.hpp"
#include "lmda/llmgate.hpp"
#include "lmda/promptgen.hpp"
#include "lmda/report.hpp"

namespace lmda {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// ---- stage names ------------------------------------------------------------

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages{Stage::Ingest,    Stage::Prep,  Stage::Keyness,    Stage::Colloc,
                                         Stage::Matrix,    Stage::Factor, Stage::Exemplars, Stage::Index,
                                         Stage::Experiment, Stage::Eval,  Stage::Report};
  return stages;
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Ingest: return "ingest";
    case Stage::Prep: return "prep";
    case Stage::Keyness: return "keyness";
    case Stage::Colloc: return "colloc";
    case Stage::Matrix: return "matrix";
    case Stage::Factor: return "factor";
    case Stage::Exemplars: return "exemplars";
    case Stage::Index: return "index";
    case Stage::Experiment: return "experiment";
    case Stage::Eval: return "eval";
    case Stage::Report: return "report";
  }
  return "unknown";
}

Stage parse_stage(std::string_view text) {
  for (auto s : all_stages()) {
    if (to_string(s) == text) return s;
  }
  throw Error("unknown stage '" + std::string(text) + "'");
}

std::vector<Stage> parse_stage_list(std::string_view text) {
  if (text == "all") return all_stages();
  std::set<Stage> wanted;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (!item.empty()) wanted.insert(parse_stage(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (wanted.empty()) throw Error("no stages given");
  return {wanted.begin(), wanted.end()};
}

// ---- artifact formats ---------------------------------------------------------

namespace {

ojson keyword_list_json(const std::vector<KeywordEntry>& list) {
  ojson arr = ojson::array();
  for (const auto& k : list) {
    arr.push_back({{"lemma", k.lemma},
                   {"freq_target", k.freq_target},
                   {"freq_reference", k.freq_reference},
                   {"ll", k.ll_score}});
  }
  return arr;
}

std::vector<KeywordEntry> keyword_list_from(const json& arr) {
  std::vector<KeywordEntry> out;
  for (const auto& k : arr) {
    out.push_back({k.at("lemma").get<std::string>(), k.at("freq_target").get<Count>(),
                   k.at("freq_reference").get<Count>(), k.at("ll").get<double>()});
  }
  return out;
}

ojson colloc_result_json(const CollocationResult& r, std::size_t top_n) {
  ojson j;
  j["candidates"] = r.candidates;
  j["eligible"] = r.eligible;
  j["selected"] = r.pairs.size();
  j["top_n"] = top_n;
  auto& arr = j["pairs"] = ojson::array();
  for (const auto& p : r.pairs) {
    arr.push_back({{"node", p.node},
                   {"collocate", p.collocate},
                   {"joint", p.joint_freq},
                   {"node_freq", p.node_freq},
                   {"collocate_freq", p.collocate_freq},
                   {"log_dice", p.log_dice}});
  }
  return j;
}

CollocationResult colloc_result_from(const json& j, Subset subset) {
  CollocationResult r;
  r.candidates = j.at("candidates").get<std::size_t>();
  r.eligible = j.at("eligible").get<std::size_t>();
  for (const auto& p : j.at("pairs")) {
    CollocationPair c;
    c.node = p.at("node").get<std::string>();
    c.collocate = p.at("collocate").get<std::string>();
    c.joint_freq = p.at("joint").get<Count>();
    c.node_freq = p.at("node_freq").get<Count>();
    c.collocate_freq = p.at("collocate_freq").get<Count>();
    c.log_dice = p.at("log_dice").get<double>();
    c.subset = subset;
    r.pairs.push_back(std::move(c));
  }
  return r;
}

std::vector<ContentStream> streams_of(const PreparedCorpus& p, Subset s) {
  std::vector<ContentStream> out;
  for (const auto& st : p.streams) {
    if (st.subset == s) out.push_back(st);
  }
  return out;
}

PreparedCorpus load_prepared(const fs::path& path) { return deserialize_prepared(read_file(path)); }

}  // namespace

std::string keywords_to_json(const KeywordLists& k) {
  ojson j;
  j["format"] = "lmda-keywords";
  j["version"] = 1;
  j["endorsed"] = keyword_list_json(k.endorsed);
  j["controversial"] = keyword_list_json(k.controversial);
  return j.dump(2) + "\n";
}

KeywordLists keywords_from_json(std::string_view text) {
  const auto j = json::parse(text);
  if (j.value("format", "") != "lmda-keywords") throw Error("not an lmda-keywords document");
  return {keyword_list_from(j.at("endorsed")), keyword_list_from(j.at("controversial"))};
}

std::vector<CollocationPair> CollocationArtifact::features() const {
  auto out = endorsed.pairs;
  out.insert(out.end(), controversial.pairs.begin(), controversial.pairs.end());
  return out;
}

std::string collocations_to_json(const CollocationArtifact& c) {
  ojson j;
  j["format"] = "lmda-collocations";
  j["version"] = 1;
  j["span"] = c.options.span;
  j["axis"] = std::string(to_string(c.options.axis));
  j["min_d"] = c.options.min_d;
  j["top_n"] = c.options.top_n;
  j["endorsed"] = colloc_result_json(c.endorsed, c.options.top_n);
  j["controversial"] = colloc_result_json(c.controversial, c.options.top_n);
  return j.dump(2) + "\n";
}

CollocationArtifact collocations_from_json(std::string_view text) {
  const auto j = json::parse(text);
  if (j.value("format", "") != "lmda-collocations") throw Error("not an lmda-collocations document");
  CollocationArtifact c;
  c.options.span = j.at("span").get<std::size_t>();
  c.options.axis = parse_span_axis(j.at("axis").get<std::string>());
  c.options.min_d = j.at("min_d").get<double>();
  c.options.top_n = j.at("top_n").get<std::size_t>();
  c.endorsed = colloc_result_from(j.at("endorsed"), Subset::Endorsed);
  c.controversial = colloc_result_from(j.at("controversial"), Subset::Controversial);
  return c;
}

std::string dimension_scores_csv(const std::vector<DimensionScore>& scores) {
  std::string out = "doc_id,factor,score,pole\n";
  char buf[64];
  for (const auto& s : scores) {
    std::snprintf(buf, sizeof buf, "%.12g", s.score);
    out += s.doc_id + "," + std::to_string(s.factor) + "," + buf + "," + std::string(to_string(s.pole)) + "\n";
  }
  return out;
}

// ---- stage operations -----------------------------------------------------------

void run_ingest(const fs::path& root, const fs::path& manifest, const fs::path& out) {
  auto corpus = load_corpus(root, manifest);
  if (corpus.empty()) throw Error("manifest '" + manifest.string() + "' lists no documents");
  write_file(out, serialize_corpus(corpus));
}

void run_prep(const fs::path& corpus_path, const fs::path& stopwords, const fs::path& lexicon,
              const fs::path& out) {
  const auto corpus = deserialize_corpus(read_file(corpus_path));
  const auto annotator = RuleLexiconAnnotator::from_file(lexicon);
  const auto prepared = prepare_corpus(corpus, annotator, load_stopwords(stopwords));
  write_file(out, serialize_prepared(prepared));
}

void run_keyness(const fs::path& prep, const KeynessOptions& options, const fs::path& out) {
  const auto p = load_prepared(prep);
  const auto e = streams_of(p, Subset::Endorsed);
  const auto c = streams_of(p, Subset::Controversial);
  if (e.empty() || c.empty()) throw Error("keyness needs documents from both subsets");
  KeywordLists k{keyness(e, c, options), keyness(c, e, options)};
  write_file(out, keywords_to_json(k));
}

void run_colloc(const fs::path& prep, const fs::path& keywords, const CollocationOptions& options,
                const fs::path& out) {
  const auto p = load_prepared(prep);
  const auto k = keywords_from_json(read_file(keywords));
  std::set<std::string> nodes;
  for (const auto& e : k.endorsed) nodes.insert(e.lemma);
  for (const auto& e : k.controversial) nodes.insert(e.lemma);
  CollocationArtifact a;
  a.options = options;
  a.endorsed = collocations(streams_of(p, Subset::Endorsed), nodes, Subset::Endorsed, options);
  a.controversial = collocations(streams_of(p, Subset::Controversial), nodes, Subset::Controversial, options);
  for (const auto* r : {&a.endorsed, &a.controversial}) {
    if (r->pairs.size() < options.top_n) {
      log_warning("only " + std::to_string(r->pairs.size()) + " collocation pairs reach D >= " +
                  std::to_string(options.min_d) + " in a subset (top_n " + std::to_string(options.top_n) + ")");
    }
  }
  write_file(out, collocations_to_json(a));
}

void run_matrix(const fs::path& prep, const fs::path& collocations_path, const fs::path& out_csv) {
  const auto p = load_prepared(prep);
  const auto a = collocations_from_json(read_file(collocations_path));
  const auto features = a.features();
  if (features.empty()) throw Error("no collocation features to build a matrix from");
  const auto m = build_matrix(p.streams, features, a.options.span, a.options.axis);
  write_file(out_csv, matrix_to_csv(m));
}

void run_factor(const fs::path& matrix_csv, const FactorOptions& options, const fs::path& out_dir) {
  const auto m = matrix_from_csv(read_file(matrix_csv));
  const auto model = fit_factor_model(m, options);
  const auto scored = score_documents(m, model);
  for (const auto& w : scored.warnings) log_warning(w);
  write_file(out_dir / "factor_model.json", model_to_json(model));
  write_file(out_dir / "scree.csv", scree_csv(model));
  write_file(out_dir / "dimension_scores.csv", dimension_scores_csv(scored.scores));
}

std::vector<std::string> pole_vocabulary(const FactorModel& model, std::size_t factor, Pole sign,
                                         std::size_t limit) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < model.assignment.size(); ++i) {
    const auto& a = model.assignment[i];
    if (a && a->factor == factor && a->sign == sign) rows.push_back(i);
  }
  std::sort(rows.begin(), rows.end(), [&](std::size_t x, std::size_t y) {
    const double lx = std::abs(model.assignment[x]->loading), ly = std::abs(model.assignment[y]->loading);
    if (lx != ly) return lx > ly;
    return model.feature_ids[x] < model.feature_ids[y];
  });
  std::vector<std::string> words;
  auto add = [&](std::string w) {
    if (words.size() < limit && std::find(words.begin(), words.end(), w) == words.end()) {
      words.push_back(std::move(w));
    }
  };
  for (auto i : rows) {
    const auto& id = model.feature_ids[i];
    const auto colon = id.find(':');
    const auto bar = id.find('|');
    if (colon == std::string::npos || bar == std::string::npos) continue;
    add(id.substr(colon + 1, bar - colon - 1));
    add(id.substr(bar + 1));
  }
  return words;
}

void run_exemplars(const fs::path& matrix_csv, const fs::path& model_json, const fs::path& corpus_path,
                   const fs::path& descriptors_path, const ExemplarStageOptions& options,
                   const fs::path& out_dir) {
  const auto m = matrix_from_csv(read_file(matrix_csv));
  const auto model = model_from_json(read_file(model_json));
  const auto corpus = deserialize_corpus(read_file(corpus_path));
  auto descriptors = load_descriptors(descriptors_path);
  for (int f : options.factors) {
    if (static_cast<std::size_t>(f) > model.n_factors) {
      throw Error("dimension list names factor " + std::to_string(f) + " but the model has " +
                  std::to_string(model.n_factors) + " factors");
    }
  }
  const auto scored = score_documents(m, model);
  const auto selection = select_exemplars(scored.scores, options.k);

  std::map<std::string, const Document*> docs;
  for (const auto& d : corpus.documents) docs[d.id] = &d;

  ExemplarSet set;
  ojson audit;
  audit["k"] = options.k;
  audit["poles"] = ojson::array();
  std::vector<std::string> warnings = scored.warnings;
  warnings.insert(warnings.end(), selection.warnings.begin(), selection.warnings.end());
  for (std::size_t i = 0; i < options.factors.size(); ++i) {
    const int dim = static_cast<int>(i + 1);
    const auto factor = static_cast<std::size_t>(options.factors[i]);
    auto& descriptor = descriptors.at(dim);
    for (auto pole : {Pole::Positive, Pole::Negative}) {
      const auto it = selection.exemplars.find(DimPole{static_cast<int>(factor), pole});
      std::size_t count = 0;
      if (it != selection.exemplars.end()) {
        for (std::size_t r = 0; r < it->second.size(); ++r) {
          const auto& s = it->second[r];
          const auto* doc = docs.at(s.doc_id);
          set.docs.push_back({DimPole{dim, pole}, r, s.doc_id, doc->subset, s.score, doc->body});
          ++count;
        }
      }
      if (count < options.k) {
        warnings.push_back("dimension " + std::to_string(dim) + std::string(pole_sign(pole)) + " has only " +
                           std::to_string(count) + " exemplars");
      }
      audit["poles"].push_back({{"dim", dim},
                                {"pole", std::string(to_string(pole))},
                                {"factor", factor},
                                {"count", count}});
      auto& pd = descriptor.pole(pole);
      if (pd.vocabulary.empty()) pd.vocabulary = pole_vocabulary(model, factor, pole, options.vocabulary_size);
    }
  }
  audit["total"] = set.docs.size();
  audit["warnings"] = warnings;
  for (const auto& w : warnings) log_warning(w);
  write_file(out_dir / "exemplars.json", exemplars_to_json(set));
  write_file(out_dir / "exemplars_audit.json", audit.dump(2) + "\n");
  write_file(out_dir / "descriptors.json", descriptors_to_json(descriptors));
}

void run_index(const fs::path& exemplars, std::size_t size, std::size_t overlap,
               const EmbeddingProvider& provider, const fs::path& out) {
  const auto set = exemplars_from_json(read_file(exemplars));
  auto index = ChunkIndex::build(chunk_documents(set, size, overlap), provider);
  write_file(out, index.serialize());
}

GridSummary run_experiment(const ExperimentInputs& in, const std::vector<EndpointConfig>& models,
                           const std::vector<PromptMode>& modes, int repeats, std::size_t k,
                           const EmbeddingProvider& retrieval_provider, const Clock& clock) {
  if (models.empty()) throw Error("no models configured for the experiment");
  const auto index = ChunkIndex::deserialize(read_file(in.index));
  const auto descriptors = load_descriptors(in.descriptors);
  const auto questions = load_questions(in.questions);
  const auto templates = PromptTemplates::load(in.templates_dir);
  if (index.provider_name() != retrieval_provider.name()) {
    throw Error("index was built with '" + index.provider_name() + "', not '" + retrieval_provider.name() + "'");
  }
  for (const auto& q : questions) {
    if (index.count(q.dp) == 0) {
      log_warning("question " + q.id + " targets a pole without indexed chunks");
    }
  }
  std::vector<std::unique_ptr<ChatEndpoint>> owned;
  std::vector<const ChatEndpoint*> endpoints;
  for (const auto& m : models) {
    owned.push_back(make_endpoint(m));
    endpoints.push_back(owned.back().get());
  }
  const PromptBuilder build = [&](const Question& q, PromptMode mode) {
    PromptBundle b;
    b.question = q.text;
    b.mode = mode;
    b.pole = q.dp.pole;
    if (is_enhanced(mode)) b.descriptor = descriptors.at(q.dp.dim);
    if (is_rag(mode)) {
      const auto query = make_query(q.text, q.dp, retrieval_provider);
      for (const auto& hit : index.retrieve(query, k)) b.passages.push_back(hit.chunk->text);
    }
    return render(b, templates);
  };
  RecordStore store(in.records);
  return run_grid(endpoints, questions, modes, repeats, build, store, clock);
}

void run_eval(const fs::path& records, const fs::path& exemplars, const EmbeddingProvider& provider,
              const EvalOptions& options, const fs::path& out_csv) {
  const auto recs = load_records(records);
  const auto set = exemplars_from_json(read_file(exemplars));
  const auto scores = evaluate_records(recs, set, provider, options);
  write_file(out_csv, scores_to_csv(scores));
}

void run_report(const fs::path& scores_csv, const fs::path& out_dir) {
  const auto scores = scores_from_csv(read_file(scores_csv));
  const auto report = build_report(scores);
  for (const auto& [name, contents] : report.files) write_file(out_dir / name, contents);
}

// ---- orchestration ------------------------------------------------------------------

ResolvedPaths resolve_paths(const PathsConfig& p, const fs::path& base_dir) {
  const fs::path data(LMDA_DATA_DIR);
  auto pick = [&](const std::string& value, const fs::path& fallback) {
    if (value.empty()) return fallback;
    const fs::path v(value);
    return v.is_absolute() ? v : base_dir / v;
  };
  ResolvedPaths r;
  r.corpus_root = pick(p.corpus_root, data / "demo" / "texts");
  r.manifest = pick(p.manifest, data / "demo" / "manifest.csv");
  r.stopwords = pick(p.stopwords, default_stopwords_path());
  r.lexicon = pick(p.lexicon, default_lexicon_path());
  r.templates = pick(p.templates, default_templates_dir());
  r.descriptors = pick(p.descriptors, default_descriptors_path());
  r.questions = pick(p.questions, default_questions_path());
  r.work_dir = pick(p.work_dir, base_dir / "lmda-work");
  return r;
}

namespace {

constexpr std::string_view kProvenanceFile = "provenance.json";

struct StagePlan {
  Stage stage;
  std::vector<fs::path> inputs;    // external files and upstream artifacts
  std::vector<fs::path> outputs;
  ojson config;
  std::function<void()> action;
};

std::string path_key(const fs::path& p) { return fs::weakly_canonical(p).generic_string(); }

json load_provenance(const fs::path& work_dir) {
  const auto path = work_dir / kProvenanceFile;
  if (!fs::exists(path)) return json{{"version", 1}, {"stages", json::object()}};
  return json::parse(read_file(path));
}

void save_provenance(const fs::path& work_dir, const json& p) {
  write_file(work_dir / kProvenanceFile, p.dump(2) + "\n");
}

Stage producer_of(const fs::path& artifact, const std::map<std::string, Stage>& producers) {
  return producers.at(path_key(artifact));
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& config, const fs::path& base_dir, const std::vector<Stage>& stages,
                             const PipelineOptions& options) {
  validate(config);
  const auto paths = resolve_paths(config.paths, base_dir);
  const auto& t = config.thresholds;
  const auto& w = paths.work_dir;
  fs::create_directories(w);

  const fs::path corpus = w / "corpus.bin", prep = w / "prep.bin", keywords = w / "keywords.json",
                 colloc = w / "collocations.json", matrix = w / "matrix.csv", model = w / "factor_model.json",
                 scree = w / "scree.csv", dscores = w / "dimension_scores.csv", exemplars = w / "exemplars.json",
                 exaudit = w / "exemplars_audit.json", descriptors = w / "descriptors.json", index = w / "index.bin",
                 answers = w / "answers.jsonl", scores = w / "scores.csv", report_dir = w / "report";

  auto retrieval_provider = make_provider(config.retrieval_embedding);
  auto evaluation_provider = make_provider(config.evaluation_embedding);

  KeynessOptions kopt{t.min_ll, t.keyword_top_n};
  CollocationOptions copt{t.span, t.min_d, t.top_n, parse_span_axis(t.span_axis)};
  FactorOptions fopt;
  fopt.n_factors = t.n_factors;
  fopt.cutoff = t.cutoff;
  ExemplarStageOptions eopt{t.dimensions, t.exemplars_k, t.vocabulary_size};
  EvalOptions vopt;
  vopt.window = t.window;
  vopt.overlap = t.overlap;
  vopt.max_in_flight = config.evaluation_embedding.max_in_flight;

  const auto embedding_json = [](const EmbeddingConfig& e) {
    return ojson{{"kind", e.kind}, {"dimension", e.dimension}, {"seed", e.seed}, {"max_tokens", e.max_tokens},
                 {"base_url", e.base_url}, {"model", e.model}};
  };

  std::vector<fs::path> ingest_inputs{paths.manifest};
  if (fs::exists(paths.manifest)) {
    for (const auto& row : parse_manifest(read_file(paths.manifest))) ingest_inputs.push_back(paths.corpus_root / row.path);
  }

  std::vector<StagePlan> plans;
  plans.push_back({Stage::Ingest, ingest_inputs, {corpus}, ojson::object(),
                   [&] { run_ingest(paths.corpus_root, paths.manifest, corpus); }});
  plans.push_back({Stage::Prep, {corpus, paths.stopwords, paths.lexicon}, {prep}, ojson::object(),
                   [&] { run_prep(corpus, paths.stopwords, paths.lexicon, prep); }});
  plans.push_back({Stage::Keyness, {prep}, {keywords},
                   ojson{{"min_ll", t.min_ll}, {"top_n", t.keyword_top_n ? ojson(*t.keyword_top_n) : ojson()}},
                   [&] { run_keyness(prep, kopt, keywords); }});
  plans.push_back({Stage::Colloc, {prep, keywords}, {colloc},
                   ojson{{"span", t.span}, {"axis", t.span_axis}, {"min_d", t.min_d}, {"top_n", t.top_n}},
                   [&] { run_colloc(prep, keywords, copt, colloc); }});
  plans.push_back({Stage::Matrix, {prep, colloc}, {matrix}, ojson::object(),
                   [&] { run_matrix(prep, colloc, matrix); }});
  plans.push_back({Stage::Factor, {matrix}, {model, scree, dscores},
                   ojson{{"n_factors", t.n_factors ? ojson(*t.n_factors) : ojson()}, {"cutoff", t.cutoff}},
                   [&] { run_factor(matrix, fopt, w); }});
  plans.push_back({Stage::Exemplars, {matrix, model, corpus, paths.descriptors}, {exemplars, exaudit, descriptors},
                   ojson{{"dimensions", t.dimensions}, {"k", t.exemplars_k}, {"vocabulary_size", t.vocabulary_size}},
                   [&] { run_exemplars(matrix, model, corpus, paths.descriptors, eopt, w); }});
  plans.push_back({Stage::Index, {exemplars}, {index},
                   ojson{{"size", t.chunk_size}, {"overlap", t.chunk_overlap},
                         {"embedding", embedding_json(config.retrieval_embedding)}},
                   [&] { run_index(exemplars, t.chunk_size, t.chunk_overlap, *retrieval_provider, index); }});
  {
    ojson models = ojson::array();
    for (const auto& m : config.models) {
      models.push_back({{"name", m.name}, {"api", std::string(to_string(m.api))}, {"model", m.model},
                        {"base_url", m.base_url}, {"temperature", m.temperature}, {"max_tokens", m.max_tokens}});
    }
    ojson modes = ojson::array();
    for (auto m : config.modes) modes.push_back(std::string(to_string(m)));
    const fs::path templates_regular = paths.templates / "regular.txt";
    const fs::path templates_enhanced = paths.templates / "enhanced.txt";
    plans.push_back({Stage::Experiment, {index, descriptors, paths.questions, templates_regular, templates_enhanced},
                     {answers},
                     ojson{{"models", models}, {"modes", modes}, {"repeats", config.thresholds.repeats}, {"k", t.k},
                           {"clock", config.clock}, {"embedding", embedding_json(config.retrieval_embedding)}},
                     [&] {
                       const auto clock = config.clock == "fixed" ? fixed_clock("1970-01-01T00:00:00Z")
                                                                  : system_clock_utc();
                       const auto s = run_experiment({index, descriptors, paths.questions, paths.templates, answers},
                                                     config.models, config.modes, config.thresholds.repeats, t.k,
                                                     *retrieval_provider, clock);
                       std::cerr << "experiment: " << s.planned << " cells, " << s.generated << " generated, "
                                 << s.skipped << " already stored, " << s.failed << " failed\n";
                     }});
  }
  plans.push_back({Stage::Eval, {answers, exemplars}, {scores},
                   ojson{{"window", t.window}, {"overlap", t.overlap},
                         {"embedding", embedding_json(config.evaluation_embedding)}},
                   [&] { run_eval(answers, exemplars, *evaluation_provider, vopt, scores); }});
  plans.push_back({Stage::Report, {scores},
                   {report_dir / "table_regular.txt", report_dir / "table_enhanced.txt", report_dir / "anova.txt",
                    report_dir / "overall_rag.csv"},
                   ojson::object(), [&] { run_report(scores, report_dir); }});

  std::map<std::string, Stage> producers;
  for (const auto& p : plans) {
    for (const auto& o : p.outputs) producers.emplace(path_key(o), p.stage);
  }

  auto provenance = load_provenance(w);
  PipelineResult result;
  const std::set<Stage> wanted(stages.begin(), stages.end());
  for (const auto& plan : plans) {
    if (!wanted.count(plan.stage)) continue;
    const std::string name(to_string(plan.stage));
    for (const auto& in : plan.inputs) {
      if (fs::exists(in)) continue;
      const auto key = path_key(in);
      if (producers.count(key)) {
        throw Error("stage '" + name + "' needs " + in.filename().string() + ": run " +
                    std::string(to_string(producer_of(in, producers))) + " first");
      }
      throw Error("stage '" + name + "' input '" + in.string() + "' does not exist");
    }
    json inputs = json::object();
    for (const auto& in : plan.inputs) inputs[path_key(in)] = file_sha256(in);
    const auto config_digest = sha256_hex(name + "\n" + plan.config.dump());

    bool up_to_date = false;
    if (!options.force && provenance["stages"].contains(name)) {
      const auto& rec = provenance["stages"][name];
      up_to_date = rec.value("config_digest", "") == config_digest && rec.value("inputs", json()) == inputs;
      if (up_to_date) {
        const auto& outs = rec.at("outputs");
        for (const auto& out : plan.outputs) {
          const auto key = path_key(out);
          if (!fs::exists(out) || !outs.contains(key) || outs[key] != file_sha256(out)) {
            up_to_date = false;
            break;
          }
        }
      }
    }
    if (up_to_date) {
      result.skipped.push_back(plan.stage);
      std::cerr << name << ": up to date\n";
      continue;
    }
    std::cerr << name << ": running\n";
    plan.action();
    json outputs = json::object();
    for (const auto& out : plan.outputs) {
      if (!fs::exists(out)) throw Error("stage '" + name + "' did not produce " + out.string());
      outputs[path_key(out)] = file_sha256(out);
    }
    provenance["stages"][name] = {{"config", json::parse(plan.config.dump())},
                                  {"config_digest", config_digest},
                                  {"inputs", inputs},
                                  {"outputs", outputs}};
    save_provenance(w, provenance);
    result.ran.push_back(plan.stage);
  }
  return result;
}

VerifyResult verify_provenance(const fs::path& work_dir) {
  VerifyResult r;
  const auto path = work_dir / kProvenanceFile;
  if (!fs::exists(path)) {
    r.ok = false;
    r.problems.push_back("no provenance record in " + work_dir.string());
    return r;
  }
  const auto p = json::parse(read_file(path));
  std::map<std::string, std::pair<std::string, std::string>> produced;  // path -> (stage, digest)
  for (const auto& [stage, rec] : p.at("stages").items()) {
    for (const auto& [file, digest] : rec.at("outputs").items()) produced[file] = {stage, digest.get<std::string>()};
  }
  auto check = [&](const std::string& stage, const std::string& file, const std::string& digest, bool output) {
    ++r.checked;
    if (!fs::exists(file)) {
      r.problems.push_back(stage + ": " + file + " is missing");
      return;
    }
    if (file_sha256(file) != digest) {
      r.problems.push_back(stage + ": " + file + (output ? " changed since it was written" : " changed since it was read"));
    }
    if (!output) {
      const auto it = produced.find(file);
      if (it != produced.end() && it->second.second != digest) {
        r.problems.push_back(stage + ": input " + file + " does not match the output recorded by " + it->second.first);
      }
    }
  };
  for (const auto& [stage, rec] : p.at("stages").items()) {
    for (const auto& [file, digest] : rec.at("inputs").items()) check(stage, file, digest.get<std::string>(), false);
    for (const auto& [file, digest] : rec.at("outputs").items()) check(stage, file, digest.get<std::string>(), true);
  }
  r.ok = r.problems.empty();
  return r;
}

}  // namespace lmda
