#include <CLI11.hpp>

#include <filesystem>
#include <sstream>
#include <iostream>

#include "lmda/config.hpp"
#include "lmda/evalstat.hpp"
#include "lmda/pipeline.hpp"
#include "lmda/promptgen.hpp"
#include "lmda/retrieval.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<lmda::PromptMode> parse_modes(const std::string& text) {
  std::vector<lmda::PromptMode> modes;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) modes.push_back(lmda::parse_prompt_mode(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return modes;
}

struct ConfigArg {
  std::string path;

  lmda::RunConfig load() const { return path.empty() ? lmda::demo_config() : lmda::load_config(path); }
  fs::path base_dir() const {
    return path.empty() ? fs::current_path() : fs::absolute(fs::path(path)).parent_path();
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lexical multidimensional analysis and discourse-alignment toolkit"};
  app.require_subcommand(1);

  std::string root, manifest, out, corpus, stopwords, lexicon, prep, keywords, colloc_path, matrix, model,
      descriptors, exemplars, index, questions, templates, records, scores, work_dir, stages_arg = "all";
  double min_ll = 3.84, min_d = 7.0, cutoff = 0.30;
  std::size_t keyword_top_n = 0, span = 4, top_n = 500, n_factors = 0, k_exemplars = 5, vocab = 10, size = 300,
              overlap = 50, k = 3, window = 256, eval_overlap = 64;
  std::string axis = "content", dims_arg = "1,2,3", kind = "both";
  ConfigArg cfg;

  auto* ingest = app.add_subcommand("ingest", "Load and validate a corpus into a binary cache");
  ingest->add_option("--root", root, "Directory holding the text files")->required();
  ingest->add_option("--manifest", manifest, "CSV manifest: id,subset,title,year,path")->required();
  ingest->add_option("--out", out, "Output corpus cache")->required();

  auto* prep_cmd = app.add_subcommand("prep", "Tokenize, tag, lemmatize and filter to content words");
  prep_cmd->add_option("--corpus", corpus)->required();
  prep_cmd->add_option("--stopwords", stopwords)->default_str(lmda::default_stopwords_path().string());
  prep_cmd->add_option("--lexicon", lexicon)->default_str(lmda::default_lexicon_path().string());
  prep_cmd->add_option("--out", out)->required();

  auto* keyness_cmd = app.add_subcommand("keyness", "Log-likelihood keywords for both subsets");
  keyness_cmd->add_option("--prep", prep)->required();
  keyness_cmd->add_option("--min-ll", min_ll, "Minimum LL score")->capture_default_str();
  keyness_cmd->add_option("--top-n", keyword_top_n, "Keep at most N keywords per subset (0 = all)");
  keyness_cmd->add_option("--out", out)->required();

  auto* colloc_cmd = app.add_subcommand("colloc", "Log-Dice collocation pairs around keyword nodes");
  colloc_cmd->add_option("--prep", prep)->required();
  colloc_cmd->add_option("--keywords", keywords)->required();
  colloc_cmd->add_option("--span", span)->capture_default_str();
  colloc_cmd->add_option("--span-axis", axis, "content|surface")->capture_default_str();
  colloc_cmd->add_option("--min-d", min_d)->capture_default_str();
  colloc_cmd->add_option("--top-n", top_n)->capture_default_str();
  colloc_cmd->add_option("--out", out)->required();

  auto* matrix_cmd = app.add_subcommand("matrix", "Document x collocation-pair frequency matrix");
  matrix_cmd->add_option("--prep", prep)->required();
  matrix_cmd->add_option("--collocations", colloc_path)->required();
  matrix_cmd->add_option("--out", out)->required();

  auto* factor_cmd = app.add_subcommand("factor", "Extract and varimax-rotate factors");
  factor_cmd->add_option("--matrix", matrix)->required();
  factor_cmd->add_option("--factors", n_factors, "Number of factors (0 = eigenvalues above the mean)");
  factor_cmd->add_option("--cutoff", cutoff)->capture_default_str();
  factor_cmd->add_option("--out-dir", out)->required();

  auto* exemplars_cmd = app.add_subcommand("exemplars", "Score documents and select exemplar texts per pole");
  exemplars_cmd->add_option("--matrix", matrix)->required();
  exemplars_cmd->add_option("--model", model)->required();
  exemplars_cmd->add_option("--corpus", corpus)->required();
  exemplars_cmd->add_option("--descriptors", descriptors)->default_str(lmda::default_descriptors_path().string());
  exemplars_cmd->add_option("--dimensions", dims_arg, "Factors kept as dimensions, in order")->capture_default_str();
  exemplars_cmd->add_option("--k", k_exemplars)->capture_default_str();
  exemplars_cmd->add_option("--vocabulary", vocab, "Vocabulary items per pole")->capture_default_str();
  exemplars_cmd->add_option("--out-dir", out)->required();

  auto* index_cmd = app.add_subcommand("index", "Chunk and embed exemplar texts");
  index_cmd->add_option("--exemplars", exemplars)->required();
  index_cmd->add_option("--size", size)->capture_default_str();
  index_cmd->add_option("--overlap", overlap)->capture_default_str();
  index_cmd->add_option("--config", cfg.path, "Config selecting the embedding provider");
  index_cmd->add_option("--out", out)->required();

  auto* prompt_cmd = app.add_subcommand("prompt", "Prompt utilities");
  prompt_cmd->require_subcommand(1);
  auto* preview = prompt_cmd->add_subcommand("preview", "Print the exact prompt for one question");
  std::string mode_arg, pole_arg = "pos", question;
  int dim = 1;
  preview->add_option("--mode", mode_arg, "regular-nocontext|regular-rag|enhanced-nocontext|enhanced-rag")->required();
  preview->add_option("--dim", dim)->capture_default_str();
  preview->add_option("--pole", pole_arg, "pos|neg")->capture_default_str();
  preview->add_option("--question", question)->required();
  preview->add_option("--index", index, "Index for RAG modes");
  preview->add_option("--descriptors", descriptors)->default_str(lmda::default_descriptors_path().string());
  preview->add_option("--templates", templates)->default_str(lmda::default_templates_dir().string());
  preview->add_option("--k", k)->capture_default_str();
  preview->add_option("--config", cfg.path, "Config selecting the embedding provider");

  auto* experiment_cmd = app.add_subcommand("experiment", "Answer generation grid");
  experiment_cmd->require_subcommand(1);
  auto* experiment_run = experiment_cmd->add_subcommand("run", "Run (or resume) the grid");
  std::string modes_arg;
  bool resume = false;
  experiment_run->add_option("--config", cfg.path, "Run configuration (JSON)");
  experiment_run->add_option("--modes", modes_arg, "Comma-separated prompt modes (default: config)");
  experiment_run->add_flag("--resume", resume, "Keep existing records and fill in the rest");
  experiment_run->add_option("--work-dir", work_dir, "Override the configured work directory");

  auto* eval_cmd = app.add_subcommand("eval", "Semantic and lexical alignment scores");
  eval_cmd->add_option("--records", records)->required();
  eval_cmd->add_option("--references", exemplars, "exemplars.json")->required();
  eval_cmd->add_option("--kind", kind, "semantic|lexical|both")->capture_default_str();
  eval_cmd->add_option("--window", window)->capture_default_str();
  eval_cmd->add_option("--overlap", eval_overlap)->capture_default_str();
  eval_cmd->add_option("--config", cfg.path, "Config selecting the evaluation encoder");
  eval_cmd->add_option("--out", out)->required();

  auto* report_cmd = app.add_subcommand("report", "Tables, ANOVA and plot data");
  report_cmd->add_option("--scores", scores)->required();
  report_cmd->add_option("--out", out)->required();

  auto* verify_cmd = app.add_subcommand("verify", "Re-check the provenance chain of a work directory");
  verify_cmd->add_option("--work-dir", work_dir)->required();

  auto* run_cmd = app.add_subcommand("run", "Run pipeline stages from a config");
  bool force = false;
  run_cmd->add_option("--config", cfg.path, "Run configuration (JSON); default: bundled demo");
  run_cmd->add_option("--stages", stages_arg, "Comma-separated stages or 'all'")->capture_default_str();
  run_cmd->add_flag("--force", force, "Rerun stages even when digests match");

  auto* config_cmd = app.add_subcommand("config", "Print a config with every default filled in");
  config_cmd->add_option("--config", cfg.path);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      lmda::run_ingest(root, manifest, out);
    } else if (*prep_cmd) {
      lmda::run_prep(corpus, stopwords.empty() ? lmda::default_stopwords_path() : fs::path(stopwords),
                     lexicon.empty() ? lmda::default_lexicon_path() : fs::path(lexicon), out);
    } else if (*keyness_cmd) {
      lmda::KeynessOptions o;
      o.min_ll = min_ll;
      if (keyword_top_n) o.top_n = keyword_top_n;
      lmda::run_keyness(prep, o, out);
    } else if (*colloc_cmd) {
      lmda::run_colloc(prep, keywords, {span, min_d, top_n, lmda::parse_span_axis(axis)}, out);
    } else if (*matrix_cmd) {
      lmda::run_matrix(prep, colloc_path, out);
    } else if (*factor_cmd) {
      lmda::FactorOptions o;
      if (n_factors) o.n_factors = n_factors;
      o.cutoff = cutoff;
      lmda::run_factor(matrix, o, out);
    } else if (*exemplars_cmd) {
      lmda::ExemplarStageOptions o;
      o.factors.clear();
      std::stringstream ss(dims_arg);
      for (std::string item; std::getline(ss, item, ',');) o.factors.push_back(std::stoi(item));
      o.k = k_exemplars;
      o.vocabulary_size = vocab;
      lmda::run_exemplars(matrix, model, corpus,
                          descriptors.empty() ? lmda::default_descriptors_path() : fs::path(descriptors), o, out);
    } else if (*index_cmd) {
      const auto provider = lmda::make_provider(cfg.load().retrieval_embedding);
      lmda::run_index(exemplars, size, overlap, *provider, out);
    } else if (*preview) {
      lmda::PromptBundle b;
      b.question = question;
      b.mode = lmda::parse_prompt_mode(mode_arg);
      b.pole = lmda::parse_pole(pole_arg);
      const lmda::DimPole dp{dim, b.pole};
      if (lmda::is_enhanced(b.mode)) {
        b.descriptor = lmda::load_descriptors(descriptors.empty() ? lmda::default_descriptors_path()
                                                                  : fs::path(descriptors))
                           .at(dim);
      }
      if (lmda::is_rag(b.mode)) {
        if (index.empty()) throw lmda::Error("RAG modes need --index");
        const auto idx = lmda::ChunkIndex::deserialize(lmda::read_file(index));
        const auto provider = lmda::make_provider(cfg.load().retrieval_embedding);
        for (const auto& hit : idx.retrieve(lmda::make_query(question, dp, *provider), k)) {
          b.passages.push_back(hit.chunk->text);
        }
      }
      const auto t = lmda::PromptTemplates::load(templates.empty() ? lmda::default_templates_dir()
                                                                   : fs::path(templates));
      std::cout << lmda::render(b, t);
    } else if (*experiment_run) {
      auto config = cfg.load();
      if (!work_dir.empty()) config.paths.work_dir = fs::absolute(work_dir).string();
      if (!modes_arg.empty()) config.modes = parse_modes(modes_arg);
      const auto paths = lmda::resolve_paths(config.paths, cfg.base_dir());
      if (!resume && fs::exists(paths.work_dir / "answers.jsonl")) {
        throw lmda::Error("record store " + (paths.work_dir / "answers.jsonl").string() +
                          " exists; pass --resume to continue it");
      }
      lmda::run_pipeline(config, cfg.base_dir(), {lmda::Stage::Experiment}, {.force = true});
    } else if (*eval_cmd) {
      lmda::EvalOptions o;
      o.semantic = kind == "semantic" || kind == "both";
      o.lexical = kind == "lexical" || kind == "both";
      if (!o.semantic && !o.lexical) throw lmda::Error("--kind must be semantic, lexical or both");
      o.window = window;
      o.overlap = eval_overlap;
      const auto provider = lmda::make_provider(cfg.load().evaluation_embedding);
      lmda::run_eval(records, exemplars, *provider, o, out);
    } else if (*report_cmd) {
      lmda::run_report(scores, out);
    } else if (*verify_cmd) {
      const auto r = lmda::verify_provenance(work_dir);
      for (const auto& p : r.problems) std::cout << "MISMATCH " << p << "\n";
      std::cout << (r.ok ? "OK" : "FAILED") << ": " << r.checked << " digests checked\n";
      return r.ok ? 0 : 1;
    } else if (*run_cmd) {
      const auto r = lmda::run_pipeline(cfg.load(), cfg.base_dir(), lmda::parse_stage_list(stages_arg), {.force = force});
      std::cout << r.ran.size() << " stage(s) ran, " << r.skipped.size() << " skipped\n";
    } else if (*config_cmd) {
      std::cout << lmda::serialize_config(cfg.load());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
