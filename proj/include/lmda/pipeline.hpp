#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lmda/config.hpp"
#include "lmda/corpus.hpp"
#include "lmda/descriptors.hpp"
#include "lmda/evalstat.hpp"
#include "lmda/factors.hpp"
#include "lmda/lexstats.hpp"
#include "lmda/retrieval.hpp"
#include "lmda/textprep.hpp"

namespace lmda {

enum class Stage { Ingest, Prep, Keyness, Colloc, Matrix, Factor, Exemplars, Index, Experiment, Eval, Report };

const std::vector<Stage>& all_stages();
std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view text);
// "all" expands to every stage; otherwise a comma-separated list.
std::vector<Stage> parse_stage_list(std::string_view text);

// ---- artifact formats ------------------------------------------------------

struct KeywordLists {
  std::vector<KeywordEntry> endorsed;       // endorsed vs controversial reference
  std::vector<KeywordEntry> controversial;  // controversial vs endorsed reference
};

std::string keywords_to_json(const KeywordLists& k);
KeywordLists keywords_from_json(std::string_view text);

struct CollocationArtifact {
  CollocationOptions options;
  CollocationResult endorsed;
  CollocationResult controversial;

  // Endorsed pairs then controversial pairs.
  std::vector<CollocationPair> features() const;
};

std::string collocations_to_json(const CollocationArtifact& c);
CollocationArtifact collocations_from_json(std::string_view text);

std::string dimension_scores_csv(const std::vector<DimensionScore>& scores);

// ---- stage operations on explicit paths -------------------------------------

void run_ingest(const std::filesystem::path& root, const std::filesystem::path& manifest,
                const std::filesystem::path& out);
void run_prep(const std::filesystem::path& corpus, const std::filesystem::path& stopwords,
              const std::filesystem::path& lexicon, const std::filesystem::path& out);
void run_keyness(const std::filesystem::path& prep, const KeynessOptions& options,
                 const std::filesystem::path& out);
void run_colloc(const std::filesystem::path& prep, const std::filesystem::path& keywords,
                const CollocationOptions& options, const std::filesystem::path& out);
void run_matrix(const std::filesystem::path& prep, const std::filesystem::path& collocations,
                const std::filesystem::path& out_csv);
// Writes factor_model.json, scree.csv and dimension_scores.csv into out_dir.
void run_factor(const std::filesystem::path& matrix_csv, const FactorOptions& options,
                const std::filesystem::path& out_dir);

struct ExemplarStageOptions {
  std::vector<int> factors{1, 2, 3};  // factor i of the list becomes dimension i
  std::size_t k = 5;
  std::size_t vocabulary_size = 10;
};

// Reads factor_model.json and matrix; writes exemplars.json,
// exemplars_audit.json and descriptors.json (vocabulary filled from the
// loadings where the bundled descriptor leaves it empty).
void run_exemplars(const std::filesystem::path& matrix_csv, const std::filesystem::path& model_json,
                   const std::filesystem::path& corpus, const std::filesystem::path& descriptors,
                   const ExemplarStageOptions& options, const std::filesystem::path& out_dir);

// Top lemmas of the features assigned to (factor, sign), ordered by |loading|.
std::vector<std::string> pole_vocabulary(const FactorModel& model, std::size_t factor, Pole sign,
                                         std::size_t limit);

void run_index(const std::filesystem::path& exemplars, std::size_t size, std::size_t overlap,
               const EmbeddingProvider& provider, const std::filesystem::path& out);

struct ExperimentInputs {
  std::filesystem::path index;
  std::filesystem::path descriptors;
  std::filesystem::path questions;
  std::filesystem::path templates_dir;
  std::filesystem::path records;
};

GridSummary run_experiment(const ExperimentInputs& in, const std::vector<EndpointConfig>& models,
                           const std::vector<PromptMode>& modes, int repeats, std::size_t k,
                           const EmbeddingProvider& retrieval_provider, const Clock& clock);

void run_eval(const std::filesystem::path& records, const std::filesystem::path& exemplars,
              const EmbeddingProvider& provider, const EvalOptions& options,
              const std::filesystem::path& out_csv);

void run_report(const std::filesystem::path& scores_csv, const std::filesystem::path& out_dir);

// ---- orchestration ----------------------------------------------------------

struct ResolvedPaths {
  std::filesystem::path corpus_root;
  std::filesystem::path manifest;
  std::filesystem::path stopwords;
  std::filesystem::path lexicon;
  std::filesystem::path templates;
  std::filesystem::path descriptors;
  std::filesystem::path questions;
  std::filesystem::path work_dir;
};

// Relative paths resolve against base_dir; empty ones select bundled data.
ResolvedPaths resolve_paths(const PathsConfig& paths, const std::filesystem::path& base_dir);

struct PipelineOptions {
  bool force = false;  // rerun even when digests match
};

struct PipelineResult {
  std::vector<Stage> ran;
  std::vector<Stage> skipped;
};

// Runs `stages` in dependency order. Each stage records its input, config
// and output digests in <work_dir>/provenance.json; a stage whose record
// still matches is skipped.
PipelineResult run_pipeline(const RunConfig& config, const std::filesystem::path& base_dir,
                            const std::vector<Stage>& stages, const PipelineOptions& options = {});

struct VerifyResult {
  bool ok = true;
  std::vector<std::string> problems;
  std::size_t checked = 0;
};

// Re-hashes every recorded input and output and checks that each input
// digest equals the producing stage's recorded output digest.
VerifyResult verify_provenance(const std::filesystem::path& work_dir);

}  // namespace lmda
