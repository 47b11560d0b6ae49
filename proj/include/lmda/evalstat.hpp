#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lmda/common.hpp"
#include "lmda/embedding.hpp"
#include "lmda/llmgate.hpp"
#include "lmda/retrieval.hpp"

namespace lmda {

enum class Condition { LLM, RAG };
enum class PromptType { Regular, Enhanced };
enum class ScoreKind { Semantic, Lexical };

std::string_view to_string(Condition c);
std::string_view to_string(PromptType t);
std::string_view to_string(ScoreKind k);
Condition parse_condition(std::string_view text);
PromptType parse_prompt_type(std::string_view text);
ScoreKind parse_score_kind(std::string_view text);

Condition condition_of(PromptMode mode);
PromptType prompt_type_of(PromptMode mode);

struct AlignmentScore {
  std::string model;
  DimPole dp;
  Condition condition = Condition::LLM;
  PromptType prompt_type = PromptType::Regular;
  ScoreKind kind = ScoreKind::Semantic;
  std::optional<double> value;  // nullopt marks a missing cell

  friend bool operator==(const AlignmentScore&, const AlignmentScore&) = default;
};

// Length-weighted mean of window embeddings, L2-normalized. Texts within
// the provider's max_tokens form a single window.
Eigen::VectorXd pooled_embedding(std::string_view text, const EmbeddingProvider& provider,
                                 std::size_t window = 256, std::size_t overlap = 64);

double semantic_alignment(std::string_view answers, std::string_view reference,
                          const EmbeddingProvider& provider, std::size_t window = 256,
                          std::size_t overlap = 64);

// Two-document TF-IDF cosine: raw tf, idf = ln(3 / (1 + df)) + 1, L2 norm.
// Returns 0 (with a warning) when either text has no tokens.
double lexical_alignment(std::string_view answers, std::string_view reference);

// I_x(a, b) for a, b > 0 and x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);
// P(F > f) under F(d1, d2).
double f_survival(double f, double d1, double d2);

struct OneWayAnova {
  double ssb = 0.0;
  double ssw = 0.0;
  double f = 0.0;  // +inf when ssw = 0 and the means differ
  double df1 = 0.0;
  double df2 = 0.0;
  double p = 1.0;
};

OneWayAnova one_way_anova(std::span<const double> a, std::span<const double> b);

struct AnovaResult {
  PromptType prompt_type = PromptType::Regular;
  ScoreKind kind = ScoreKind::Semantic;
  double f_statistic = 0.0;
  double df1 = 0.0;
  double df2 = 0.0;
  double p_value = 1.0;
  bool significant_at_05 = false;
  std::size_t n_llm = 0;
  std::size_t n_rag = 0;
  std::size_t missing = 0;  // cells excluded for lacking a value
};

// Groups every present (model, pole) cell of the given prompt type and kind
// by condition.
AnovaResult anova_llm_vs_rag(std::span<const AlignmentScore> scores, PromptType prompt_type, ScoreKind kind);

struct EvalOptions {
  bool semantic = true;
  bool lexical = true;
  std::size_t window = 256;
  std::size_t overlap = 64;
  std::size_t max_in_flight = 4;
};

// One score per (model, pole, condition, prompt type, kind) found in the
// records. Answers of a cell are concatenated in question, repeat order.
std::vector<AlignmentScore> evaluate_records(const std::vector<AnswerRecord>& records,
                                             const ExemplarSet& exemplars,
                                             const EmbeddingProvider& provider,
                                             const EvalOptions& options = {});

std::string scores_to_csv(std::span<const AlignmentScore> scores);
std::vector<AlignmentScore> scores_from_csv(std::string_view csv);

}  // namespace lmda
