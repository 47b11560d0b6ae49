#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lmda/evalstat.hpp"

namespace lmda {

// Half away from zero at two decimals, tolerant of binary representation
// error (0.775 -> 0.78).
double round2(double x);
std::string format2(double x);

// Direction of RAG relative to LLM, judged on the two-decimal values:
// "↑", "↓" or "→".
std::string_view direction_marker(double llm, double rag);

// "37.34", "inf"
std::string format_f(double f);
// "0.043" down to 0.001, "1.1×10⁻⁷" below, "0" at zero.
std::string format_p(double p);

// Fixed-width table: per kind a block of model rows and an Average row;
// column pairs LLM/RAG for Dim 1..m (+) then Dim 1..m (–). Models keep
// their first-seen order.
std::string render_score_table(std::span<const AlignmentScore> scores, PromptType prompt_type,
                               std::string_view title);

std::string render_anova_table(std::span<const AnovaResult> results);

// Mean RAG score per model, kind and prompt type over the available poles.
std::string overall_rag_csv(std::span<const AlignmentScore> scores);

struct Report {
  std::map<std::string, std::string> files;  // file name -> contents
};

// Runs the four ANOVAs (where both groups have data) and renders every file.
Report build_report(std::span<const AlignmentScore> scores);

}  // namespace lmda
