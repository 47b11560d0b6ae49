#include "lmda/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <tuple>

namespace lmda {

namespace {

std::size_t display_width(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::string pad(std::string s, std::size_t width) {
  const auto w = display_width(s);
  if (w < width) s.append(width - w, ' ');
  return s;
}

std::string rtrim(std::string s) {
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

std::string dim_header(DimPole dp) {
  return "Dim " + std::to_string(dp.dim) + (dp.pole == Pole::Positive ? " (+)" : " (–)");
}

constexpr std::size_t kModelWidth = 16;
constexpr std::size_t kValueWidth = 6;  // "0.80" plus two spaces
constexpr std::size_t kPairWidth = 11;
constexpr std::string_view kGap = "   ";
constexpr std::string_view kMissing = "n/a";

struct Cell {
  std::optional<double> llm;
  std::optional<double> rag;
};

std::string render_pair(const Cell& c) {
  std::string out = pad(c.llm ? format2(*c.llm) : std::string(kMissing), kValueWidth);
  out += c.rag ? format2(*c.rag) : std::string(kMissing);
  if (c.llm && c.rag) out += direction_marker(*c.llm, *c.rag);
  return pad(std::move(out), kPairWidth);
}

std::string superscript(long value) {
  static const char* digits[] = {"⁰", "¹", "²", "³", "⁴",
                                 "⁵", "⁶", "⁷", "⁸", "⁹"};
  std::string out = value < 0 ? "⁻" : "";
  for (char c : std::to_string(std::labs(value))) out += digits[c - '0'];
  return out;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace

double round2(double x) {
  const double r = std::floor(std::abs(x) * 100.0 + 0.5 + 1e-9) / 100.0;
  return x < 0 ? -r : r;
}

std::string format2(double x) {
  const double r = round2(x);
  return fixed(r == 0.0 ? 0.0 : r, 2);
}

std::string_view direction_marker(double llm, double rag) {
  const double a = round2(llm), b = round2(rag);
  if (std::abs(b - a) < 0.005) return "→";
  return b > a ? "↑" : "↓";
}

std::string format_f(double f) {
  if (std::isinf(f)) return "inf";
  return fixed(f, 2);
}

std::string format_p(double p) {
  if (p == 0.0) return "0";
  if (p >= 0.001) return fixed(p, 3);
  long e = static_cast<long>(std::floor(std::log10(p)));
  double m = std::round(p / std::pow(10.0, static_cast<double>(e)) * 10.0) / 10.0;
  if (m >= 10.0) {
    m /= 10.0;
    ++e;
  }
  return fixed(m, 1) + "×10" + superscript(e);
}

std::string render_score_table(std::span<const AlignmentScore> scores, PromptType prompt_type,
                               std::string_view title) {
  std::vector<std::string> models;
  int max_dim = 0;
  std::set<ScoreKind> kinds;
  std::size_t missing = 0;
  std::map<std::tuple<ScoreKind, std::string, DimPole>, Cell> cells;
  for (const auto& s : scores) {
    if (s.prompt_type != prompt_type) continue;
    if (std::find(models.begin(), models.end(), s.model) == models.end()) models.push_back(s.model);
    max_dim = std::max(max_dim, s.dp.dim);
    kinds.insert(s.kind);
    if (!s.value) ++missing;
    auto& cell = cells[{s.kind, s.model, s.dp}];
    (s.condition == Condition::LLM ? cell.llm : cell.rag) = s.value;
  }
  std::vector<DimPole> columns;
  for (auto pole : {Pole::Positive, Pole::Negative}) {
    for (int d = 1; d <= max_dim; ++d) columns.push_back({d, pole});
  }

  std::string out(title);
  out += "\n";
  std::string header = pad("", kModelWidth);
  std::string sub = pad("Model", kModelWidth);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) {
      header += kGap;
      sub += kGap;
    }
    header += pad(dim_header(columns[i]), kPairWidth);
    sub += pad(pad("LLM", kValueWidth) + "RAG", kPairWidth);
  }
  out += rtrim(header) + "\n" + rtrim(sub) + "\n";

  for (auto kind : {ScoreKind::Semantic, ScoreKind::Lexical}) {
    if (!kinds.count(kind)) continue;
    out += std::string(to_string(kind) == "semantic" ? "Semantic" : "Lexical") + "\n";
    std::vector<std::pair<double, std::size_t>> llm_sum(columns.size()), rag_sum(columns.size());
    for (const auto& model : models) {
      std::string row = pad(model, kModelWidth);
      for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) row += kGap;
        Cell c;
        if (auto it = cells.find({kind, model, columns[i]}); it != cells.end()) c = it->second;
        if (c.llm) {
          llm_sum[i].first += *c.llm;
          ++llm_sum[i].second;
        }
        if (c.rag) {
          rag_sum[i].first += *c.rag;
          ++rag_sum[i].second;
        }
        row += render_pair(c);
      }
      out += rtrim(row) + "\n";
    }
    std::string avg = pad("Average", kModelWidth);
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) avg += kGap;
      Cell c;
      if (llm_sum[i].second) c.llm = llm_sum[i].first / static_cast<double>(llm_sum[i].second);
      if (rag_sum[i].second) c.rag = rag_sum[i].first / static_cast<double>(rag_sum[i].second);
      avg += render_pair(c);
    }
    out += rtrim(avg) + "\n";
  }
  if (missing) out += "Missing cells: " + std::to_string(missing) + "\n";
  return out;
}

std::string render_anova_table(std::span<const AnovaResult> results) {
  std::string out = "ANOVA, LLM vs RAG scores\n";
  out += rtrim(pad("Kind", 10) + pad("Prompt Type", 13) + pad("F-statistic", 13) + pad("p-value", 12) +
               "p < 0.05") +
         "\n";
  std::size_t missing = 0;
  for (const auto& r : results) {
    const std::string kind = r.kind == ScoreKind::Semantic ? "Semantic" : "Lexical";
    const std::string type = r.prompt_type == PromptType::Regular ? "Regular" : "Enhanced";
    out += pad(kind, 10) + pad(type, 13) + pad(format_f(r.f_statistic), 13) + pad(format_p(r.p_value), 12) +
           (r.significant_at_05 ? "✓" : "✗") + "\n";
    missing += r.missing;
  }
  out += "\n";
  for (const auto& r : results) {
    out += (r.kind == ScoreKind::Semantic ? "Semantic" : "Lexical") + std::string("/") +
           std::string(to_string(r.prompt_type)) + ": df = (" + fixed(r.df1, 0) + ", " + fixed(r.df2, 0) +
           "), n(LLM) = " + std::to_string(r.n_llm) + ", n(RAG) = " + std::to_string(r.n_rag) + "\n";
  }
  out += "Significance is marked for p < 0.05. Missing cells excluded: " + std::to_string(missing) + "\n";
  return out;
}

std::string overall_rag_csv(std::span<const AlignmentScore> scores) {
  std::vector<std::string> models;
  std::map<std::tuple<std::string, ScoreKind, PromptType>, std::pair<double, std::size_t>> sums;
  for (const auto& s : scores) {
    if (s.condition != Condition::RAG || !s.value) continue;
    if (std::find(models.begin(), models.end(), s.model) == models.end()) models.push_back(s.model);
    auto& acc = sums[{s.model, s.kind, s.prompt_type}];
    acc.first += *s.value;
    ++acc.second;
  }
  std::string out = "model,kind,prompt_type,mean,cells\n";
  for (const auto& model : models) {
    for (auto kind : {ScoreKind::Semantic, ScoreKind::Lexical}) {
      for (auto type : {PromptType::Regular, PromptType::Enhanced}) {
        const auto it = sums.find({model, kind, type});
        if (it == sums.end()) continue;
        out += model + "," + std::string(to_string(kind)) + "," + std::string(to_string(type)) + "," +
               fixed(it->second.first / static_cast<double>(it->second.second), 6) + "," +
               std::to_string(it->second.second) + "\n";
      }
    }
  }
  return out;
}

Report build_report(std::span<const AlignmentScore> scores) {
  Report report;
  report.files["table_regular.txt"] =
      render_score_table(scores, PromptType::Regular, "Regular prompt: semantic and lexical alignment");
  report.files["table_enhanced.txt"] =
      render_score_table(scores, PromptType::Enhanced, "Enhanced prompt: semantic and lexical alignment");
  std::vector<AnovaResult> anova;
  for (auto kind : {ScoreKind::Semantic, ScoreKind::Lexical}) {
    for (auto type : {PromptType::Enhanced, PromptType::Regular}) {
      std::size_t llm = 0, rag = 0;
      for (const auto& s : scores) {
        if (s.kind == kind && s.prompt_type == type && s.value) ++(s.condition == Condition::LLM ? llm : rag);
      }
      if (llm && rag && llm + rag >= 3) anova.push_back(anova_llm_vs_rag(scores, type, kind));
    }
  }
  report.files["anova.txt"] = render_anova_table(anova);
  report.files["overall_rag.csv"] = overall_rag_csv(scores);
  return report;
}

}  // namespace lmda
