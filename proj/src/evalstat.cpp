#include "lmda/evalstat.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "lmda/parallel.hpp"
#include "lmda/textprep.hpp"

namespace lmda {

std::string_view to_string(Condition c) { return c == Condition::LLM ? "LLM" : "RAG"; }
std::string_view to_string(PromptType t) { return t == PromptType::Regular ? "regular" : "enhanced"; }
std::string_view to_string(ScoreKind k) { return k == ScoreKind::Semantic ? "semantic" : "lexical"; }

Condition parse_condition(std::string_view text) {
  if (text == "LLM" || text == "llm") return Condition::LLM;
  if (text == "RAG" || text == "rag") return Condition::RAG;
  throw Error("unknown condition '" + std::string(text) + "'");
}

PromptType parse_prompt_type(std::string_view text) {
  if (text == "regular") return PromptType::Regular;
  if (text == "enhanced") return PromptType::Enhanced;
  throw Error("unknown prompt type '" + std::string(text) + "'");
}

ScoreKind parse_score_kind(std::string_view text) {
  if (text == "semantic") return ScoreKind::Semantic;
  if (text == "lexical") return ScoreKind::Lexical;
  throw Error("unknown score kind '" + std::string(text) + "'");
}

Condition condition_of(PromptMode mode) { return is_rag(mode) ? Condition::RAG : Condition::LLM; }
PromptType prompt_type_of(PromptMode mode) {
  return is_enhanced(mode) ? PromptType::Enhanced : PromptType::Regular;
}

Eigen::VectorXd pooled_embedding(std::string_view text, const EmbeddingProvider& provider,
                                 std::size_t window, std::size_t overlap) {
  const auto tokens = provider.tokenize(text);
  if (tokens.empty()) throw Error("cannot embed a text without tokens");
  if (tokens.size() <= provider.max_tokens()) return l2_normalize(provider.embed_one(std::string(text)));
  if (window > provider.max_tokens()) throw Error("window exceeds the provider's max_tokens");
  std::vector<std::string> pieces;
  std::vector<double> weights;
  for (const auto& [b, e] : window_ranges(tokens.size(), window, overlap)) {
    pieces.push_back(provider.detokenize(std::span(tokens).subspan(b, e - b)));
    weights.push_back(static_cast<double>(e - b));
  }
  const auto vectors = provider.embed(pieces);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(provider.dimension()));
  double total = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    sum += weights[i] * vectors[i];
    total += weights[i];
  }
  return l2_normalize(sum / total);
}

double semantic_alignment(std::string_view answers, std::string_view reference,
                          const EmbeddingProvider& provider, std::size_t window, std::size_t overlap) {
  return cosine(pooled_embedding(answers, provider, window, overlap),
                pooled_embedding(reference, provider, window, overlap));
}

double lexical_alignment(std::string_view answers, std::string_view reference) {
  std::map<std::string, std::pair<double, double>> tf;
  std::size_t na = 0, nb = 0;
  for (auto& t : tokenize(answers)) {
    tf[std::move(t.text)].first += 1.0;
    ++na;
  }
  for (auto& t : tokenize(reference)) {
    tf[std::move(t.text)].second += 1.0;
    ++nb;
  }
  if (na == 0 || nb == 0) {
    log_warning("lexical alignment with an empty text is defined as 0");
    return 0.0;
  }
  double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
  for (const auto& [term, counts] : tf) {
    const double df = (counts.first > 0) + (counts.second > 0);
    const double idf = std::log(3.0 / (1.0 + df)) + 1.0;
    const double wa = counts.first * idf, wb = counts.second * idf;
    dot += wa * wb;
    norm_a += wa * wa;
    norm_b += wb * wb;
  }
  return std::clamp(dot / (std::sqrt(norm_a) * std::sqrt(norm_b)), 0.0, 1.0);
}

namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw Error("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error("incomplete beta requires a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw Error("incomplete beta requires x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double f_survival(double f, double d1, double d2) {
  if (std::isinf(f)) return 0.0;
  if (!(f > 0.0)) return 1.0;
  return regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

OneWayAnova one_way_anova(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error("ANOVA requires two non-empty groups");
  if (a.size() + b.size() < 3) throw Error("ANOVA requires at least three observations");
  const auto mean = [](std::span<const double> g) {
    double s = 0.0;
    for (double v : g) s += v;
    return s / static_cast<double>(g.size());
  };
  const double ma = mean(a), mb = mean(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double grand = (na * ma + nb * mb) / (na + nb);
  OneWayAnova r;
  r.ssb = na * (ma - grand) * (ma - grand) + nb * (mb - grand) * (mb - grand);
  for (double v : a) r.ssw += (v - ma) * (v - ma);
  for (double v : b) r.ssw += (v - mb) * (v - mb);
  r.df1 = 1.0;
  r.df2 = na + nb - 2.0;
  if (r.ssw == 0.0) {
    r.f = ma == mb ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    r.f = (r.ssb / r.df1) / (r.ssw / r.df2);
  }
  r.p = f_survival(r.f, r.df1, r.df2);
  return r;
}

AnovaResult anova_llm_vs_rag(std::span<const AlignmentScore> scores, PromptType prompt_type, ScoreKind kind) {
  AnovaResult out;
  out.prompt_type = prompt_type;
  out.kind = kind;
  std::vector<double> llm, rag;
  for (const auto& s : scores) {
    if (s.prompt_type != prompt_type || s.kind != kind) continue;
    if (!s.value) {
      ++out.missing;
      continue;
    }
    (s.condition == Condition::LLM ? llm : rag).push_back(*s.value);
  }
  out.n_llm = llm.size();
  out.n_rag = rag.size();
  const auto r = one_way_anova(llm, rag);
  out.f_statistic = r.f;
  out.df1 = r.df1;
  out.df2 = r.df2;
  out.p_value = r.p;
  out.significant_at_05 = r.p < 0.05;
  return out;
}

std::vector<AlignmentScore> evaluate_records(const std::vector<AnswerRecord>& records,
                                             const ExemplarSet& exemplars,
                                             const EmbeddingProvider& provider,
                                             const EvalOptions& options) {
  using CellKey = std::tuple<std::string, DimPole, Condition, PromptType>;
  std::map<CellKey, std::vector<const AnswerRecord*>> cells;
  for (const auto& r : records) {
    auto& cell = cells[{r.model, r.dp, condition_of(r.mode), prompt_type_of(r.mode)}];
    if (r.ok) cell.push_back(&r);
  }
  std::map<DimPole, std::string> references;
  for (const auto& [key, _] : cells) {
    const auto dp = std::get<1>(key);
    if (!references.count(dp)) {
      auto text = exemplars.reference_text(dp);
      if (text.empty()) {
        throw Error("no reference text for dimension " + std::to_string(dp.dim) +
                    std::string(pole_sign(dp.pole)));
      }
      references.emplace(dp, std::move(text));
    }
  }
  std::map<DimPole, Eigen::VectorXd> reference_vectors;
  if (options.semantic) {
    for (const auto& [dp, text] : references) {
      reference_vectors.emplace(dp, pooled_embedding(text, provider, options.window, options.overlap));
    }
  }

  std::vector<CellKey> keys;
  std::vector<std::string> texts;
  for (auto& [key, recs] : cells) {
    std::stable_sort(recs.begin(), recs.end(), [](const AnswerRecord* a, const AnswerRecord* b) {
      return std::tie(a->question_id, a->repeat_index) < std::tie(b->question_id, b->repeat_index);
    });
    std::string text;
    for (const auto* r : recs) {
      if (!text.empty()) text.push_back('\n');
      text += r->answer_text;
    }
    keys.push_back(key);
    texts.push_back(std::move(text));
  }

  std::vector<std::optional<double>> semantic(keys.size()), lexical(keys.size());
  parallel_for(keys.size(), options.max_in_flight, [&](std::size_t i) {
    const auto dp = std::get<1>(keys[i]);
    if (texts[i].empty()) return;
    if (options.semantic) {
      try {
        semantic[i] = cosine(pooled_embedding(texts[i], provider, options.window, options.overlap),
                             reference_vectors.at(dp));
      } catch (const std::exception& e) {
        log_warning("semantic score missing for " + std::get<0>(keys[i]) + ": " + e.what());
      }
    }
    if (options.lexical) lexical[i] = lexical_alignment(texts[i], references.at(dp));
  });

  std::vector<AlignmentScore> out;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& [model, dp, condition, prompt_type] = keys[i];
    if (options.semantic) out.push_back({model, dp, condition, prompt_type, ScoreKind::Semantic, semantic[i]});
    if (options.lexical) out.push_back({model, dp, condition, prompt_type, ScoreKind::Lexical, lexical[i]});
  }
  return out;
}

std::string scores_to_csv(std::span<const AlignmentScore> scores) {
  std::string out = "model,dim,pole,condition,prompt_type,kind,value\n";
  for (const auto& s : scores) {
    if (s.model.find_first_of(",\"\n") != std::string::npos) {
      throw Error("model name '" + s.model + "' cannot be written to CSV");
    }
    out += s.model + "," + std::to_string(s.dp.dim) + "," + std::string(to_string(s.dp.pole)) + "," +
           std::string(to_string(s.condition)) + "," + std::string(to_string(s.prompt_type)) + "," +
           std::string(to_string(s.kind)) + ",";
    if (s.value) {
      char buf[64];
      const auto res = std::to_chars(buf, buf + sizeof buf, *s.value);
      out.append(buf, res.ptr);
    }
    out.push_back('\n');
  }
  return out;
}

std::vector<AlignmentScore> scores_from_csv(std::string_view csv) {
  std::vector<AlignmentScore> out;
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line != "model,dim,pole,condition,prompt_type,kind,value") {
    throw Error("scores CSV has an unexpected header");
  }
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      f.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 7) throw Error("scores CSV line " + std::to_string(number) + " has wrong field count");
    AlignmentScore s;
    s.model = f[0];
    s.dp = {std::stoi(f[1]), parse_pole(f[2])};
    s.condition = parse_condition(f[3]);
    s.prompt_type = parse_prompt_type(f[4]);
    s.kind = parse_score_kind(f[5]);
    if (!f[6].empty()) {
      double v = 0.0;
      const auto res = std::from_chars(f[6].data(), f[6].data() + f[6].size(), v);
      if (res.ec != std::errc{}) throw Error("scores CSV line " + std::to_string(number) + ": bad value");
      s.value = v;
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace lmda
