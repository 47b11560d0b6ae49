#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <regex>
#include <stdexcept>

namespace oracle {

std::size_t regex_token_count(const std::string& text) {
  static const std::regex word("[A-Za-z0-9]+(?:[-'][A-Za-z0-9]+)*");
  return static_cast<std::size_t>(
      std::distance(std::sregex_iterator(text.begin(), text.end(), word), std::sregex_iterator()));
}

double contingency_ll(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  // Rows: word, other words. Columns: target, reference.
  const double table[2][2] = {{double(a), double(b)}, {double(c - a), double(d - b)}};
  const double col[2] = {double(c), double(d)};
  const double row_word = table[0][0] + table[0][1];
  const double total = col[0] + col[1];
  double sum = 0.0;
  for (int j = 0; j < 2; ++j) {
    const double observed = table[0][j];
    const double expected = row_word * col[j] / total;
    if (observed > 0.0) sum += observed * std::log(observed / expected);
  }
  return 2.0 * sum;
}

lmda::PairCounts window_scan(const lmda::ContentStream& stream, const std::set<std::string>& nodes,
                             std::size_t span, lmda::SpanAxis axis) {
  lmda::PairCounts out;
  const auto& t = stream.tokens;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!nodes.count(t[i].lemma)) continue;
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (i == j) continue;
      const std::size_t dist = axis == lmda::SpanAxis::Content
                                   ? (i > j ? i - j : j - i)
                                   : (t[i].position > t[j].position ? t[i].position - t[j].position
                                                                    : t[j].position - t[i].position);
      if (dist >= 1 && dist <= span) ++out[{t[i].lemma, t[j].lemma}];
    }
  }
  return out;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> jacobi_eigen(Eigen::MatrixXd a) {
  const auto n = a.rows();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-24) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a(x, x) > a(y, y); });
  Eigen::VectorXd values(n);
  Eigen::MatrixXd vectors(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return {values, vectors};
}

double varimax_value(const Eigen::MatrixXd& l) {
  const double p = static_cast<double>(l.rows());
  double total = 0.0;
  for (Eigen::Index j = 0; j < l.cols(); ++j) {
    double s2 = 0.0, s4 = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
      const double sq = l(i, j) * l(i, j);
      s2 += sq;
      s4 += sq * sq;
    }
    total += s4 / p - (s2 / p) * (s2 / p);
  }
  return total;
}

namespace {

Eigen::MatrixXd rotate_pair(const Eigen::MatrixXd& l, Eigen::Index a, Eigen::Index b, double angle) {
  Eigen::MatrixXd out = l;
  const double c = std::cos(angle), s = std::sin(angle);
  out.col(a) = c * l.col(a) + s * l.col(b);
  out.col(b) = -s * l.col(a) + c * l.col(b);
  return out;
}

}  // namespace

Eigen::MatrixXd grid_varimax(Eigen::MatrixXd l, double step, double tol) {
  const double quarter = std::numbers::pi / 4.0;
  const int steps = static_cast<int>(std::round(quarter / step));
  double current = varimax_value(l);
  for (int sweep = 0; sweep < 500; ++sweep) {
    const double before = current;
    for (Eigen::Index a = 0; a < l.cols(); ++a) {
      for (Eigen::Index b = a + 1; b < l.cols(); ++b) {
        double best_angle = 0.0, best = current;
        for (int k = -steps; k <= steps; ++k) {
          const double angle = k * step;
          const double value = varimax_value(rotate_pair(l, a, b, angle));
          if (value > best) {
            best = value;
            best_angle = angle;
          }
        }
        if (best_angle != 0.0) {
          l = rotate_pair(l, a, b, best_angle);
          current = best;
        }
      }
    }
    if (current - before < tol) break;
  }
  return l;
}

std::vector<std::string> linear_top_k(const std::vector<lmda::Chunk>& chunks, const lmda::Query& q,
                                      std::size_t k) {
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& c : chunks) {
    if (c.dp != q.dp) continue;
    const double cos = c.embedding.dot(q.embedding) / (c.embedding.norm() * q.embedding.norm());
    scored.emplace_back(cos, c.chunk_id);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) out.push_back(scored[i].second);
  return out;
}

double f_tail_simpson(double f, double d1, double d2, int intervals) {
  const double log_norm = std::lgamma((d1 + d2) / 2) - std::lgamma(d1 / 2) - std::lgamma(d2 / 2) +
                          (d1 / 2) * std::log(d1 / d2);
  auto density = [&](double x) {
    return std::exp(log_norm + (d1 / 2 - 1) * std::log(x) - ((d1 + d2) / 2) * std::log1p(d1 * x / d2));
  };
  // x = f / u maps (f, inf) onto (0, 1); the integrand vanishes at u = 0 for d2 > 2.
  auto g = [&](double u) { return u <= 0.0 ? 0.0 : density(f / u) * f / (u * u); };
  if (intervals % 2) ++intervals;
  const double h = 1.0 / intervals;
  double sum = g(0.0) + g(1.0);
  for (int i = 1; i < intervals; ++i) sum += (i % 2 ? 4.0 : 2.0) * g(i * h);
  return sum * h / 3.0;
}

StubProvider::StubProvider(std::map<std::string, Eigen::VectorXd> table, std::size_t max_tokens)
    : table_(std::move(table)), max_tokens_(max_tokens) {}

std::size_t StubProvider::dimension() const {
  return table_.empty() ? 0 : static_cast<std::size_t>(table_.begin()->second.size());
}

std::vector<Eigen::VectorXd> StubProvider::embed(std::span<const std::string> texts) const {
  std::vector<Eigen::VectorXd> out;
  for (const auto& t : texts) {
    const auto it = table_.find(t);
    if (it == table_.end()) throw std::runtime_error("stub provider has no vector for '" + t + "'");
    out.push_back(it->second.normalized());
  }
  return out;
}

lmda::ContentStream make_stream(const std::string& id, lmda::Subset subset,
                                const std::vector<std::string>& lemmas) {
  lmda::ContentStream s;
  s.doc_id = id;
  s.subset = subset;
  for (std::size_t i = 0; i < lemmas.size(); ++i) {
    s.tokens.push_back({lemmas[i], lemmas[i], lmda::PartOfSpeech::Noun, i});
  }
  s.total_tokens = lemmas.size();
  return s;
}

PlantedCorpus planted_corpus(std::size_t docs, std::uint32_t seed) {
  std::mt19937 rng(seed);
  PlantedCorpus out;
  std::vector<std::string> filler;
  for (int i = 0; i < 5; ++i) filler.push_back("filler" + std::to_string(i));
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < 9; ++i) out.cluster_words[c].push_back("c" + std::to_string(c + 1) + "w" + std::to_string(i));
  }
  for (const auto& w : out.cluster_words[0]) out.nodes.insert(w);
  for (const auto& w : out.cluster_words[1]) out.nodes.insert(w);
  std::uniform_int_distribution<std::size_t> pick_filler(0, filler.size() - 1);
  std::uniform_int_distribution<int> reps(2, 4);
  auto filler_sentence = [&](std::vector<std::string>& lemmas) {
    for (int w = 0; w < 5; ++w) lemmas.push_back(filler[pick_filler(rng)]);
  };
  for (std::size_t d = 0; d < docs; ++d) {
    const std::array<bool, 2> member{d < docs / 2, d % 2 == 0};
    // One repeat count per cluster keeps its phrases in step.
    std::vector<std::vector<std::string>> phrases;
    for (int c = 0; c < 2; ++c) {
      if (!member[static_cast<std::size_t>(c)]) continue;
      const auto& words = out.cluster_words[c];
      const int n = reps(rng);
      for (std::size_t p = 0; p < words.size(); p += 3) {
        for (int r = 0; r < n; ++r) phrases.push_back({words[p], words[p + 1], words[p + 2]});
      }
    }
    std::shuffle(phrases.begin(), phrases.end(), rng);
    // A five-word filler sentence between phrases puts them beyond the span.
    std::vector<std::string> lemmas;
    filler_sentence(lemmas);
    for (const auto& phrase : phrases) {
      lemmas.insert(lemmas.end(), phrase.begin(), phrase.end());
      filler_sentence(lemmas);
    }
    while (lemmas.size() < 200) filler_sentence(lemmas);
    out.streams.push_back(make_stream("D" + std::to_string(d), lmda::Subset::Endorsed, lemmas));
    out.membership.push_back(member);
  }
  return out;
}

}  // namespace oracle
