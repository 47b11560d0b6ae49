#include "lmda/lexstats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace lmda {

namespace {

double ll_term(double observed, double expected) {
  return observed > 0.0 ? observed * std::log(observed / expected) : 0.0;
}

std::map<std::string, Count> lemma_counts(std::span<const ContentStream> streams, Count& total) {
  std::map<std::string, Count> counts;
  total = 0;
  for (const auto& s : streams) {
    for (const auto& t : s.tokens) ++counts[t.lemma];
    total += s.tokens.size();
  }
  return counts;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

double log_likelihood(Count a, Count b, Count c, Count d) {
  if (c + d == 0 || a + b == 0) return 0.0;
  const double n = static_cast<double>(c) + static_cast<double>(d);
  const double k = static_cast<double>(a) + static_cast<double>(b);
  const double e1 = static_cast<double>(c) * k / n;
  const double e2 = static_cast<double>(d) * k / n;
  const double ll = 2.0 * (ll_term(static_cast<double>(a), e1) + ll_term(static_cast<double>(b), e2));
  // Proportional counts give exactly zero; clamp rounding residue.
  if (static_cast<unsigned __int128>(a) * d == static_cast<unsigned __int128>(b) * c) return 0.0;
  return std::max(ll, 0.0);
}

std::vector<KeywordEntry> keyness(std::span<const ContentStream> target,
                                  std::span<const ContentStream> reference,
                                  const KeynessOptions& options) {
  if (target.empty() || reference.empty()) {
    throw Error("keyness: target and reference collections must be non-empty");
  }
  Count c = 0, d = 0;
  const auto target_counts = lemma_counts(target, c);
  const auto reference_counts = lemma_counts(reference, d);
  if (c == 0 || d == 0) throw Error("keyness: a collection has no content tokens");

  std::vector<KeywordEntry> out;
  for (const auto& [lemma, a] : target_counts) {
    const auto it = reference_counts.find(lemma);
    const Count b = it == reference_counts.end() ? 0 : it->second;
    // a/c > b/d, compared exactly
    if (static_cast<unsigned __int128>(a) * d <= static_cast<unsigned __int128>(b) * c) continue;
    const double ll = log_likelihood(a, b, c, d);
    if (ll < options.min_ll) continue;
    out.push_back({lemma, a, b, ll});
  }
  std::sort(out.begin(), out.end(), [](const KeywordEntry& x, const KeywordEntry& y) {
    if (x.ll_score != y.ll_score) return x.ll_score > y.ll_score;
    return x.lemma < y.lemma;
  });
  if (options.top_n && out.size() > *options.top_n) out.resize(*options.top_n);
  return out;
}

double log_dice(Count joint, Count node_freq, Count collocate_freq) {
  if (joint == 0) return -std::numeric_limits<double>::infinity();
  if (2 * joint == node_freq + collocate_freq) return 14.0;
  return 14.0 + std::log2(2.0 * static_cast<double>(joint) /
                          (static_cast<double>(node_freq) + static_cast<double>(collocate_freq)));
}

std::string_view to_string(SpanAxis axis) {
  return axis == SpanAxis::Content ? "content" : "surface";
}

SpanAxis parse_span_axis(std::string_view text) {
  if (text == "content") return SpanAxis::Content;
  if (text == "surface") return SpanAxis::Surface;
  throw Error("unknown span axis '" + std::string(text) + "' (expected content|surface)");
}

std::string CollocationPair::id() const {
  return std::string(subset == Subset::Endorsed ? "E" : "C") + ":" + node + "|" + collocate;
}

PairCounts count_window_pairs(const ContentStream& stream, const std::set<std::string>& nodes,
                              std::size_t span, SpanAxis axis) {
  PairCounts counts;
  const auto& toks = stream.tokens;
  const auto n = toks.size();
  auto coord = [&](std::size_t i) {
    return axis == SpanAxis::Content ? i : toks[i].position;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (!nodes.contains(toks[i].lemma)) continue;
    const auto here = coord(i);
    // coordinates are strictly increasing on both axes
    for (std::size_t j = i; j-- > 0;) {
      if (here - coord(j) > span) break;
      ++counts[{toks[i].lemma, toks[j].lemma}];
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (coord(j) - here > span) break;
      ++counts[{toks[i].lemma, toks[j].lemma}];
    }
  }
  return counts;
}

CollocationResult collocations(std::span<const ContentStream> streams,
                               const std::set<std::string>& nodes, Subset subset_tag,
                               const CollocationOptions& options) {
  if (options.span < 1) throw Error("collocations: span must be >= 1");
  if (nodes.empty()) throw Error("collocations: node set is empty");
  PairCounts joint;
  std::unordered_map<std::string, Count> freq;
  for (const auto& s : streams) {
    for (const auto& t : s.tokens) ++freq[t.lemma];
    for (const auto& [key, count] : count_window_pairs(s, nodes, options.span, options.axis)) {
      joint[key] += count;
    }
  }
  CollocationResult result;
  result.candidates = joint.size();
  for (const auto& [key, j] : joint) {
    CollocationPair p;
    p.node = key.first;
    p.collocate = key.second;
    p.joint_freq = j;
    p.node_freq = freq[key.first];
    p.collocate_freq = freq[key.second];
    p.log_dice = log_dice(j, p.node_freq, p.collocate_freq);
    p.subset = subset_tag;
    if (p.log_dice >= options.min_d) result.pairs.push_back(std::move(p));
  }
  result.eligible = result.pairs.size();
  std::sort(result.pairs.begin(), result.pairs.end(),
            [](const CollocationPair& a, const CollocationPair& b) {
              if (a.log_dice != b.log_dice) return a.log_dice > b.log_dice;
              if (a.node != b.node) return a.node < b.node;
              return a.collocate < b.collocate;
            });
  if (result.pairs.size() > options.top_n) result.pairs.resize(options.top_n);
  return result;
}

std::vector<std::size_t> FeatureMatrix::active_columns() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < active.size(); ++j) {
    if (active[j]) out.push_back(j);
  }
  return out;
}

FeatureMatrix standardize(std::vector<std::string> doc_ids,
                          std::vector<std::size_t> content_words,
                          std::vector<std::string> feature_ids, Eigen::MatrixXd raw) {
  const auto n = static_cast<Eigen::Index>(doc_ids.size());
  const auto p = static_cast<Eigen::Index>(feature_ids.size());
  if (raw.rows() != n || raw.cols() != p || content_words.size() != doc_ids.size()) {
    throw Error("feature matrix: shape mismatch");
  }
  FeatureMatrix m;
  m.doc_ids = std::move(doc_ids);
  m.content_words = std::move(content_words);
  m.feature_ids = std::move(feature_ids);
  m.raw = std::move(raw);
  m.normalized.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double scale = 1000.0 / static_cast<double>(m.content_words[i]);
    m.normalized.row(i) = m.raw.row(i) * scale;
  }
  m.z = Eigen::MatrixXd::Zero(n, p);
  m.active.assign(p, false);
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto col = m.normalized.col(j);
    const double mean = col.mean();
    const double ss = n > 1 ? (col.array() - mean).square().sum() : 0.0;
    const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    // relative guard so that columns constant up to rounding count as constant
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      m.audit.push_back("feature '" + m.feature_ids[j] + "' has zero variance; excluded from z");
      continue;
    }
    m.z.col(j) = (col.array() - mean) / sd;
    m.active[j] = true;
  }
  return m;
}

FeatureMatrix build_matrix(std::span<const ContentStream> streams,
                           std::span<const CollocationPair> features, std::size_t span,
                           SpanAxis axis) {
  if (features.empty()) throw Error("build_matrix: feature list is empty");
  std::set<std::string> nodes;
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> columns;
  std::vector<std::string> ids;
  for (std::size_t j = 0; j < features.size(); ++j) {
    nodes.insert(features[j].node);
    columns[{features[j].node, features[j].collocate}].push_back(j);
    ids.push_back(features[j].id());
  }
  std::vector<std::string> doc_ids;
  std::vector<std::size_t> words;
  std::vector<std::string> audit;
  std::vector<PairCounts> per_doc;
  for (const auto& s : streams) {
    if (s.tokens.empty()) {
      audit.push_back("document '" + s.doc_id + "' has no content words; excluded");
      log_warning(audit.back());
      continue;
    }
    doc_ids.push_back(s.doc_id);
    words.push_back(s.tokens.size());
    per_doc.push_back(count_window_pairs(s, nodes, span, axis));
  }
  Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(doc_ids.size()),
                                               static_cast<Eigen::Index>(features.size()));
  for (std::size_t i = 0; i < per_doc.size(); ++i) {
    for (const auto& [key, count] : per_doc[i]) {
      const auto it = columns.find(key);
      if (it == columns.end()) continue;
      for (auto j : it->second) {
        raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<double>(count);
      }
    }
  }
  auto m = standardize(std::move(doc_ids), std::move(words), std::move(ids), std::move(raw));
  m.audit.insert(m.audit.begin(), audit.begin(), audit.end());
  return m;
}

std::string matrix_values_csv(const FeatureMatrix& m, const Eigen::MatrixXd& values) {
  std::ostringstream out;
  out << "doc_id,content_words";
  for (const auto& f : m.feature_ids) out << ',' << csv_field(f);
  out << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    out << csv_field(m.doc_ids[i]) << ',' << m.content_words[i];
    for (Eigen::Index j = 0; j < values.cols(); ++j) out << ',' << format_double(values(i, j));
    out << '\n';
  }
  return out.str();
}

std::string matrix_to_csv(const FeatureMatrix& m) { return matrix_values_csv(m, m.raw); }

FeatureMatrix matrix_from_csv(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line)) throw Error("matrix csv: empty input");
  auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "doc_id" || header[1] != "content_words") {
    throw Error("matrix csv: header must start with doc_id,content_words");
  }
  std::vector<std::string> features(header.begin() + 2, header.end());
  std::vector<std::string> docs;
  std::vector<std::size_t> words;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw Error("matrix csv: line " + std::to_string(line_no) + " has wrong field count");
    }
    docs.push_back(fields[0]);
    words.push_back(std::stoull(fields[1]));
    if (words.back() == 0) throw Error("matrix csv: document '" + fields[0] + "' has zero content words");
    std::vector<double> row;
    for (std::size_t k = 2; k < fields.size(); ++k) row.push_back(std::stod(fields[k]));
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd raw(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(features.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < features.size(); ++j) {
      raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return standardize(std::move(docs), std::move(words), std::move(features), std::move(raw));
}

}  // namespace lmda
