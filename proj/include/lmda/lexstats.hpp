#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lmda/common.hpp"
#include "lmda/textprep.hpp"

namespace lmda {

using Count = std::uint64_t;

struct KeywordEntry {
  std::string lemma;
  Count freq_target = 0;
  Count freq_reference = 0;
  double ll_score = 0.0;
};

// Two-cell log-likelihood for a lemma seen `a` times in a target of `c`
// tokens and `b` times in a reference of `d` tokens.
double log_likelihood(Count a, Count b, Count c, Count d);

struct KeynessOptions {
  double min_ll = 3.84;  // chi-square(1) critical value at p = 0.05
  std::optional<std::size_t> top_n;
};

// Lemmas overused in `target`, sorted by LL descending then lemma.
std::vector<KeywordEntry> keyness(std::span<const ContentStream> target,
                                  std::span<const ContentStream> reference,
                                  const KeynessOptions& options = {});

// 14 + log2(2 f_xy / (f_x + f_y)).
double log_dice(Count joint, Count node_freq, Count collocate_freq);

enum class SpanAxis { Content, Surface };

std::string_view to_string(SpanAxis axis);
SpanAxis parse_span_axis(std::string_view text);

struct CollocationPair {
  std::string node;
  std::string collocate;
  Count joint_freq = 0;
  Count node_freq = 0;
  Count collocate_freq = 0;
  double log_dice = 0.0;
  Subset subset = Subset::Endorsed;

  // "<subset initial>:<node>|<collocate>", e.g. "E:trial|mortality".
  std::string id() const;
};

using PairCounts = std::map<std::pair<std::string, std::string>, Count>;

// Ordered (node occurrence, collocate occurrence) pairs at distance
// 1..span on the chosen axis. Every content lemma may be a collocate.
PairCounts count_window_pairs(const ContentStream& stream, const std::set<std::string>& nodes,
                              std::size_t span, SpanAxis axis);

struct CollocationOptions {
  std::size_t span = 4;
  double min_d = 7.0;
  std::size_t top_n = 500;
  SpanAxis axis = SpanAxis::Content;
};

struct CollocationResult {
  std::vector<CollocationPair> pairs;  // D descending, then (node, collocate)
  std::size_t candidates = 0;          // distinct co-occurring pairs
  std::size_t eligible = 0;            // pairs with D >= min_d
};

CollocationResult collocations(std::span<const ContentStream> streams,
                               const std::set<std::string>& nodes, Subset subset_tag,
                               const CollocationOptions& options = {});

struct FeatureMatrix {
  std::vector<std::string> doc_ids;
  std::vector<std::size_t> content_words;
  std::vector<std::string> feature_ids;
  Eigen::MatrixXd raw;         // docs x features
  Eigen::MatrixXd normalized;  // per 1,000 content words
  Eigen::MatrixXd z;           // column-standardized; zero for inactive columns
  std::vector<bool> active;    // false for zero-variance features
  std::vector<std::string> audit;

  std::vector<std::size_t> active_columns() const;
};

// Rebuilds normalized and z from raw counts. Standardization uses the
// sample standard deviation (n - 1).
FeatureMatrix standardize(std::vector<std::string> doc_ids,
                          std::vector<std::size_t> content_words,
                          std::vector<std::string> feature_ids, Eigen::MatrixXd raw);

// Documents with no content words are excluded with an audit entry.
FeatureMatrix build_matrix(std::span<const ContentStream> streams,
                           std::span<const CollocationPair> features, std::size_t span = 4,
                           SpanAxis axis = SpanAxis::Content);

// CSV of raw counts: header `doc_id,content_words,<feature ids>`.
std::string matrix_to_csv(const FeatureMatrix& m);
std::string matrix_values_csv(const FeatureMatrix& m, const Eigen::MatrixXd& values);
FeatureMatrix matrix_from_csv(std::string_view csv);

}  // namespace lmda
