#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lmda/common.hpp"
#include "lmda/lexstats.hpp"

namespace lmda {

struct Extraction {
  Eigen::MatrixXd loadings;                // features x n, unrotated
  std::vector<double> explained_variance;  // eigenvalues of the kept factors
  std::vector<double> eigenvalues;         // full scree series, descending
  std::size_t n_factors = 0;
};

// Principal-component extraction on the correlation matrix of the
// standardized columns of `z` (docs x features). With `n` unset the count is
// the number of eigenvalues above the mean of the non-zero eigenvalues.
Extraction extract_factors(const Eigen::MatrixXd& z, std::optional<std::size_t> n);

// Raw varimax criterion: sum over factors of the variance of squared loadings.
double varimax_criterion(const Eigen::MatrixXd& loadings);

struct VarimaxOptions {
  double tolerance = 1e-10;
  int max_sweeps = 200;
};

struct Rotation {
  Eigen::MatrixXd loadings;  // input * rotation
  Eigen::MatrixXd rotation;  // orthogonal, includes sign flips and reordering
  std::vector<double> criterion_trace;  // value before the first sweep, then after each
  int sweeps = 0;
};

// Pairwise Jacobi (Kaiser) varimax. Afterwards each column's largest-|.|
// entry is positive and columns are ordered by sum of squared loadings.
Rotation rotate_varimax(const Eigen::MatrixXd& loadings, const VarimaxOptions& options = {});

struct FeatureAssignment {
  std::size_t factor = 1;  // 1-based
  Pole sign = Pole::Positive;
  double loading = 0.0;
};

// Each feature goes to its max-|loading| factor when |loading| >= cutoff.
std::vector<std::optional<FeatureAssignment>> assign_features(const Eigen::MatrixXd& loadings,
                                                              double cutoff);

struct FactorModel {
  std::size_t n_factors = 0;
  double cutoff = 0.30;
  std::vector<std::string> feature_ids;  // rows of `loadings`
  Eigen::MatrixXd loadings;              // rotated
  Eigen::MatrixXd rotation;
  std::vector<double> explained_variance;  // at extraction
  std::vector<double> rotated_variance;    // column sums of squares after rotation
  std::vector<double> eigenvalues;
  std::vector<std::optional<FeatureAssignment>> assignment;
  std::vector<std::string> audit;
};

struct FactorOptions {
  std::optional<std::size_t> n_factors;  // unset = auto
  double cutoff = 0.30;
  VarimaxOptions varimax;
};

FactorModel fit_factor_model(const FeatureMatrix& matrix, const FactorOptions& options = {});

struct DimensionScore {
  std::string doc_id;
  std::size_t factor = 1;  // 1-based
  double score = 0.0;
  Pole pole = Pole::Positive;  // zero scores count as Positive
};

struct ScoringResult {
  std::vector<DimensionScore> scores;  // factor-major, matrix row order
  std::vector<std::size_t> excluded_factors;
  std::vector<std::string> warnings;
};

ScoringResult score_documents(const FeatureMatrix& matrix, const FactorModel& model);

struct ExemplarSelection {
  std::map<DimPole, std::vector<DimensionScore>> exemplars;  // keyed by factor index
  std::vector<std::string> warnings;
};

// Per (factor, pole): documents on that pole by |score| descending, ties by
// doc id; at most k each.
ExemplarSelection select_exemplars(const std::vector<DimensionScore>& scores, std::size_t k);

std::string model_to_json(const FactorModel& model);
FactorModel model_from_json(std::string_view text);
std::string scree_csv(const FactorModel& model);

}  // namespace lmda
