#include "lmda/factors.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <nlohmann/json.hpp>
#include <sstream>

namespace lmda {

namespace {

// Flip so the largest-|.| entry of each column is positive.
void fix_column_signs(Eigen::MatrixXd& m, Eigen::MatrixXd* companion = nullptr) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Eigen::Index arg = 0;
    m.col(j).cwiseAbs().maxCoeff(&arg);
    if (m(arg, j) < 0) {
      m.col(j) *= -1.0;
      if (companion) companion->col(j) *= -1.0;
    }
  }
}

std::string condition_report(const Eigen::VectorXd& singular_values) {
  std::ostringstream ss;
  const double smax = singular_values.size() ? singular_values.maxCoeff() : 0.0;
  const double smin = singular_values.size() ? singular_values.minCoeff() : 0.0;
  ss << "largest singular value " << smax << ", smallest " << smin << ", condition "
     << (smin > 0 ? smax / smin : std::numeric_limits<double>::infinity());
  return ss.str();
}

}  // namespace

Extraction extract_factors(const Eigen::MatrixXd& z, std::optional<std::size_t> n) {
  const auto docs = z.rows();
  const auto p = z.cols();
  if (p == 0) throw Error("extract_factors: no features");
  if (docs < 2) throw Error("extract_factors: need at least 2 documents");
  for (Eigen::Index j = 0; j < p; ++j) {
    if (z.col(j).squaredNorm() == 0.0) {
      throw Error("extract_factors: feature column " + std::to_string(j) + " has zero variance");
    }
  }

  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd vectors;
  if (p <= docs) {
    const Eigen::MatrixXd corr = z.transpose() * z / static_cast<double>(docs - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(corr);
    if (solver.info() != Eigen::Success) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(corr);
      throw Error("extract_factors: eigensolver did not converge (" +
                  condition_report(svd.singularValues()) + ")");
    }
    eigenvalues = solver.eigenvalues().reverse();
    vectors = solver.eigenvectors().rowwise().reverse();
  } else {
    // More features than documents: the nonzero spectrum of the correlation
    // matrix comes from the thin SVD of z / sqrt(docs - 1).
    const Eigen::MatrixXd scaled = z / std::sqrt(static_cast<double>(docs - 1));
    Eigen::BDCSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
      throw Error("extract_factors: SVD did not converge (" +
                  condition_report(svd.singularValues()) + ")");
    }
    eigenvalues = Eigen::VectorXd::Zero(p);
    eigenvalues.head(svd.singularValues().size()) = svd.singularValues().array().square().matrix();
    vectors = svd.matrixV();
  }

  Extraction out;
  out.eigenvalues.assign(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
  for (auto& v : out.eigenvalues) v = std::max(v, 0.0);
  while (out.eigenvalues.size() < static_cast<std::size_t>(p)) out.eigenvalues.push_back(0.0);

  std::size_t count = 0;
  if (n) {
    count = *n;
  } else {
    // Mean over the non-zero spectrum; equals 1 for a full-rank correlation matrix.
    const double top = out.eigenvalues.empty() ? 0.0 : out.eigenvalues.front();
    double sum = 0.0;
    std::size_t rank = 0;
    for (double v : out.eigenvalues) {
      if (v > top * 1e-10) {
        sum += v;
        ++rank;
      }
    }
    const double mean = rank ? sum / static_cast<double>(rank) : 0.0;
    for (double v : out.eigenvalues) count += v > mean ? 1 : 0;
    count = std::max<std::size_t>(count, 1);
  }
  if (count == 0) throw Error("extract_factors: number of factors must be >= 1");
  if (static_cast<Eigen::Index>(count) + 1 > docs) {
    throw Error("extract_factors: " + std::to_string(count) + " factors need at least " +
                std::to_string(count + 1) + " documents, have " + std::to_string(docs));
  }
  if (static_cast<Eigen::Index>(count) > std::min<Eigen::Index>(p, vectors.cols())) {
    throw Error("extract_factors: more factors requested than available components");
  }

  out.n_factors = count;
  out.loadings.resize(p, static_cast<Eigen::Index>(count));
  for (std::size_t f = 0; f < count; ++f) {
    const auto fi = static_cast<Eigen::Index>(f);
    out.loadings.col(fi) = vectors.col(fi) * std::sqrt(out.eigenvalues[f]);
    out.explained_variance.push_back(out.eigenvalues[f]);
  }
  fix_column_signs(out.loadings);
  return out;
}

double varimax_criterion(const Eigen::MatrixXd& loadings) {
  const double p = static_cast<double>(loadings.rows());
  const Eigen::ArrayXXd sq = loadings.array().square();
  double v = 0.0;
  for (Eigen::Index j = 0; j < sq.cols(); ++j) {
    const double s2 = sq.col(j).sum();
    v += sq.col(j).square().sum() / p - (s2 / p) * (s2 / p);
  }
  return v;
}

Rotation rotate_varimax(const Eigen::MatrixXd& loadings, const VarimaxOptions& options) {
  const auto p = loadings.rows();
  const auto k = loadings.cols();
  Rotation out;
  out.loadings = loadings;
  out.rotation = Eigen::MatrixXd::Identity(k, k);
  double crit = varimax_criterion(out.loadings);
  out.criterion_trace.push_back(crit);
  const double dp = static_cast<double>(p);

  if (k >= 2) {
    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
      for (Eigen::Index a = 0; a < k - 1; ++a) {
        for (Eigen::Index b = a + 1; b < k; ++b) {
          const Eigen::ArrayXd x = out.loadings.col(a).array();
          const Eigen::ArrayXd y = out.loadings.col(b).array();
          const Eigen::ArrayXd u = x.square() - y.square();
          const Eigen::ArrayXd v = 2.0 * x * y;
          const double A = u.sum();
          const double B = v.sum();
          const double C = (u.square() - v.square()).sum();
          const double D = 2.0 * (u * v).sum();
          const double num = D - 2.0 * A * B / dp;
          const double den = C - (A * A - B * B) / dp;
          if (std::abs(num) < 1e-15 && den >= 0.0) continue;
          const double phi = std::atan2(num, den) / 4.0;
          const double c = std::cos(phi);
          const double s = std::sin(phi);
          for (Eigen::MatrixXd* m : {&out.loadings, &out.rotation}) {
            const Eigen::VectorXd ca = m->col(a);
            const Eigen::VectorXd cb = m->col(b);
            m->col(a) = c * ca + s * cb;
            m->col(b) = -s * ca + c * cb;
          }
        }
      }
      ++out.sweeps;
      const double next = varimax_criterion(out.loadings);
      out.criterion_trace.push_back(next);
      const double gain = next - crit;
      crit = next;
      if (gain < options.tolerance) break;
    }
  }

  fix_column_signs(out.loadings, &out.rotation);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  const Eigen::VectorXd ss = out.loadings.colwise().squaredNorm();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return ss(x) > ss(y); });
  Eigen::MatrixXd l(p, k), r(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    l.col(j) = out.loadings.col(order[static_cast<std::size_t>(j)]);
    r.col(j) = out.rotation.col(order[static_cast<std::size_t>(j)]);
  }
  out.loadings = std::move(l);
  out.rotation = std::move(r);
  return out;
}

std::vector<std::optional<FeatureAssignment>> assign_features(const Eigen::MatrixXd& loadings,
                                                              double cutoff) {
  std::vector<std::optional<FeatureAssignment>> out(static_cast<std::size_t>(loadings.rows()));
  for (Eigen::Index i = 0; i < loadings.rows(); ++i) {
    Eigen::Index best = 0;
    loadings.row(i).cwiseAbs().maxCoeff(&best);
    const double l = loadings(i, best);
    if (std::abs(l) >= cutoff) {
      out[static_cast<std::size_t>(i)] = FeatureAssignment{
          static_cast<std::size_t>(best) + 1, l >= 0 ? Pole::Positive : Pole::Negative, l};
    }
  }
  return out;
}

FactorModel fit_factor_model(const FeatureMatrix& matrix, const FactorOptions& options) {
  const auto cols = matrix.active_columns();
  if (cols.empty()) throw Error("factor model: matrix has no non-constant features");
  Eigen::MatrixXd z(matrix.z.rows(), static_cast<Eigen::Index>(cols.size()));
  FactorModel model;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    z.col(static_cast<Eigen::Index>(j)) = matrix.z.col(static_cast<Eigen::Index>(cols[j]));
    model.feature_ids.push_back(matrix.feature_ids[cols[j]]);
  }
  const auto extraction = extract_factors(z, options.n_factors);
  const auto rotated = rotate_varimax(extraction.loadings, options.varimax);
  model.n_factors = extraction.n_factors;
  model.cutoff = options.cutoff;
  model.loadings = rotated.loadings;
  model.rotation = rotated.rotation;
  model.explained_variance = extraction.explained_variance;
  model.eigenvalues = extraction.eigenvalues;
  for (Eigen::Index j = 0; j < model.loadings.cols(); ++j) {
    model.rotated_variance.push_back(model.loadings.col(j).squaredNorm());
  }
  model.assignment = assign_features(model.loadings, options.cutoff);
  model.audit = matrix.audit;
  model.audit.push_back("varimax converged after " + std::to_string(rotated.sweeps) + " sweeps");
  return model;
}

ScoringResult score_documents(const FeatureMatrix& matrix, const FactorModel& model) {
  std::map<std::string, Eigen::Index> column_of;
  for (std::size_t j = 0; j < matrix.feature_ids.size(); ++j) {
    column_of[matrix.feature_ids[j]] = static_cast<Eigen::Index>(j);
  }
  ScoringResult result;
  for (std::size_t f = 1; f <= model.n_factors; ++f) {
    Eigen::VectorXd weights = Eigen::VectorXd::Zero(matrix.z.cols());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < model.assignment.size(); ++i) {
      const auto& a = model.assignment[i];
      if (!a || a->factor != f) continue;
      const auto it = column_of.find(model.feature_ids[i]);
      if (it == column_of.end()) {
        throw Error("score_documents: feature '" + model.feature_ids[i] + "' missing from matrix");
      }
      weights(it->second) = a->sign == Pole::Positive ? 1.0 : -1.0;
      ++assigned;
    }
    if (assigned == 0) {
      result.excluded_factors.push_back(f);
      result.warnings.push_back("factor " + std::to_string(f) + " has no assigned features; excluded");
      log_warning(result.warnings.back());
      continue;
    }
    const Eigen::VectorXd s = matrix.z * weights;
    for (Eigen::Index d = 0; d < s.size(); ++d) {
      result.scores.push_back({matrix.doc_ids[static_cast<std::size_t>(d)], f, s(d),
                               s(d) >= 0.0 ? Pole::Positive : Pole::Negative});
    }
  }
  return result;
}

ExemplarSelection select_exemplars(const std::vector<DimensionScore>& scores, std::size_t k) {
  if (k < 1) throw Error("select_exemplars: k must be >= 1");
  ExemplarSelection out;
  std::map<DimPole, std::vector<DimensionScore>> buckets;
  for (const auto& s : scores) {
    buckets[{static_cast<int>(s.factor), s.pole}].push_back(s);
  }
  std::set<int> factors;
  for (const auto& s : scores) factors.insert(static_cast<int>(s.factor));
  for (int f : factors) {
    for (Pole pole : {Pole::Positive, Pole::Negative}) {
      auto& bucket = buckets[{f, pole}];
      std::sort(bucket.begin(), bucket.end(), [](const DimensionScore& a, const DimensionScore& b) {
        const double x = std::abs(a.score), y = std::abs(b.score);
        if (x != y) return x > y;
        return a.doc_id < b.doc_id;
      });
      if (bucket.size() < k) {
        out.warnings.push_back("factor " + std::to_string(f) + std::string(pole_sign(pole)) +
                               " has only " + std::to_string(bucket.size()) + " documents (k=" +
                               std::to_string(k) + ")");
        log_warning(out.warnings.back());
      } else {
        bucket.resize(k);
      }
      out.exemplars[{f, pole}] = bucket;
    }
  }
  return out;
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd json_matrix(const nlohmann::json& rows, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != static_cast<std::size_t>(cols)) throw Error("model json: ragged matrix");
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)].get<double>();
    }
  }
  return m;
}

}  // namespace

std::string model_to_json(const FactorModel& model) {
  nlohmann::json j;
  j["format"] = "lmda-factor-model";
  j["version"] = 1;
  j["n_factors"] = model.n_factors;
  j["cutoff"] = model.cutoff;
  j["feature_ids"] = model.feature_ids;
  j["loadings"] = matrix_json(model.loadings);
  j["rotation"] = matrix_json(model.rotation);
  j["explained_variance"] = model.explained_variance;
  j["rotated_variance"] = model.rotated_variance;
  j["eigenvalues"] = model.eigenvalues;
  auto& assignment = j["assignment"] = nlohmann::json::array();
  for (std::size_t i = 0; i < model.assignment.size(); ++i) {
    const auto& a = model.assignment[i];
    if (!a) continue;
    assignment.push_back({{"feature", model.feature_ids[i]},
                          {"factor", a->factor},
                          {"sign", std::string(pole_sign(a->sign))},
                          {"loading", a->loading}});
  }
  j["audit"] = model.audit;
  return j.dump(1) + "\n";
}

FactorModel model_from_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  if (j.value("format", "") != "lmda-factor-model" || j.value("version", 0) != 1) {
    throw Error("not an lmda factor model (version 1)");
  }
  FactorModel m;
  m.n_factors = j.at("n_factors").get<std::size_t>();
  m.cutoff = j.at("cutoff").get<double>();
  m.feature_ids = j.at("feature_ids").get<std::vector<std::string>>();
  const auto n = static_cast<Eigen::Index>(m.n_factors);
  m.loadings = json_matrix(j.at("loadings"), n);
  m.rotation = json_matrix(j.at("rotation"), n);
  m.explained_variance = j.at("explained_variance").get<std::vector<double>>();
  m.rotated_variance = j.at("rotated_variance").get<std::vector<double>>();
  m.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
  m.audit = j.value("audit", std::vector<std::string>{});
  m.assignment.assign(m.feature_ids.size(), std::nullopt);
  std::map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < m.feature_ids.size(); ++i) row_of[m.feature_ids[i]] = i;
  for (const auto& a : j.at("assignment")) {
    const auto it = row_of.find(a.at("feature").get<std::string>());
    if (it == row_of.end()) throw Error("model json: assignment for unknown feature");
    m.assignment[it->second] = FeatureAssignment{a.at("factor").get<std::size_t>(),
                                                 parse_pole(a.at("sign").get<std::string>()),
                                                 a.at("loading").get<double>()};
  }
  return m;
}

std::string scree_csv(const FactorModel& model) {
  std::ostringstream out;
  const double total = std::accumulate(model.eigenvalues.begin(), model.eigenvalues.end(), 0.0);
  out << "component,eigenvalue,proportion,cumulative\n";
  double cum = 0.0;
  for (std::size_t i = 0; i < model.eigenvalues.size(); ++i) {
    const double prop = total > 0 ? model.eigenvalues[i] / total : 0.0;
    cum += prop;
    out << i + 1 << ',' << model.eigenvalues[i] << ',' << prop << ',' << cum << '\n';
  }
  return out.str();
}

}  // namespace lmda
