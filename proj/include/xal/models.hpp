/*
 * Copyright 2026 The XAL Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Binary base learners with probability outputs, the certainty function used
// for uncertainty sampling, and the weighted ridge regressor that serves as
// the local surrogate of an explanation.

#pragma once

#include <Eigen/Dense>
#include <concepts>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "xal/common.hpp"
#include "xal/dataset.hpp"

namespace xal {

/// Anything that maps a feature row to Pr(class 1).
template <typename M>
concept ProbabilisticModel = requires(const M& m, std::span<const double> row) {
  { m.predict_proba(row) } -> std::convertible_to<double>;
};

/// c = max(p, 1 - p), in [0.5, 1].
inline double certainty(double p) { return std::max(p, 1.0 - p); }

template <ProbabilisticModel M>
double certainty(const M& model, std::span<const double> row) {
  return certainty(model.predict_proba(row));
}

// ---------------------------------------------------------------------------
// Feature encoding: continuous values pass through, categoricals expand one-hot.

class FeatureEncoder {
 public:
  FeatureEncoder() = default;
  explicit FeatureEncoder(const std::vector<FeatureSchema>& schema) {
    for (const auto& f : schema) {
      offsets_.push_back(names_.size());
      if (f.is_categorical()) {
        cardinality_.push_back(f.categories.size());
        for (const auto& c : f.categories) names_.push_back(f.name + "=" + c);
      } else {
        cardinality_.push_back(0);
        names_.push_back(f.name);
      }
    }
  }

  std::size_t input_dim() const { return offsets_.size(); }
  std::size_t dim() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  void encode(std::span<const double> row, double* out) const {
    std::fill(out, out + dim(), 0.0);
    for (std::size_t j = 0; j < offsets_.size(); ++j) {
      if (cardinality_[j] == 0) {
        out[offsets_[j]] = row[j];
      } else {
        const auto k = static_cast<std::size_t>(row[j]);
        if (k < cardinality_[j]) out[offsets_[j] + k] = 1.0;
      }
    }
  }

  Eigen::MatrixXd encode_rows(const TabularDataset& data, std::span<const std::size_t> rows) const {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> X(rows.size(), dim());
    for (std::size_t k = 0; k < rows.size(); ++k) encode(data.row(rows[k]), X.row(k).data());
    return X;
  }

  nlohmann::json to_json() const {
    return {{"offsets", offsets_}, {"cardinality", cardinality_}, {"names", names_}};
  }
  static FeatureEncoder from_json(const nlohmann::json& j) {
    FeatureEncoder e;
    e.offsets_ = j.at("offsets").get<std::vector<std::size_t>>();
    e.cardinality_ = j.at("cardinality").get<std::vector<std::size_t>>();
    e.names_ = j.at("names").get<std::vector<std::string>>();
    return e;
  }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> cardinality_;
  std::vector<std::string> names_;
};

// ---------------------------------------------------------------------------
// Logistic regression

enum class LogisticSolver { newton, gradient_descent };

struct LogisticConfig {
  double l2 = 1.0;  // penalty (l2/2)|w|^2 on a summed log-loss; bias unpenalized
  double tol = 1e-6;  // gradient 2-norm stopping tolerance
  std::size_t max_iterations = 10000;
  LogisticSolver solver = LogisticSolver::newton;
  double learning_rate = 1.0;  // gradient descent only; capped at 1/L
};

/// Penalized summed log-loss at (w, b).
inline double logistic_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& w, double b, double l2) {
  const Eigen::VectorXd z = (X * w).array() + b;
  double f = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    // log(1 + e^z) computed stably
    const double zi = z[i];
    f += (zi > 0 ? zi + std::log1p(std::exp(-zi)) : std::log1p(std::exp(zi))) - y[i] * zi;
  }
  return f + 0.5 * l2 * w.squaredNorm();
}

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Gradient of logistic_objective; last component is d/db.
inline Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                         const Eigen::VectorXd& w, double b, double l2) {
  const Eigen::VectorXd z = (X * w).array() + b;
  Eigen::VectorXd r(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) r[i] = sigmoid(z[i]) - y[i];
  Eigen::VectorXd g(w.size() + 1);
  g.head(w.size()) = X.transpose() * r + l2 * w;
  g[w.size()] = r.sum();
  return g;
}

struct LogisticModel {
  FeatureEncoder encoder;
  std::vector<double> weights;
  double bias = 0.0;

  double predict_proba(std::span<const double> row) const {
    thread_local std::vector<double> buf;
    buf.resize(encoder.dim());
    encoder.encode(row, buf.data());
    double z = bias;
    for (std::size_t k = 0; k < weights.size(); ++k) z += weights[k] * buf[k];
    return sigmoid(z);
  }
};

// ---------------------------------------------------------------------------
// AdaBoost over decision stumps

struct Stump {
  std::size_t dim = 0;       // encoded feature dimension
  double threshold = 0.0;    // x <= threshold goes left
  bool left_is_positive = false;  // discrete vote of the left leaf
  double left_fraction = 0.5;   // training class-1 fraction per leaf
  double right_fraction = 0.5;
  double alpha = 0.0;        // stage weight
  double weighted_error = 0.0;
};

struct StumpEnsemble {
  FeatureEncoder encoder;
  std::vector<Stump> stumps;

  /// Stage-weight-normalised average of the leaf class-1 fractions.
  double predict_proba(std::span<const double> row) const {
    thread_local std::vector<double> buf;
    buf.resize(encoder.dim());
    encoder.encode(row, buf.data());
    double num = 0.0, den = 0.0;
    for (const auto& s : stumps) {
      num += s.alpha * (buf[s.dim] <= s.threshold ? s.left_fraction : s.right_fraction);
      den += s.alpha;
    }
    return den > 0 ? num / den : 0.5;
  }
};

inline constexpr double kMaxStageWeight = 11.512925464970229;  // 0.5 ln((1-1e-10)/1e-10)

// ---------------------------------------------------------------------------
// Classifier facade

enum class ModelKind { logistic_regression, adaboost_stumps };

inline const char* to_string(ModelKind k) {
  return k == ModelKind::logistic_regression ? "logistic_regression" : "adaboost_stumps";
}

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "logistic_regression") return ModelKind::logistic_regression;
  if (s == "adaboost_stumps") return ModelKind::adaboost_stumps;
  throw Error("unknown model kind '" + std::string(s) + "'");
}

struct TrainingInfo {
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  bool degenerate = false;  // single-class training set, constant output
  std::vector<double> loss_history;
};

class Classifier {
 public:
  Classifier() : model_(LogisticModel{}), kind_(ModelKind::logistic_regression) {}
  Classifier(LogisticModel m, TrainingInfo info, std::string fingerprint = {})
      : model_(std::move(m)), kind_(ModelKind::logistic_regression), info_(std::move(info)),
        fingerprint_(std::move(fingerprint)) {}
  Classifier(StumpEnsemble m, TrainingInfo info, std::string fingerprint = {})
      : model_(std::move(m)), kind_(ModelKind::adaboost_stumps), info_(std::move(info)),
        fingerprint_(std::move(fingerprint)) {}

  /// Degenerate classifier that always answers `p`.
  static Classifier constant(ModelKind kind, double p, const FeatureEncoder& enc,
                             std::string fingerprint = {}) {
    Classifier c;
    c.kind_ = kind;
    c.constant_ = p;
    c.info_.degenerate = true;
    c.fingerprint_ = std::move(fingerprint);
    if (kind == ModelKind::logistic_regression) {
      c.model_ = LogisticModel{enc, std::vector<double>(enc.dim(), 0.0), 0.0};
    } else {
      c.model_ = StumpEnsemble{enc, {}};
    }
    return c;
  }

  double predict_proba(std::span<const double> row) const {
    if (constant_) return *constant_;
    return std::visit([&](const auto& m) { return m.predict_proba(row); }, model_);
  }

  ModelKind kind() const { return kind_; }
  bool degenerate() const { return info_.degenerate; }
  const TrainingInfo& info() const { return info_; }
  const LogisticModel* logistic() const { return std::get_if<LogisticModel>(&model_); }
  const StumpEnsemble* stumps() const { return std::get_if<StumpEnsemble>(&model_); }

  /// Versioned document: {format, version, kind, schema_fingerprint, ...}.
  nlohmann::json to_json() const {
    nlohmann::json j;
    j["format"] = "xal-model";
    j["version"] = 1;
    j["kind"] = to_string(kind_);
    j["schema_fingerprint"] = fingerprint_;
    j["training"] = {{"iterations", info_.iterations},
                     {"seed", info_.seed},
                     {"degenerate", info_.degenerate}};
    if (constant_) j["constant"] = *constant_;
    if (const auto* m = logistic()) {
      j["encoder"] = m->encoder.to_json();
      j["parameters"] = {{"weights", m->weights}, {"bias", m->bias}};
    } else if (const auto* s = stumps()) {
      j["encoder"] = s->encoder.to_json();
      auto arr = nlohmann::json::array();
      for (const auto& st : s->stumps) {
        arr.push_back({{"dim", st.dim},
                       {"threshold", st.threshold},
                       {"left_is_positive", st.left_is_positive},
                       {"left_fraction", st.left_fraction},
                       {"right_fraction", st.right_fraction},
                       {"alpha", st.alpha},
                       {"weighted_error", st.weighted_error}});
      }
      j["parameters"] = {{"stumps", arr}};
    }
    return j;
  }

  static Classifier from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "xal-model") throw Error("not an xal model document");
    if (j.value("version", 0) != 1) throw Error("unsupported model document version");
    const ModelKind kind = parse_model_kind(j.at("kind").get<std::string>());
    TrainingInfo info;
    info.iterations = j.at("training").at("iterations").get<std::size_t>();
    info.seed = j.at("training").at("seed").get<std::uint64_t>();
    info.degenerate = j.at("training").at("degenerate").get<bool>();
    const auto fp = j.value("schema_fingerprint", std::string{});
    const auto enc = FeatureEncoder::from_json(j.at("encoder"));
    Classifier c;
    if (kind == ModelKind::logistic_regression) {
      LogisticModel m{enc, j.at("parameters").at("weights").get<std::vector<double>>(),
                      j.at("parameters").at("bias").get<double>()};
      c = Classifier(std::move(m), info, fp);
    } else {
      StumpEnsemble m{enc, {}};
      for (const auto& s : j.at("parameters").at("stumps")) {
        m.stumps.push_back({s.at("dim").get<std::size_t>(), s.at("threshold").get<double>(),
                            s.at("left_is_positive").get<bool>(),
                            s.at("left_fraction").get<double>(),
                            s.at("right_fraction").get<double>(), s.at("alpha").get<double>(),
                            s.at("weighted_error").get<double>()});
      }
      c = Classifier(std::move(m), info, fp);
    }
    if (j.contains("constant")) c.constant_ = j.at("constant").get<double>();
    return c;
  }

 private:
  std::variant<LogisticModel, StumpEnsemble> model_;
  ModelKind kind_;
  TrainingInfo info_;
  std::optional<double> constant_;
  std::string fingerprint_;
};

namespace detail {

/// Returns the single class present, or -1 when both classes occur.
inline int single_class(const TabularDataset& data, std::span<const std::size_t> rows,
                        std::span<const int> labels) {
  bool has0 = false, has1 = false;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    (labels[k] ? has1 : has0) = true;
  }
  (void)data;
  if (has0 && has1) return -1;
  return has1 ? 1 : 0;
}

}  // namespace detail

/// L2-regularised logistic regression on `rows` with labels `labels` (one per
/// row). Single-class input yields a constant classifier flagged degenerate.
inline Classifier fit_logistic(const TabularDataset& data, std::span<const std::size_t> rows,
                               std::span<const int> labels, const LogisticConfig& cfg = {}) {
  if (rows.size() != labels.size()) throw Error("fit_logistic: labels length mismatch");
  FeatureEncoder enc(data.schema());
  const auto fp = data.schema_fingerprint();
  if (rows.empty()) return Classifier::constant(ModelKind::logistic_regression, 0.5, enc, fp);
  if (const int only = detail::single_class(data, rows, labels); only >= 0) {
    return Classifier::constant(ModelKind::logistic_regression, only, enc, fp);
  }
  const Eigen::MatrixXd X = enc.encode_rows(data, rows);
  Eigen::VectorXd y(labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k) y[k] = labels[k];
  const Eigen::Index d = X.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  TrainingInfo info;
  double f = logistic_objective(X, y, w, b, cfg.l2);
  info.loss_history.push_back(f);

  if (cfg.solver == LogisticSolver::newton) {
    for (std::size_t it = 0; it < std::min<std::size_t>(cfg.max_iterations, 200); ++it) {
      const Eigen::VectorXd g = logistic_gradient(X, y, w, b, cfg.l2);
      if (g.norm() < cfg.tol) break;
      const Eigen::VectorXd z = (X * w).array() + b;
      Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d + 1, d + 1);
      Eigen::MatrixXd Xa(X.rows(), d + 1);
      Xa << X, Eigen::VectorXd::Ones(X.rows());
      Eigen::VectorXd s(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double p = sigmoid(z[i]);
        s[i] = p * (1 - p);
      }
      H.noalias() = Xa.transpose() * s.asDiagonal() * Xa;
      H.diagonal().head(d).array() += cfg.l2;
      H.diagonal().array() += 1e-10;
      const Eigen::VectorXd step = -H.ldlt().solve(g);
      // Armijo backtracking keeps the objective monotone.
      double t = 1.0;
      const double slope = g.dot(step);
      double f_new = f;
      Eigen::VectorXd w_new;
      double b_new = b;
      while (t > 1e-12) {
        w_new = w + t * step.head(d);
        b_new = b + t * step[d];
        f_new = logistic_objective(X, y, w_new, b_new, cfg.l2);
        if (f_new <= f + 1e-4 * t * slope) break;
        t *= 0.5;
      }
      ++info.iterations;
      if (!(f_new <= f)) break;
      w = w_new;
      b = b_new;
      const double prev = f;
      f = f_new;
      info.loss_history.push_back(f);
      if (prev - f <= 1e-15 * std::max(1.0, std::abs(f))) break;
    }
  } else {
    double lipschitz = cfg.l2;
    for (Eigen::Index i = 0; i < X.rows(); ++i) lipschitz += 0.25 * (X.row(i).squaredNorm() + 1.0);
    const double step = std::min(cfg.learning_rate, 1.0 / lipschitz);
    for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
      const Eigen::VectorXd g = logistic_gradient(X, y, w, b, cfg.l2);
      if (g.norm() < cfg.tol) break;
      w -= step * g.head(d);
      b -= step * g[d];
      f = logistic_objective(X, y, w, b, cfg.l2);
      info.loss_history.push_back(f);
      ++info.iterations;
    }
  }
  LogisticModel m{enc, std::vector<double>(w.data(), w.data() + d), b};
  return Classifier(std::move(m), std::move(info), fp);
}

/// Discrete AdaBoost over depth-1 threshold stumps on the encoded features.
/// Stops early when no stump beats chance; a perfect stump is kept with the
/// capped stage weight and ends training.
inline Classifier fit_adaboost_stumps(const TabularDataset& data,
                                      std::span<const std::size_t> rows,
                                      std::span<const int> labels, std::size_t n_stumps = 200) {
  if (rows.size() != labels.size()) throw Error("fit_adaboost_stumps: labels length mismatch");
  FeatureEncoder enc(data.schema());
  const auto fp = data.schema_fingerprint();
  if (rows.empty()) return Classifier::constant(ModelKind::adaboost_stumps, 0.5, enc, fp);
  if (const int only = detail::single_class(data, rows, labels); only >= 0) {
    return Classifier::constant(ModelKind::adaboost_stumps, only, enc, fp);
  }
  const std::size_t n = rows.size();
  const std::size_t d = enc.dim();
  std::vector<double> X(n * d);
  for (std::size_t k = 0; k < n; ++k) enc.encode(data.row(rows[k]), X.data() + k * d);

  // Per-dimension sorted order and candidate thresholds are fixed across rounds.
  std::vector<std::vector<std::size_t>> order(d);
  for (std::size_t j = 0; j < d; ++j) {
    order[j].resize(n);
    std::iota(order[j].begin(), order[j].end(), std::size_t{0});
    std::stable_sort(order[j].begin(), order[j].end(),
                     [&](std::size_t a, std::size_t b) { return X[a * d + j] < X[b * d + j]; });
  }

  std::vector<double> weight(n, 1.0 / static_cast<double>(n));
  StumpEnsemble ens{enc, {}};
  TrainingInfo info;
  for (std::size_t t = 0; t < n_stumps; ++t) {
    double total1 = 0.0, total0 = 0.0;
    for (std::size_t k = 0; k < n; ++k) (labels[k] ? total1 : total0) += weight[k];
    double best_err = std::numeric_limits<double>::infinity();
    Stump best;
    for (std::size_t j = 0; j < d; ++j) {
      double left1 = 0.0, left0 = 0.0;
      const auto& ord = order[j];
      for (std::size_t p = 0; p + 1 < n; ++p) {
        const std::size_t k = ord[p];
        (labels[k] ? left1 : left0) += weight[k];
        const double v = X[k * d + j], next = X[ord[p + 1] * d + j];
        if (v == next) continue;
        // left votes 0, right votes 1
        const double err_a = left1 + (total0 - left0);
        // left votes 1, right votes 0
        const double err_b = left0 + (total1 - left1);
        const double err = std::min(err_a, err_b);
        if (err < best_err - 1e-15) {
          best_err = err;
          best.dim = j;
          best.threshold = 0.5 * (v + next);
          if (!(best.threshold < next)) best.threshold = v;
          best.left_is_positive = err_b < err_a;
        }
      }
    }
    if (!std::isfinite(best_err) || best_err >= 0.5 - 1e-12) break;
    best.weighted_error = best_err;
    const bool perfect = best_err <= 1e-10;
    best.alpha = perfect ? kMaxStageWeight : 0.5 * std::log((1.0 - best_err) / best_err);
    std::size_t nl = 0, nl1 = 0, nr = 0, nr1 = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (X[k * d + best.dim] <= best.threshold) {
        ++nl;
        nl1 += labels[k];
      } else {
        ++nr;
        nr1 += labels[k];
      }
    }
    best.left_fraction = nl ? static_cast<double>(nl1) / nl : 0.5;
    best.right_fraction = nr ? static_cast<double>(nr1) / nr : 0.5;
    ens.stumps.push_back(best);
    ++info.iterations;
    if (perfect) break;
    double z = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const bool left = X[k * d + best.dim] <= best.threshold;
      const int vote = (left == best.left_is_positive) ? 1 : 0;
      weight[k] *= std::exp(vote == labels[k] ? -best.alpha : best.alpha);
      z += weight[k];
    }
    for (auto& w : weight) w /= z;
  }
  if (ens.stumps.empty()) {
    // No stump beats chance: fall back to the class prior.
    double pos = 0;
    for (int l : labels) pos += l;
    auto c = Classifier::constant(ModelKind::adaboost_stumps, pos / n, enc, fp);
    return c;
  }
  return Classifier(std::move(ens), std::move(info), fp);
}

// ---------------------------------------------------------------------------
// Weighted ridge regression

struct RidgeModel {
  Eigen::VectorXd coef;
  double intercept = 0.0;
  double lambda = 1.0;

  double predict(std::span<const double> x) const {
    double v = intercept;
    for (Eigen::Index k = 0; k < coef.size(); ++k) v += coef[k] * x[k];
    return v;
  }
};

namespace detail {

struct CenteredSystem {
  Eigen::MatrixXd A;  // Xc^T W Xc + lambda I
  Eigen::VectorXd rhs;  // Xc^T W yc
  Eigen::RowVectorXd x_mean;
  double y_mean = 0.0;
};

inline CenteredSystem centered_system(const Eigen::MatrixXd& X, std::span<const double> y,
                                      std::span<const double> w, double lambda) {
  const Eigen::Index n = X.rows();
  if (static_cast<std::size_t>(n) != y.size() || y.size() != w.size()) {
    throw Error("ridge: X, y, weights length mismatch");
  }
  double wsum = 0.0;
  for (double wi : w) {
    if (wi < 0 || !std::isfinite(wi)) throw Error("ridge: weights must be finite and >= 0");
    wsum += wi;
  }
  if (wsum <= 0) throw Error("ridge: all sample weights are zero (degenerate kernel)");
  const Eigen::Map<const Eigen::VectorXd> Y(y.data(), n), W(w.data(), n);
  CenteredSystem s;
  s.x_mean = (W.transpose() * X) / wsum;
  s.y_mean = W.dot(Y) / wsum;
  const Eigen::MatrixXd Xc = X.rowwise() - s.x_mean;
  const Eigen::VectorXd yc = Y.array() - s.y_mean;
  s.A = Xc.transpose() * W.asDiagonal() * Xc;
  s.A.diagonal().array() += lambda;
  s.rhs = Xc.transpose() * (W.array() * yc.array()).matrix();
  return s;
}

}  // namespace detail

/// Minimises sum_i w_i (y_i - b - x_i.beta)^2 + lambda |beta|^2 by a direct
/// solve of the centred normal equations. The intercept is not penalised.
inline RidgeModel fit_ridge_weighted(const Eigen::MatrixXd& X, std::span<const double> y,
                                     std::span<const double> w, double lambda) {
  if (!(lambda > 0)) throw Error("ridge: lambda must be > 0");
  const auto s = detail::centered_system(X, y, w, lambda);
  RidgeModel m;
  m.lambda = lambda;
  m.coef = s.A.llt().solve(s.rhs);
  m.intercept = s.y_mean - s.x_mean.dot(m.coef);
  return m;
}

/// |(Xc^T W Xc + lambda I) beta - Xc^T W yc|_inf at the model's coefficients.
inline double ridge_normal_residual(const Eigen::MatrixXd& X, std::span<const double> y,
                                    std::span<const double> w, const RidgeModel& m) {
  const auto s = detail::centered_system(X, y, w, m.lambda);
  return (s.A * m.coef - s.rhs).cwiseAbs().maxCoeff();
}

}  // namespace xal
