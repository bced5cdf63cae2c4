/* Copyright 2026 The ACVC Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef ACVC_CAM_LOSSES_HPP_
#define ACVC_CAM_LOSSES_HPP_

// Class activation maps and the attention-consistency objective.
//
// Shapes follow the decomposition f = softmax(W^T P(g(x))):
//   features  G : n x s   (channels x spatial locations)
//   classifier W : n x C
//   CAMs      M : C x s   (row c is a distribution over locations)
//
// All logarithms are natural; every log argument is floored at kLogFloor.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "acvc/errors.hpp"

namespace acvc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kLogFloor = 1e-12;
inline constexpr double kDefaultLambda = 0.06;
inline constexpr int kDefaultTopK = 3;
inline constexpr double kDefaultTemperature = 1.0;

struct FeatureMap {
  Matrix values;  // n x s

  int channels() const { return static_cast<int>(values.rows()); }
  int locations() const { return static_cast<int>(values.cols()); }
};

struct Classifier {
  Matrix weights;  // n x C

  int channels() const { return static_cast<int>(weights.rows()); }
  int class_count() const { return static_cast<int>(weights.cols()); }
};

struct CamSet {
  Matrix maps;  // C x s, rows sum to one
  double temperature = kDefaultTemperature;

  int class_count() const { return static_cast<int>(maps.rows()); }
  int locations() const { return static_cast<int>(maps.cols()); }
};

enum class ConsistencyMode { cam_jsd, cam_mse, pred_jsd, neg_only, none };

inline std::string_view name_of(ConsistencyMode mode) {
  switch (mode) {
    case ConsistencyMode::cam_jsd: return "cam_jsd";
    case ConsistencyMode::cam_mse: return "cam_mse";
    case ConsistencyMode::pred_jsd: return "pred_jsd";
    case ConsistencyMode::neg_only: return "neg_only";
    case ConsistencyMode::none: return "none";
  }
  return "?";
}

inline ConsistencyMode parse_consistency_mode(std::string_view name) {
  for (auto m : {ConsistencyMode::cam_jsd, ConsistencyMode::cam_mse,
                 ConsistencyMode::pred_jsd, ConsistencyMode::neg_only,
                 ConsistencyMode::none})
    if (name_of(m) == name) return m;
  throw DomainError("unknown consistency mode '" + std::string(name) + "'");
}

/// Decomposed objective. `cam` holds whichever consistency term the mode
/// selects and `neg` the negative-CAM term when active, so that
/// total == ce + lambda * (cam + neg) in every mode.
struct LossReport {
  double ce = 0.0;
  double cam = 0.0;
  double neg = 0.0;
  double total = 0.0;
  double lambda = kDefaultLambda;
  ConsistencyMode mode = ConsistencyMode::cam_jsd;
};

struct NegativeSet {
  std::vector<int> classes;
};

// ---------------------------------------------------------------------------
// Softmax and CAMs
// ---------------------------------------------------------------------------

/// softmax(x / T) with max subtraction.
inline Vector softmax(const Vector& x, double temperature = 1.0) {
  const double top = x.maxCoeff();
  Vector e = ((x.array() - top) / temperature).exp().matrix();
  return e / e.sum();
}

inline Matrix row_softmax(const Matrix& z, double temperature) {
  Matrix out(z.rows(), z.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r)
    out.row(r) = softmax(z.row(r).transpose(), temperature).transpose();
  return out;
}

inline void check_temperature(double temperature) {
  if (!(temperature > 0.0))
    throw DomainError("temperature must be positive, got " + std::to_string(temperature));
}

inline void check_compatible(const FeatureMap& features, const Classifier& classifier) {
  if (features.channels() != classifier.channels())
    throw ShapeError("feature map has " + std::to_string(features.channels()) +
                     " channels but classifier expects " +
                     std::to_string(classifier.channels()));
}

/// M = row-softmax over locations of W^T G at temperature T.
inline CamSet compute_cam(const FeatureMap& features, const Classifier& classifier,
                          double temperature = kDefaultTemperature) {
  check_compatible(features, classifier);
  check_temperature(temperature);
  return {row_softmax(classifier.weights.transpose() * features.values, temperature),
          temperature};
}

/// Global average pooling followed by the linear classifier.
inline Vector class_logits(const FeatureMap& features, const Classifier& classifier) {
  check_compatible(features, classifier);
  return classifier.weights.transpose() * features.values.rowwise().mean();
}

// ---------------------------------------------------------------------------
// Divergences
// ---------------------------------------------------------------------------

inline double floored_log(double v) { return std::log(std::max(v, kLogFloor)); }

inline void check_same_length(const Vector& p, const Vector& q, std::string_view what) {
  if (p.size() != q.size())
    throw ShapeError(std::string(what) + ": length " + std::to_string(p.size()) +
                     " vs " + std::to_string(q.size()));
}

/// KL(p || q).
inline double kl_divergence(const Vector& p, const Vector& q) {
  check_same_length(p, q, "kl_divergence");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    acc += p[i] * (floored_log(p[i]) - floored_log(q[i]));
  return acc;
}

/// Equal-weight Jensen-Shannon divergence with midpoint mixture; in [0, ln 2].
inline double js_divergence(const Vector& p, const Vector& q) {
  check_same_length(p, q, "js_divergence");
  const Vector m = 0.5 * (p + q);
  return 0.5 * kl_divergence(p, m) + 0.5 * kl_divergence(q, m);
}

// d JSD(p, q) / d p_i = 0.5 ln(p_i / m_i).
inline Vector js_divergence_grad(const Vector& p, const Vector& q) {
  Vector g(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i)
    g[i] = 0.5 * (floored_log(p[i]) - floored_log(0.5 * (p[i] + q[i])));
  return g;
}

// KL(U || p) with U uniform over p's support.
inline double kl_from_uniform(const Vector& p) {
  const double u = 1.0 / static_cast<double>(p.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) acc += u * (std::log(u) - floored_log(p[i]));
  return acc;
}

inline Vector kl_from_uniform_grad(const Vector& p) {
  const double u = 1.0 / static_cast<double>(p.size());
  Vector g(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) g[i] = p[i] > kLogFloor ? -u / p[i] : 0.0;
  return g;
}

// ---------------------------------------------------------------------------
// Loss terms
// ---------------------------------------------------------------------------

inline void check_label(int label, Eigen::Index class_count) {
  if (label < 0 || label >= class_count)
    throw DomainError("label " + std::to_string(label) + " outside [0, " +
                      std::to_string(class_count) + ")");
}

/// -log p_clean[y] - log p_corrupt[y]; the two terms are summed.
inline double loss_ce(const Vector& probs_clean, const Vector& probs_corrupt, int label) {
  check_same_length(probs_clean, probs_corrupt, "loss_ce");
  check_label(label, probs_clean.size());
  return -floored_log(probs_clean[label]) - floored_log(probs_corrupt[label]);
}

inline void check_cam_pair(const CamSet& a, const CamSet& b) {
  if (a.maps.rows() != b.maps.rows() || a.maps.cols() != b.maps.cols())
    throw ShapeError("CAM sets differ in shape");
}

/// Attention consistency: JSD between the ground-truth CAM rows.
inline double loss_cam(const CamSet& cam_clean, const CamSet& cam_corrupt, int label) {
  check_cam_pair(cam_clean, cam_corrupt);
  check_label(label, cam_clean.maps.rows());
  return js_divergence(cam_clean.maps.row(label).transpose(),
                       cam_corrupt.maps.row(label).transpose());
}

inline double loss_cam_mse(const CamSet& cam_clean, const CamSet& cam_corrupt, int label) {
  check_cam_pair(cam_clean, cam_corrupt);
  check_label(label, cam_clean.maps.rows());
  return (cam_clean.maps.row(label) - cam_corrupt.maps.row(label)).squaredNorm() /
         static_cast<double>(cam_clean.maps.cols());
}

inline double loss_pred_jsd(const Vector& probs_clean, const Vector& probs_corrupt) {
  check_same_length(probs_clean, probs_corrupt, "loss_pred_jsd");
  return js_divergence(probs_clean, probs_corrupt);
}

/// The k most confident non-label classes on the clean image, ties broken
/// by lower class index.
inline NegativeSet top_k_negatives(const Vector& probs_clean, int label, int k = kDefaultTopK) {
  const auto classes = static_cast<int>(probs_clean.size());
  check_label(label, classes);
  if (k < 1 || k > classes - 1)
    throw DomainError("k must be in [1, " + std::to_string(classes - 1) + "], got " +
                      std::to_string(k));
  std::vector<int> order;
  for (int c = 0; c < classes; ++c)
    if (c != label) order.push_back(c);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return probs_clean[a] > probs_clean[b]; });
  order.resize(static_cast<std::size_t>(k));
  return {order};
}

/// Sum over negatives of KL(U || M_c) + KL(U || M^_c).
inline double loss_neg(const CamSet& cam_clean, const CamSet& cam_corrupt,
                       const NegativeSet& negatives) {
  check_cam_pair(cam_clean, cam_corrupt);
  double acc = 0.0;
  for (int c : negatives.classes) {
    check_label(c, cam_clean.maps.rows());
    acc += kl_from_uniform(cam_clean.maps.row(c).transpose()) +
           kl_from_uniform(cam_corrupt.maps.row(c).transpose());
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Objective
// ---------------------------------------------------------------------------

/// Candidate terms; total_loss picks the ones the mode uses.
struct LossTerms {
  double ce = 0.0;
  double cam_jsd = 0.0;
  double cam_mse = 0.0;
  double pred_jsd = 0.0;
  double neg = 0.0;
};

inline LossReport total_loss(const LossTerms& t, double lambda = kDefaultLambda,
                             ConsistencyMode mode = ConsistencyMode::cam_jsd) {
  if (!(lambda >= 0.0)) throw DomainError("lambda must be >= 0");
  LossReport r;
  r.ce = t.ce;
  r.lambda = lambda;
  r.mode = mode;
  switch (mode) {
    case ConsistencyMode::cam_jsd:
      r.cam = t.cam_jsd;
      r.neg = t.neg;
      break;
    case ConsistencyMode::cam_mse: r.cam = t.cam_mse; break;
    case ConsistencyMode::pred_jsd: r.cam = t.pred_jsd; break;
    case ConsistencyMode::neg_only: r.neg = t.neg; break;
    case ConsistencyMode::none: break;
    default: throw DomainError("unknown consistency mode");
  }
  r.total = r.ce + lambda * (r.cam + r.neg);
  return r;
}

struct ObjectiveConfig {
  double lambda = kDefaultLambda;
  double temperature = kDefaultTemperature;
  int k = kDefaultTopK;
  ConsistencyMode mode = ConsistencyMode::cam_jsd;
};

inline bool uses_cams(ConsistencyMode mode) {
  return mode == ConsistencyMode::cam_jsd || mode == ConsistencyMode::cam_mse ||
         mode == ConsistencyMode::neg_only;
}

inline bool uses_negatives(ConsistencyMode mode) {
  return mode == ConsistencyMode::cam_jsd || mode == ConsistencyMode::neg_only;
}

// Negatives are capped at C - 1 so the default k = 3 stays usable with
// fewer than four classes.
inline int effective_top_k(int k, int class_count) {
  return std::min(k, class_count - 1);
}

struct ObjectiveGradients {
  LossReport report;
  Matrix d_features_clean;    // n x s
  Matrix d_features_corrupt;  // n x s
  Matrix d_weights;           // n x C
};

/// Value and analytic gradient of the per-sample objective with respect to
/// both feature maps and the classifier weights. Gradients flow through both
/// branches of every consistency term; the negative-class selection is a
/// discrete choice and carries no gradient.
inline ObjectiveGradients objective_gradients(const FeatureMap& clean,
                                              const FeatureMap& corrupt,
                                              const Classifier& classifier, int label,
                                              const ObjectiveConfig& cfg,
                                              bool want_gradients = true) {
  check_compatible(clean, classifier);
  check_compatible(corrupt, classifier);
  if (clean.locations() != corrupt.locations())
    throw ShapeError("clean and corrupted feature maps differ in locations");
  check_temperature(cfg.temperature);
  if (!(cfg.lambda >= 0.0)) throw DomainError("lambda must be >= 0");
  const int classes = classifier.class_count();
  check_label(label, classes);
  const Matrix& W = classifier.weights;
  const auto s = static_cast<double>(clean.locations());

  const FeatureMap* branch[2] = {&clean, &corrupt};
  Vector pooled[2], probs[2];
  for (int b = 0; b < 2; ++b) {
    pooled[b] = branch[b]->values.rowwise().mean();
    probs[b] = softmax(W.transpose() * pooled[b]);
  }

  LossTerms terms;
  terms.ce = loss_ce(probs[0], probs[1], label);

  std::optional<CamSet> cams[2];
  NegativeSet negatives;
  if (uses_cams(cfg.mode)) {
    for (int b = 0; b < 2; ++b) cams[b] = compute_cam(*branch[b], classifier, cfg.temperature);
    if (cfg.mode == ConsistencyMode::cam_jsd) terms.cam_jsd = loss_cam(*cams[0], *cams[1], label);
    if (cfg.mode == ConsistencyMode::cam_mse)
      terms.cam_mse = loss_cam_mse(*cams[0], *cams[1], label);
    if (uses_negatives(cfg.mode) && classes > 1) {
      negatives = top_k_negatives(probs[0], label, effective_top_k(cfg.k, classes));
      terms.neg = loss_neg(*cams[0], *cams[1], negatives);
    }
  }
  if (cfg.mode == ConsistencyMode::pred_jsd) terms.pred_jsd = loss_pred_jsd(probs[0], probs[1]);

  ObjectiveGradients out;
  out.report = total_loss(terms, cfg.lambda, cfg.mode);
  if (!want_gradients) return out;

  // d/d logits, per branch.
  Vector d_logits[2];
  for (int b = 0; b < 2; ++b) {
    // A floored log is flat, so an underflowed label probability yields no
    // CE gradient.
    if (probs[b][label] > kLogFloor) {
      d_logits[b] = probs[b];
      d_logits[b][label] -= 1.0;
    } else {
      d_logits[b] = Vector::Zero(classes);
    }
  }
  if (cfg.mode == ConsistencyMode::pred_jsd) {
    for (int b = 0; b < 2; ++b) {
      const Vector g = cfg.lambda * js_divergence_grad(probs[b], probs[1 - b]);
      d_logits[b] += (probs[b].array() * (g.array() - g.dot(probs[b]))).matrix();
    }
  }

  // d/d M, then through the location softmax to d/d Z where Z = W^T G.
  Matrix d_z[2];
  for (int b = 0; b < 2; ++b) d_z[b] = Matrix::Zero(classes, clean.locations());
  if (uses_cams(cfg.mode)) {
    Matrix d_m[2] = {Matrix::Zero(classes, clean.locations()),
                     Matrix::Zero(classes, clean.locations())};
    for (int b = 0; b < 2; ++b) {
      const Vector mine = cams[b]->maps.row(label).transpose();
      const Vector other = cams[1 - b]->maps.row(label).transpose();
      if (cfg.mode == ConsistencyMode::cam_jsd)
        d_m[b].row(label) += cfg.lambda * js_divergence_grad(mine, other).transpose();
      if (cfg.mode == ConsistencyMode::cam_mse)
        d_m[b].row(label) += (cfg.lambda * 2.0 / s) * (mine - other).transpose();
      for (int c : negatives.classes)
        d_m[b].row(c) +=
            cfg.lambda * kl_from_uniform_grad(cams[b]->maps.row(c).transpose()).transpose();
    }
    for (int b = 0; b < 2; ++b) {
      const Matrix& m = cams[b]->maps;
      for (Eigen::Index c = 0; c < m.rows(); ++c) {
        const double inner = d_m[b].row(c).dot(m.row(c));
        d_z[b].row(c) =
            (m.row(c).array() * (d_m[b].row(c).array() - inner)).matrix() / cfg.temperature;
      }
    }
  }

  out.d_weights = Matrix::Zero(W.rows(), W.cols());
  for (int b = 0; b < 2; ++b) {
    out.d_weights += pooled[b] * d_logits[b].transpose();
    out.d_weights += branch[b]->values * d_z[b].transpose();
    Matrix d_g = W * d_z[b];
    d_g.colwise() += (W * d_logits[b]) / s;
    (b == 0 ? out.d_features_clean : out.d_features_corrupt) = std::move(d_g);
  }
  return out;
}

}  // namespace acvc

#endif  // ACVC_CAM_LOSSES_HPP_
