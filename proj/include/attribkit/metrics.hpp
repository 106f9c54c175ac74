#pragma once
// Evaluation metrics: equal error rate for binary scores, pooled and
// per-class variants for multiclass posteriors, accuracy, and macro F1.
//
// EER is computed on the ROC polyline over realizable operating points only:
// one point per distinct score (accept iff score >= threshold) plus the
// reject-everything point. The miss/false-alarm difference is monotone along
// that sweep, so the equal-error crossing is unique; when it falls between
// two operating points the value is linearly interpolated. Degenerate input
// where every score is identical therefore yields 0.5, not 0.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "attribkit/common.hpp"

namespace attribkit {

// Higher score means "more positive". Throws ValidationError on empty sides
// or non-finite scores.
inline double eer(std::span<const double> positive,
                  std::span<const double> negative) {
  if (positive.empty()) throw ValidationError("eer: no positive scores");
  if (negative.empty()) throw ValidationError("eer: no negative scores");
  for (double s : positive)
    if (!std::isfinite(s)) throw ValidationError("eer: non-finite positive score");
  for (double s : negative)
    if (!std::isfinite(s)) throw ValidationError("eer: non-finite negative score");

  std::vector<double> pos(positive.begin(), positive.end());
  std::vector<double> neg(negative.begin(), negative.end());
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());

  std::vector<double> thresholds;
  thresholds.reserve(pos.size() + neg.size());
  std::merge(pos.begin(), pos.end(), neg.begin(), neg.end(),
             std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  const double np = static_cast<double>(pos.size());
  const double nn = static_cast<double>(neg.size());
  const auto count_ge = [](const std::vector<double>& v, double t) {
    return static_cast<double>(v.end() -
                               std::lower_bound(v.begin(), v.end(), t));
  };

  // Sweep from accept-everything toward reject-everything; far falls while
  // frr rises, so the first point with frr >= far brackets the crossing.
  double prev_far = 1.0, prev_frr = 0.0;
  const std::size_t n_points = thresholds.size() + 1;
  for (std::size_t i = 0; i < n_points; ++i) {
    double far, frr;
    if (i < thresholds.size()) {
      const double t = thresholds[i];
      far = count_ge(neg, t) / nn;
      frr = (np - count_ge(pos, t)) / np;
    } else {
      far = 0.0;
      frr = 1.0;
    }
    if (frr >= far) {
      if (frr == far) return far;
      const double da = prev_far - prev_frr;  // > 0
      const double db = far - frr;            // < 0
      const double alpha = da / (da - db);
      return prev_far + alpha * (far - prev_far);
    }
    prev_far = far;
    prev_frr = frr;
  }
  throw NumericError("eer: no equal-error crossing found");
}

// Multiclass EER over per-class posterior scores, one row per sample.
// Pooled (default): every (sample, class) pair becomes one binary trial with
// score = scores(i, c) and target = (labels[i] == c), then a single EER is
// computed over the pool. Macro: per-class one-vs-rest EERs averaged over
// the classes that appear in labels (a class with no positives or no
// negatives contributes nothing).
inline double eer_multiclass(const Matrix& scores,
                             const std::vector<int>& labels,
                             bool macro = false) {
  if (scores.rows() != labels.size())
    throw ValidationError("eer_multiclass: " + std::to_string(scores.rows()) +
                          " score rows vs " + std::to_string(labels.size()) +
                          " labels");
  if (scores.rows() == 0) throw ValidationError("eer_multiclass: no samples");
  const int C = static_cast<int>(scores.cols());
  if (C < 2) throw ValidationError("eer_multiclass: needs at least 2 classes");
  for (int y : labels)
    if (y < 0 || y >= C)
      throw ValidationError("eer_multiclass: label " + std::to_string(y) +
                            " outside [0, " + std::to_string(C) + ")");

  if (!macro) {
    std::vector<double> pos, neg;
    for (std::size_t i = 0; i < scores.rows(); ++i)
      for (int c = 0; c < C; ++c)
        (labels[i] == c ? pos : neg).push_back(scores(i, static_cast<std::size_t>(c)));
    return eer(pos, neg);
  }

  double total = 0.0;
  int used = 0;
  for (int c = 0; c < C; ++c) {
    std::vector<double> pos, neg;
    for (std::size_t i = 0; i < scores.rows(); ++i)
      (labels[i] == c ? pos : neg).push_back(scores(i, static_cast<std::size_t>(c)));
    if (pos.empty() || neg.empty()) continue;
    total += eer(pos, neg);
    ++used;
  }
  if (used == 0)
    throw ValidationError("eer_multiclass: no class has both positives and negatives");
  return total / used;
}

inline double accuracy(const std::vector<int>& predicted,
                       const std::vector<int>& truth) {
  if (predicted.size() != truth.size())
    throw ValidationError("accuracy: " + std::to_string(predicted.size()) +
                          " predictions vs " + std::to_string(truth.size()) +
                          " labels");
  if (predicted.empty()) throw ValidationError("accuracy: no samples");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    hits += (predicted[i] == truth[i]);
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

// Macro F1 over classes 0..C-1 with C inferred from the data. A class whose
// precision/recall denominator is zero (never predicted, never true)
// contributes an F1 of 0, matching the usual convention.
inline double f1_macro(const std::vector<int>& predicted,
                       const std::vector<int>& truth) {
  if (predicted.size() != truth.size())
    throw ValidationError("f1_macro: " + std::to_string(predicted.size()) +
                          " predictions vs " + std::to_string(truth.size()) +
                          " labels");
  if (predicted.empty()) throw ValidationError("f1_macro: no samples");
  int C = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] < 0 || truth[i] < 0)
      throw ValidationError("f1_macro: negative class label");
    C = std::max({C, predicted[i] + 1, truth[i] + 1});
  }
  double total = 0.0;
  for (int c = 0; c < C; ++c) {
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      const bool p = predicted[i] == c;
      const bool t = truth[i] == c;
      tp += (p && t);
      fp += (p && !t);
      fn += (!p && t);
    }
    const double denom = 2.0 * tp + fp + fn;
    total += denom == 0.0 ? 0.0 : 2.0 * tp / denom;
  }
  return total / C;
}

}  // namespace attribkit
