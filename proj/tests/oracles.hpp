#pragma once
// Reference implementations used only by tests. Each one recomputes a result
// through a different route than the library (midpoint thresholds and ROC
// geometry here, closed-form counts elsewhere) so agreement is meaningful.

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace oracles {

// EER as the intersection of the ROC polyline with tpr = 1 - fpr.
// Thresholds are midpoints between consecutive distinct scores of the pooled
// sample plus one below the minimum, decision rule "accept iff score > t".
inline double eer(std::vector<double> pos, std::vector<double> neg) {
  if (pos.empty() || neg.empty())
    throw std::invalid_argument("oracle eer: empty side");
  std::vector<double> all;
  all.insert(all.end(), pos.begin(), pos.end());
  all.insert(all.end(), neg.begin(), neg.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  // Descending thresholds: above max, midpoints, below min.
  std::vector<double> thresholds;
  thresholds.push_back(all.back() + 1.0);
  for (std::size_t i = all.size(); i-- > 1;)
    thresholds.push_back(0.5 * (all[i - 1] + all[i]));
  thresholds.push_back(all.front() - 1.0);

  const auto rate_above = [](const std::vector<double>& v, double t) {
    std::size_t n = 0;
    for (double s : v) n += (s > t);
    return static_cast<double>(n) / static_cast<double>(v.size());
  };

  double prev_fpr = 0.0, prev_tpr = 0.0;
  for (double t : thresholds) {
    const double fpr = rate_above(neg, t);
    const double tpr = rate_above(pos, t);
    const double g = tpr + fpr - 1.0;  // monotone non-decreasing in the sweep
    if (g >= 0.0) {
      if (g == 0.0) return fpr;
      const double dx = fpr - prev_fpr;
      const double dy = tpr - prev_tpr;
      const double alpha = (1.0 - prev_fpr - prev_tpr) / (dx + dy);
      return prev_fpr + alpha * dx;
    }
    prev_fpr = fpr;
    prev_tpr = tpr;
  }
  throw std::logic_error("oracle eer: no crossing");
}

}  // namespace oracles
