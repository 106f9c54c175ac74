#pragma once
// Shapley attributions over an interventional value function.
//
// v(S) = mean over background rows z of f(u), where u takes x on the
// features in S and z elsewhere. The explained scalar f is the probability
// the tree assigns to one class: a fixed positive class for detection, the
// class predicted at the query point for attribution.
//
// shapley_exact enumerates all 2^T feature subsets and is the reference
// implementation (T capped at 20). shapley_tree computes the same values
// with one root-to-leaf recursion per background row, tracking which
// decision features have followed x and which have followed z; a leaf
// reached with a of them on the x side and b on the z side contributes with
// the closed-form pair weights a!(b-a)!/(b+1)!.

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "attribkit/common.hpp"
#include "attribkit/dtree.hpp"
#include "attribkit/taxonomy.hpp"

namespace attribkit {

namespace detail {

inline void check_background(const Matrix& background, std::size_t dim,
                             const char* where) {
  if (background.rows() == 0)
    throw ValidationError(std::string(where) + ": empty background set");
  if (background.cols() != dim)
    throw ValidationError(std::string(where) + ": background has " +
                          std::to_string(background.cols()) +
                          " features, query has " + std::to_string(dim));
}

// W[a][b] = a! (b-a)! / (b+1)! for 0 <= a <= b < T, filled backwards from
// W[b][b] = 1/(b+1) via W[a][b] = (b-a)/(a+1) * W[a+1][b].
inline std::vector<std::vector<double>> shapley_pair_weights(int T) {
  std::vector<std::vector<double>> W(static_cast<std::size_t>(T));
  for (int b = 0; b < T; ++b) {
    auto& col = W[static_cast<std::size_t>(b)];
    col.resize(static_cast<std::size_t>(b) + 1);
    col[static_cast<std::size_t>(b)] = 1.0 / (b + 1);
    for (int a = b - 1; a >= 0; --a)
      col[static_cast<std::size_t>(a)] =
          (static_cast<double>(b - a) / (a + 1)) * col[static_cast<std::size_t>(a) + 1];
  }
  return W;
}

}  // namespace detail

// Mean of f over the background rows; v(empty set).
template <typename F>
double interventional_base(F&& f, const Matrix& background) {
  if (background.rows() == 0)
    throw ValidationError("interventional_base: empty background set");
  double acc = 0.0;
  for (std::size_t r = 0; r < background.rows(); ++r)
    acc += f(background.row(r));
  return acc / static_cast<double>(background.rows());
}

// Exact Shapley values by subset enumeration:
//   phi_k = sum over S not containing k of |S|!(T-|S|-1)!/T! * (v(S+k) - v(S)).
template <typename F>
std::vector<double> shapley_exact(F&& f, std::span<const double> x,
                                  const Matrix& background) {
  const int T = static_cast<int>(x.size());
  if (T == 0) throw ValidationError("shapley_exact: empty query");
  if (T > 20)
    throw ValidationError("shapley_exact: " + std::to_string(T) +
                          " features would need 2^" + std::to_string(T) +
                          " subsets; limit is 20");
  detail::check_background(background, x.size(), "shapley_exact");

  const std::uint32_t masks = 1u << T;
  std::vector<double> v(masks);
  std::vector<double> u(x.size());
  for (std::uint32_t mask = 0; mask < masks; ++mask) {
    double acc = 0.0;
    for (std::size_t r = 0; r < background.rows(); ++r) {
      const auto z = background.row(r);
      for (int i = 0; i < T; ++i)
        u[static_cast<std::size_t>(i)] =
            (mask >> i & 1u) ? x[static_cast<std::size_t>(i)]
                             : z[static_cast<std::size_t>(i)];
      acc += f(std::span<const double>(u));
    }
    v[mask] = acc / static_cast<double>(background.rows());
  }

  std::vector<long double> fact(static_cast<std::size_t>(T) + 1, 1.0L);
  for (int i = 1; i <= T; ++i)
    fact[static_cast<std::size_t>(i)] = fact[static_cast<std::size_t>(i) - 1] * i;
  std::vector<long double> weight(static_cast<std::size_t>(T));
  for (int s = 0; s < T; ++s)
    weight[static_cast<std::size_t>(s)] =
        fact[static_cast<std::size_t>(s)] *
        fact[static_cast<std::size_t>(T - 1 - s)] / fact[static_cast<std::size_t>(T)];

  std::vector<double> phi(x.size());
  for (int k = 0; k < T; ++k) {
    long double acc = 0.0L;
    const std::uint32_t bit = 1u << k;
    for (std::uint32_t mask = 0; mask < masks; ++mask) {
      if (mask & bit) continue;
      acc += weight[static_cast<std::size_t>(std::popcount(mask))] *
             (static_cast<long double>(v[mask | bit]) - v[mask]);
    }
    phi[static_cast<std::size_t>(k)] = static_cast<double>(acc);
  }
  return phi;
}

// Shapley values of tree.predict_dist(.)[target_class] under the same
// interventional value function, without subset enumeration.
inline std::vector<double> shapley_tree(const DecisionTree& tree,
                                        int target_class,
                                        std::span<const double> x,
                                        const Matrix& background) {
  const int T = tree.n_features();
  if (static_cast<int>(x.size()) != T)
    throw ValidationError("shapley_tree: query has " +
                          std::to_string(x.size()) + " features, tree uses " +
                          std::to_string(T));
  if (target_class < 0 || target_class >= tree.n_classes())
    throw ValidationError("shapley_tree: class " +
                          std::to_string(target_class) + " outside [0, " +
                          std::to_string(tree.n_classes()) + ")");
  detail::check_background(background, x.size(), "shapley_tree");

  const auto W = detail::shapley_pair_weights(T);
  const auto& nodes = tree.nodes();
  std::vector<double> phi(x.size(), 0.0);

  // Per-feature side flags plus explicit lists for the leaf update. Flags
  // are restored on the way out, so one allocation serves the whole query.
  std::vector<char> on_x(x.size(), 0), on_z(x.size(), 0);
  std::vector<int> x_list, z_list;

  const auto leaf_value = [&](const DecisionTree::Node& node) {
    double total = 0.0;
    for (double c : node.counts) total += c;
    return node.counts[static_cast<std::size_t>(target_class)] / total;
  };

  for (std::size_t r = 0; r < background.rows(); ++r) {
    const auto z = background.row(r);
    const auto visit = [&](auto&& self, int index) -> void {
      const auto& node = nodes[static_cast<std::size_t>(index)];
      if (node.feature < 0) {
        const int a = static_cast<int>(x_list.size());
        const int b = a + static_cast<int>(z_list.size());
        if (b == 0) return;  // x and z agree on every decision feature
        const double val = leaf_value(node);
        if (a > 0) {
          const double w = W[static_cast<std::size_t>(b) - 1]
                            [static_cast<std::size_t>(a) - 1] * val;
          for (const int k : x_list) phi[static_cast<std::size_t>(k)] += w;
        }
        if (b > a) {
          const double w = W[static_cast<std::size_t>(b) - 1]
                            [static_cast<std::size_t>(a)] * val;
          for (const int k : z_list) phi[static_cast<std::size_t>(k)] -= w;
        }
        return;
      }
      const auto k = static_cast<std::size_t>(node.feature);
      const int x_child = x[k] <= node.threshold ? node.left : node.right;
      const int z_child = z[k] <= node.threshold ? node.left : node.right;
      if (x_child == z_child) {
        self(self, x_child);
      } else if (on_x[k]) {
        self(self, x_child);
      } else if (on_z[k]) {
        self(self, z_child);
      } else {
        on_x[k] = 1;
        x_list.push_back(static_cast<int>(k));
        self(self, x_child);
        x_list.pop_back();
        on_x[k] = 0;
        on_z[k] = 1;
        z_list.push_back(static_cast<int>(k));
        self(self, z_child);
        z_list.pop_back();
        on_z[k] = 0;
      }
    };
    visit(visit, 0);
  }

  for (auto& p : phi) p /= static_cast<double>(background.rows());
  return phi;
}

// ---------------------------------------------------------------------------
// Importance report
// ---------------------------------------------------------------------------

// Sentinel for explain_class: explain the class the tree predicts at each
// query point instead of one fixed class.
inline constexpr int kPredictedClass = -1;

struct ShapleyRun {
  std::uint64_t tree_seed = 0;
  double base_value = 0.0;        // mean over queries of v(empty set)
  std::vector<double> mean_abs;   // per attribute: mean |phi| over queries
};

struct ShapleyReport {
  std::vector<std::string> attributes;  // taxonomy order, one per feature
  std::vector<std::string> sets;        // owning set per feature
  std::vector<double> mean_abs;         // averaged over runs
  std::vector<int> rank;                // 1 = largest mean_abs
  std::vector<ShapleyRun> runs;
};

// Trains `runs` trees with distinct seeds on the training data, computes per
// attribute the mean |Shapley value| over the dev rows (dev doubles as the
// background set), and averages across runs. explain_class picks the scalar
// being explained; kPredictedClass re-targets it per query.
inline ShapleyReport importance_report(
    const Matrix& X_train, const std::vector<int>& y_train,
    const Matrix& X_dev, const std::vector<std::string>& class_names,
    const AttributeTaxonomy& tax, int max_depth, int runs, std::uint64_t seed,
    int explain_class = kPredictedClass) {
  if (runs < 1) throw ValidationError("importance_report: runs must be >= 1");
  if (X_train.cols() != static_cast<std::size_t>(tax.total_dim()))
    throw ValidationError("importance_report: data has " +
                          std::to_string(X_train.cols()) +
                          " features, taxonomy describes " +
                          std::to_string(tax.total_dim()) + " attributes");
  if (X_dev.rows() == 0)
    throw ValidationError("importance_report: empty dev set");
  if (X_dev.cols() != X_train.cols())
    throw ValidationError("importance_report: train/dev dimension mismatch");
  if (explain_class != kPredictedClass &&
      (explain_class < 0 ||
       explain_class >= static_cast<int>(class_names.size())))
    throw ValidationError("importance_report: explain_class out of range");

  const auto T = static_cast<std::size_t>(tax.total_dim());
  ShapleyReport report;
  for (std::size_t k = 0; k < T; ++k) {
    const auto [set, j] = tax.locate(static_cast<int>(k));
    const auto& def = tax.sets()[static_cast<std::size_t>(set)];
    report.attributes.push_back(def.attributes[static_cast<std::size_t>(j)]);
    report.sets.push_back(def.name);
  }

  for (int run = 0; run < runs; ++run) {
    TreeConfig cfg;
    cfg.max_depth = max_depth;
    cfg.seed = detail::mix_seed(seed, {"tree", std::to_string(run)});
    const auto tree = fit_tree(X_train, y_train, class_names, cfg);

    std::vector<std::vector<double>> abs_phi(X_dev.rows());
    std::vector<double> bases(X_dev.rows());
    detail::parallel_for(X_dev.rows(), [&](std::size_t q) {
      const auto x = X_dev.row(q);
      const int target =
          explain_class == kPredictedClass ? tree.predict(x) : explain_class;
      auto phi = shapley_tree(tree, target, x, X_dev);
      for (auto& p : phi) p = std::abs(p);
      abs_phi[q] = std::move(phi);
      bases[q] = interventional_base(
          [&](std::span<const double> z) { return tree.predict_dist(z)[static_cast<std::size_t>(target)]; },
          X_dev);
    });

    ShapleyRun summary;
    summary.tree_seed = cfg.seed;
    summary.mean_abs.assign(T, 0.0);
    for (std::size_t q = 0; q < X_dev.rows(); ++q) {
      summary.base_value += bases[q];
      for (std::size_t k = 0; k < T; ++k)
        summary.mean_abs[k] += abs_phi[q][k];
    }
    summary.base_value /= static_cast<double>(X_dev.rows());
    for (auto& m : summary.mean_abs) m /= static_cast<double>(X_dev.rows());
    report.runs.push_back(std::move(summary));
  }

  report.mean_abs.assign(T, 0.0);
  for (const auto& run : report.runs)
    for (std::size_t k = 0; k < T; ++k) report.mean_abs[k] += run.mean_abs[k];
  for (auto& m : report.mean_abs) m /= static_cast<double>(runs);

  std::vector<std::size_t> order(T);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.mean_abs[a] > report.mean_abs[b];
  });
  report.rank.resize(T);
  for (std::size_t i = 0; i < T; ++i)
    report.rank[order[i]] = static_cast<int>(i) + 1;
  return report;
}

// Per-attribute table in taxonomy order.
inline void write_shapley_report(const std::string& path,
                                 const ShapleyReport& report) {
  auto out = detail::open_out(path);
  out << "attribute,set,mean_abs_shapley,rank\n";
  for (std::size_t k = 0; k < report.attributes.size(); ++k)
    out << report.attributes[k] << ',' << report.sets[k] << ','
        << detail::format_g17(report.mean_abs[k]) << ',' << report.rank[k]
        << '\n';
  if (!out) throw IoError("write failed: " + path);
}

// Human-readable ranking, best rank first.
inline void write_shapley_ranked(const std::string& path,
                                 const ShapleyReport& report) {
  const std::size_t T = report.attributes.size();
  std::vector<std::size_t> order(T);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.rank[a] < report.rank[b];
  });
  auto out = detail::open_out(path);
  out << "Attribute importance: mean |Shapley value| over the dev split, "
      << report.runs.size() << (report.runs.size() == 1 ? " run" : " runs")
      << '\n';
  out << "rank  mean|shapley|  attribute (set)\n";
  for (const auto k : order) {
    char head[32];
    std::snprintf(head, sizeof head, "%4d  %13s  ", report.rank[k],
                  detail::format_fixed(report.mean_abs[k], 8).c_str());
    out << head << report.attributes[k] << " (" << report.sets[k] << ")\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

// Bar-chart data: one row per attribute, best rank first.
inline void write_shapley_bars(const std::string& path,
                               const ShapleyReport& report) {
  const std::size_t T = report.attributes.size();
  std::vector<std::size_t> order(T);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.rank[a] < report.rank[b];
  });
  auto out = detail::open_out(path);
  out << "rank,attribute,set,mean_abs_shapley\n";
  for (const auto k : order)
    out << report.rank[k] << ',' << report.attributes[k] << ','
        << report.sets[k] << ',' << detail::format_g17(report.mean_abs[k])
        << '\n';
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace attribkit
