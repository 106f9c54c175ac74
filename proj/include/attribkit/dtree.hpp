#pragma once
// CART-style decision trees with Gini impurity.
//
// Split candidates are midpoints between consecutive distinct values of each
// feature. The best candidate is the one with maximal impurity decrease;
// exact gain ties are broken by a random draw whose seed depends only on the
// node's root path (one hash step per left/right edge) and the tree seed.
// Because the draw is independent of depth limits and sibling content, a
// deeper tree refines a shallower one node for node, which keeps training
// accuracy non-decreasing in max_depth. Zero-gain splits are allowed (they
// are what lets deeper trees solve parity-style problems), so recursion
// stops only on purity, the depth cap, or constant features.
//
// Tree file (little-endian): magic "PADT" | version u32 = 1 | max_depth i32 |
// seed u64 | n_features u32 | n_classes u32 | class names str16 each |
// n_nodes u32 | nodes: kind u8 (0 leaf, 1 internal); internal: feature u32 |
// threshold f64 | left u32 | right u32; leaf: n_classes * f64 counts.
// Node 0 is the root; every node must be referenced exactly once.

#include <algorithm>
#include <cmath>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "attribkit/common.hpp"
#include "attribkit/io.hpp"

namespace attribkit {

inline constexpr std::uint32_t kTreeFormatVersion = 1;

struct TreeConfig {
  int max_depth = 0;  // 0 = unlimited
  std::uint64_t seed = 0;
};

class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> counts;  // leaf only: training samples per class
  };

  DecisionTree() = default;
  DecisionTree(int n_features, std::vector<std::string> class_names,
               TreeConfig config, std::vector<Node> nodes)
      : n_features_(n_features),
        class_names_(std::move(class_names)),
        config_(config),
        nodes_(std::move(nodes)) {}

  int n_features() const { return n_features_; }
  int n_classes() const { return static_cast<int>(class_names_.size()); }
  const std::vector<std::string>& class_names() const { return class_names_; }
  const TreeConfig& config() const { return config_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t num_nodes() const { return nodes_.size(); }

  int depth() const { return depth_below(0); }

  const Node& leaf_for(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != n_features_)
      throw ValidationError("DecisionTree: input has " +
                            std::to_string(x.size()) + " features, expected " +
                            std::to_string(n_features_));
    const Node* node = &nodes_[0];
    while (node->feature >= 0)
      node = &nodes_[static_cast<std::size_t>(
          x[static_cast<std::size_t>(node->feature)] <= node->threshold
              ? node->left
              : node->right)];
    return *node;
  }

  // Leaf class counts normalized to probabilities.
  std::vector<double> predict_dist(std::span<const double> x) const {
    const auto& counts = leaf_for(x).counts;
    double total = 0.0;
    for (double c : counts) total += c;
    std::vector<double> p(counts.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = counts[i] / total;
    return p;
  }

  // Majority class of the reached leaf; the smallest index wins count ties.
  int predict(std::span<const double> x) const {
    const auto& counts = leaf_for(x).counts;
    int best = 0;
    for (int c = 1; c < static_cast<int>(counts.size()); ++c)
      if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)])
        best = c;
    return best;
  }

  // Indented rule list; feature_names (when given) must cover n_features.
  std::string render_rules(const std::vector<std::string>& feature_names = {}) const {
    if (!feature_names.empty() &&
        static_cast<int>(feature_names.size()) != n_features_)
      throw ValidationError("render_rules: got " +
                            std::to_string(feature_names.size()) +
                            " feature names, tree uses " +
                            std::to_string(n_features_));
    std::string out;
    render_node(0, 0, feature_names, out);
    return out;
  }

 private:
  int depth_below(int index) const {
    const Node& node = nodes_[static_cast<std::size_t>(index)];
    if (node.feature < 0) return 0;
    return 1 + std::max(depth_below(node.left), depth_below(node.right));
  }

  void render_node(int index, int indent,
                   const std::vector<std::string>& names,
                   std::string& out) const {
    const Node& node = nodes_[static_cast<std::size_t>(index)];
    const std::string pad(static_cast<std::size_t>(indent) * 4, ' ');
    if (node.feature < 0) {
      int best = 0;
      for (int c = 1; c < n_classes(); ++c)
        if (node.counts[static_cast<std::size_t>(c)] > node.counts[static_cast<std::size_t>(best)])
          best = c;
      out += pad + "predict " + class_names_[static_cast<std::size_t>(best)] + "  [";
      for (int c = 0; c < n_classes(); ++c) {
        if (c) out += ", ";
        out += class_names_[static_cast<std::size_t>(c)] + "=" +
               detail::format_g9(node.counts[static_cast<std::size_t>(c)]);
      }
      out += "]\n";
      return;
    }
    const std::string fname =
        names.empty() ? "x" + std::to_string(node.feature)
                      : names[static_cast<std::size_t>(node.feature)];
    out += pad + "if " + fname + " <= " + detail::format_g17(node.threshold) + ":\n";
    render_node(node.left, indent + 1, names, out);
    out += pad + "else:\n";
    render_node(node.right, indent + 1, names, out);
  }

  int n_features_ = 0;
  std::vector<std::string> class_names_;
  TreeConfig config_;
  std::vector<Node> nodes_;
};

namespace detail {

inline double gini(const std::vector<double>& counts, double total) {
  double g = 1.0;
  for (double c : counts) {
    const double p = c / total;
    g -= p * p;
  }
  return g;
}

// One fnv1a step; used to evolve the node path hash edge by edge.
inline std::uint64_t path_step(std::uint64_t h, unsigned char edge) {
  h ^= edge;
  h *= 0x100000001b3ull;
  return h;
}

}  // namespace detail

inline DecisionTree fit_tree(const Matrix& X, const std::vector<int>& y,
                             std::vector<std::string> class_names,
                             const TreeConfig& config) {
  const int n_classes = static_cast<int>(class_names.size());
  if (n_classes < 2)
    throw ValidationError("fit_tree: needs at least 2 class names");
  {
    std::set<std::string> unique(class_names.begin(), class_names.end());
    if (static_cast<int>(unique.size()) != n_classes)
      throw ValidationError("fit_tree: duplicate class names");
  }
  if (X.rows() == 0) throw ValidationError("fit_tree: no training rows");
  if (X.rows() != y.size())
    throw ValidationError("fit_tree: " + std::to_string(X.rows()) +
                          " rows vs " + std::to_string(y.size()) + " labels");
  if (X.cols() == 0) throw ValidationError("fit_tree: no features");
  for (int label : y)
    if (label < 0 || label >= n_classes)
      throw ValidationError("fit_tree: label " + std::to_string(label) +
                            " outside [0, " + std::to_string(n_classes) + ")");
  if (config.max_depth < 0)
    throw ValidationError("fit_tree: max_depth must be >= 0");

  const int n_features = static_cast<int>(X.cols());
  std::vector<DecisionTree::Node> nodes;

  struct Candidate {
    int feature;
    double threshold;
    double gain;
  };

  const auto build = [&](auto&& self, const std::vector<std::size_t>& rows,
                         int depth, std::uint64_t path) -> int {
    std::vector<double> counts(static_cast<std::size_t>(n_classes), 0.0);
    for (const auto r : rows) counts[static_cast<std::size_t>(y[r])] += 1.0;
    const double total = static_cast<double>(rows.size());

    const auto make_leaf = [&] {
      DecisionTree::Node leaf;
      leaf.counts = counts;
      nodes.push_back(std::move(leaf));
      return static_cast<int>(nodes.size()) - 1;
    };

    bool pure = false;
    for (int c = 0; c < n_classes; ++c)
      pure = pure || counts[static_cast<std::size_t>(c)] == total;
    if (pure || (config.max_depth > 0 && depth >= config.max_depth))
      return make_leaf();

    // Enumerate every midpoint split of every feature.
    std::vector<Candidate> candidates;
    std::vector<std::pair<double, int>> column(rows.size());
    std::vector<double> left_counts(static_cast<std::size_t>(n_classes));
    const double parent_gini = detail::gini(counts, total);
    for (int f = 0; f < n_features; ++f) {
      for (std::size_t i = 0; i < rows.size(); ++i)
        column[i] = {X(rows[i], static_cast<std::size_t>(f)), y[rows[i]]};
      std::sort(column.begin(), column.end());
      std::fill(left_counts.begin(), left_counts.end(), 0.0);
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        left_counts[static_cast<std::size_t>(column[i].second)] += 1.0;
        if (column[i].first == column[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = total - nl;
        double gl = 1.0, gr = 1.0;
        for (int c = 0; c < n_classes; ++c) {
          const double pl = left_counts[static_cast<std::size_t>(c)] / nl;
          const double pr = (counts[static_cast<std::size_t>(c)] -
                             left_counts[static_cast<std::size_t>(c)]) / nr;
          gl -= pl * pl;
          gr -= pr * pr;
        }
        const double gain =
            parent_gini - (nl / total) * gl - (nr / total) * gr;
        candidates.push_back(
            {f, 0.5 * (column[i].first + column[i + 1].first), gain});
      }
    }
    if (candidates.empty()) return make_leaf();

    double best_gain = candidates.front().gain;
    for (const auto& c : candidates) best_gain = std::max(best_gain, c.gain);
    std::vector<std::size_t> tied;
    for (std::size_t i = 0; i < candidates.size(); ++i)
      if (candidates[i].gain == best_gain) tied.push_back(i);

    std::size_t pick = tied.front();
    if (tied.size() > 1) {
      // Seeded by tree seed and root path only, so the draw is identical
      // across different depth caps.
      detail::Rng rng(detail::mix_seed(config.seed, {"node"}) ^ path);
      pick = tied[rng.bounded(tied.size())];
    }
    const Candidate chosen = candidates[pick];

    std::vector<std::size_t> left_rows, right_rows;
    for (const auto r : rows)
      (X(r, static_cast<std::size_t>(chosen.feature)) <= chosen.threshold
           ? left_rows
           : right_rows)
          .push_back(r);

    const int index = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[static_cast<std::size_t>(index)].feature = chosen.feature;
    nodes[static_cast<std::size_t>(index)].threshold = chosen.threshold;
    const int left =
        self(self, left_rows, depth + 1, detail::path_step(path, 'L'));
    const int right =
        self(self, right_rows, depth + 1, detail::path_step(path, 'R'));
    nodes[static_cast<std::size_t>(index)].left = left;
    nodes[static_cast<std::size_t>(index)].right = right;
    return index;
  };

  std::vector<std::size_t> all(X.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  build(build, all, 0, detail::fnv1a64("root"));
  return DecisionTree(n_features, std::move(class_names), config,
                      std::move(nodes));
}

// ---------------------------------------------------------------------------
// Depth tuning
// ---------------------------------------------------------------------------

struct DepthTuneRow {
  int max_depth;
  double train_accuracy;
  double dev_accuracy;
};

struct DepthTuneResult {
  int best_depth = 0;
  std::vector<DepthTuneRow> table;
};

inline std::vector<int> default_depth_grid() {
  std::vector<int> grid;
  for (int d = 2; d <= 12; ++d) grid.push_back(d);
  grid.push_back(0);  // unlimited
  return grid;
}

// Fits one tree per grid entry and keeps the depth with the best dev
// accuracy; the earliest grid entry wins ties, so smaller depths are
// preferred and unlimited (listed last by default) only wins outright.
inline DepthTuneResult tune_max_depth(const Matrix& X_train,
                                      const std::vector<int>& y_train,
                                      const Matrix& X_dev,
                                      const std::vector<int>& y_dev,
                                      const std::vector<std::string>& class_names,
                                      std::uint64_t seed,
                                      const std::vector<int>& grid = {}) {
  const std::vector<int> depths = grid.empty() ? default_depth_grid() : grid;
  if (X_dev.rows() != y_dev.size())
    throw ValidationError("tune_max_depth: dev rows vs labels mismatch");
  if (X_dev.rows() == 0) throw ValidationError("tune_max_depth: empty dev set");
  for (int d : depths)
    if (d < 0) throw ValidationError("tune_max_depth: negative depth in grid");

  DepthTuneResult result;
  double best_acc = -1.0;
  for (const int depth : depths) {
    TreeConfig cfg;
    cfg.max_depth = depth;
    cfg.seed = seed;
    const auto tree = fit_tree(X_train, y_train, class_names, cfg);
    const auto acc = [&](const Matrix& X, const std::vector<int>& y) {
      std::size_t hits = 0;
      for (std::size_t r = 0; r < X.rows(); ++r)
        hits += (tree.predict(X.row(r)) == y[r]);
      return static_cast<double>(hits) / static_cast<double>(X.rows());
    };
    const double train_acc = acc(X_train, y_train);
    const double dev_acc = acc(X_dev, y_dev);
    result.table.push_back({depth, train_acc, dev_acc});
    if (dev_acc > best_acc) {
      best_acc = dev_acc;
      result.best_depth = depth;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline void write_tree(const std::string& path, const DecisionTree& tree) {
  if (tree.num_nodes() == 0)
    throw ValidationError("write_tree: empty tree for " + path);
  auto out = detail::open_out(path);
  detail::ByteWriter w(out);
  w.bytes("PADT", 4);
  w.u32(kTreeFormatVersion);
  w.i32(tree.config().max_depth);
  w.u64(tree.config().seed);
  w.u32(static_cast<std::uint32_t>(tree.n_features()));
  w.u32(static_cast<std::uint32_t>(tree.n_classes()));
  for (const auto& name : tree.class_names()) w.str16(name);
  w.u32(static_cast<std::uint32_t>(tree.num_nodes()));
  for (const auto& node : tree.nodes()) {
    if (node.feature >= 0) {
      w.u8(1);
      w.u32(static_cast<std::uint32_t>(node.feature));
      w.f64(node.threshold);
      w.u32(static_cast<std::uint32_t>(node.left));
      w.u32(static_cast<std::uint32_t>(node.right));
    } else {
      w.u8(0);
      for (double c : node.counts) w.f64(c);
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

inline DecisionTree read_tree(const std::string& path) {
  auto in = detail::open_in(path);
  detail::ByteReader r(in, path);
  char magic[4];
  r.bytes(magic, 4);
  if (std::string_view(magic, 4) != "PADT")
    throw FormatError(path + ": not a decision tree file (bad magic)");
  const auto version = r.u32();
  if (version != kTreeFormatVersion)
    throw FormatError(path + ": unsupported format version " +
                      std::to_string(version));
  TreeConfig config;
  config.max_depth = r.i32();
  config.seed = r.u64();
  if (config.max_depth < 0)
    throw FormatError(path + ": negative max_depth");
  const auto n_features = r.u32();
  const auto n_classes = r.u32();
  if (n_features == 0 || n_features > 1u << 20 || n_classes < 2 ||
      n_classes > 1u << 16)
    throw FormatError(path + ": implausible feature or class count");
  std::vector<std::string> class_names;
  class_names.reserve(n_classes);
  for (std::uint32_t c = 0; c < n_classes; ++c)
    class_names.push_back(r.str16());
  const auto n_nodes = r.u32();
  if (n_nodes == 0 || n_nodes > 1u << 24)
    throw FormatError(path + ": implausible node count " +
                      std::to_string(n_nodes));
  std::vector<DecisionTree::Node> nodes;
  nodes.reserve(n_nodes);
  for (std::uint32_t i = 0; i < n_nodes; ++i) {
    DecisionTree::Node node;
    const auto kind = r.u8();
    if (kind == 1) {
      node.feature = static_cast<int>(r.u32());
      if (node.feature >= static_cast<int>(n_features))
        throw FormatError(path + ": node " + std::to_string(i) +
                          " splits on feature " + std::to_string(node.feature) +
                          " of " + std::to_string(n_features));
      node.threshold = r.f64();
      const auto left = r.u32();
      const auto right = r.u32();
      if (left >= n_nodes || right >= n_nodes)
        throw FormatError(path + ": node " + std::to_string(i) +
                          " references a child outside the node table");
      node.left = static_cast<int>(left);
      node.right = static_cast<int>(right);
    } else if (kind == 0) {
      node.counts.resize(n_classes);
      double total = 0.0;
      for (auto& c : node.counts) {
        c = r.f64();
        if (!(c >= 0.0) || !std::isfinite(c))
          throw FormatError(path + ": negative or non-finite leaf count");
        total += c;
      }
      if (total <= 0.0)
        throw FormatError(path + ": leaf node " + std::to_string(i) +
                          " holds no samples");
    } else {
      throw FormatError(path + ": unknown node kind " + std::to_string(kind));
    }
    nodes.push_back(std::move(node));
  }
  if (!r.at_eof()) throw FormatError(path + ": trailing bytes");

  // Structure check: walking from the root must visit every node once.
  std::vector<int> refs(n_nodes, 0);
  std::vector<int> stack{0};
  refs[0] = 1;
  while (!stack.empty()) {
    const int index = stack.back();
    stack.pop_back();
    const auto& node = nodes[static_cast<std::size_t>(index)];
    if (node.feature < 0) continue;
    for (const int child : {node.left, node.right}) {
      if (++refs[static_cast<std::size_t>(child)] > 1)
        throw FormatError(path + ": node " + std::to_string(child) +
                          " is referenced more than once");
      stack.push_back(child);
    }
  }
  for (std::uint32_t i = 0; i < n_nodes; ++i)
    if (refs[i] == 0)
      throw FormatError(path + ": node " + std::to_string(i) +
                        " is unreachable from the root");

  return DecisionTree(static_cast<int>(n_features), std::move(class_names),
                      config, std::move(nodes));
}

}  // namespace attribkit
