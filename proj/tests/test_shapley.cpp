#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include "attribkit/shapley.hpp"

using namespace attribkit;

namespace {

// Independent value function: mean over background of f with the masked
// features taken from x and the rest from z.
template <typename F>
double subset_value(F&& f, std::span<const double> x, const Matrix& bg,
                    std::uint32_t mask) {
  std::vector<double> u(x.size());
  double acc = 0.0;
  for (std::size_t r = 0; r < bg.rows(); ++r) {
    for (std::size_t i = 0; i < x.size(); ++i)
      u[i] = (mask >> i & 1u) ? x[i] : bg(r, i);
    acc += f(std::span<const double>(u));
  }
  return acc / static_cast<double>(bg.rows());
}

// Oracle built on the other classic definition of the Shapley value: the
// marginal contribution averaged over all T! join orders.
template <typename F>
std::vector<double> permutation_shapley(F&& f, std::span<const double> x,
                                        const Matrix& bg) {
  const int T = static_cast<int>(x.size());
  std::vector<int> perm(static_cast<std::size_t>(T));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<long double> acc(static_cast<std::size_t>(T), 0.0L);
  long double n_perms = 0.0L;
  do {
    std::uint32_t mask = 0;
    for (const int k : perm) {
      const double before = subset_value(f, x, bg, mask);
      const double after = subset_value(f, x, bg, mask | (1u << k));
      acc[static_cast<std::size_t>(k)] += after - before;
      mask |= 1u << k;
    }
    n_perms += 1.0L;
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::vector<double> phi(static_cast<std::size_t>(T));
  for (int k = 0; k < T; ++k)
    phi[static_cast<std::size_t>(k)] =
        static_cast<double>(acc[static_cast<std::size_t>(k)] / n_perms);
  return phi;
}

struct TreeInstance {
  DecisionTree tree;
  std::vector<double> x;
  Matrix background;
};

TreeInstance random_tree_instance(detail::Rng& rng, int T, int n_classes,
                                  int max_depth) {
  const std::size_t n = 16 + rng.bounded(25);
  Matrix X(0, static_cast<std::size_t>(T));
  std::vector<int> y;
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<double> row(static_cast<std::size_t>(T));
    for (auto& v : row)
      v = rng.bounded(2) ? rng.uniform() : static_cast<double>(rng.bounded(3)) / 2.0;
    X.push_row(row);
    y.push_back(static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n_classes))));
  }
  std::vector<std::string> names;
  for (int c = 0; c < n_classes; ++c) names.push_back("c" + std::to_string(c));
  TreeConfig cfg;
  cfg.max_depth = max_depth;
  cfg.seed = rng.next();

  TreeInstance inst{fit_tree(X, y, names, cfg), {}, Matrix(0, static_cast<std::size_t>(T))};
  for (int i = 0; i < T; ++i) inst.x.push_back(rng.uniform());
  const std::size_t n_bg = 3 + rng.bounded(6);
  for (std::size_t r = 0; r < n_bg; ++r) {
    std::vector<double> row(static_cast<std::size_t>(T));
    for (auto& v : row) v = rng.uniform();
    inst.background.push_row(row);
  }
  return inst;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

const AttributeTaxonomy kTinyTax{{
    {"Vocoder", {"WaveNet", "Griffin-Lim"}},
    {"Prosody", {"HMM", "FF", "None"}},
}, {
    {"X1", {"WaveNet", "HMM"}},
    {"X2", {"Griffin-Lim", "FF"}},
}};

}  // namespace

TEST_CASE("pair weight table matches the factorial formula", "[shapley]") {
  for (int T = 1; T <= 16; ++T) {
    const auto W = detail::shapley_pair_weights(T);
    REQUIRE(W.size() == static_cast<std::size_t>(T));
    std::vector<long double> fact(static_cast<std::size_t>(T) + 2, 1.0L);
    for (std::size_t i = 1; i < fact.size(); ++i) fact[i] = fact[i - 1] * i;
    for (int b = 0; b < T; ++b) {
      REQUIRE(W[static_cast<std::size_t>(b)].size() == static_cast<std::size_t>(b) + 1);
      for (int a = 0; a <= b; ++a) {
        const long double exact = fact[static_cast<std::size_t>(a)] *
                                  fact[static_cast<std::size_t>(b - a)] /
                                  fact[static_cast<std::size_t>(b) + 1];
        REQUIRE_THAT(W[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)],
                     Catch::Matchers::WithinRel(static_cast<double>(exact), 1e-14));
      }
    }
  }
}

TEST_CASE("exact values match the permutation-average oracle", "[shapley]") {
  detail::Rng rng(321);
  for (int trial = 0; trial < 20; ++trial) {
    const int T = 1 + static_cast<int>(rng.bounded(5));
    std::vector<double> x(static_cast<std::size_t>(T));
    for (auto& v : x) v = rng.uniform();
    Matrix bg(0, static_cast<std::size_t>(T));
    const std::size_t n_bg = 1 + rng.bounded(5);
    for (std::size_t r = 0; r < n_bg; ++r) {
      std::vector<double> row(static_cast<std::size_t>(T));
      for (auto& v : row) v = rng.uniform();
      bg.push_row(row);
    }
    // A lumpy nonlinear scalar so subsets interact.
    std::vector<double> w(static_cast<std::size_t>(T));
    for (auto& v : w) v = rng.normal();
    const auto f = [&](std::span<const double> u) {
      double s = 0.0, p = 1.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        s += w[i] * u[i];
        p *= 0.5 + u[i];
      }
      return std::tanh(s) + 0.1 * p;
    };
    const auto got = shapley_exact(f, x, bg);
    const auto want = permutation_shapley(f, x, bg);
    for (int k = 0; k < T; ++k)
      REQUIRE_THAT(got[static_cast<std::size_t>(k)],
                   Catch::Matchers::WithinAbs(want[static_cast<std::size_t>(k)], 1e-12));
  }
}

TEST_CASE("stump values match hand enumeration", "[shapley]") {
  // Pure stump on feature 0 at threshold 0.5: left leaf is all class A,
  // right all class B. Query sits right, background one point per side.
  const Matrix X = Matrix::from_rows({{0.0}, {0.2}, {0.8}, {1.0}});
  const std::vector<int> y{0, 0, 1, 1};
  TreeConfig cfg;
  cfg.max_depth = 1;
  const auto tree = fit_tree(X, y, {"A", "B"}, cfg);
  REQUIRE(tree.nodes()[0].threshold == 0.5);

  const std::vector<double> x{1.0};
  const Matrix bg = Matrix::from_rows({{0.0}, {1.0}});
  // By hand: v({}) = (P(B|left) + P(B|right)) / 2 = 0.5, v({0}) = P(B|right)
  // = 1, and with T = 1 the single subset has weight 1, so phi = 0.5. This
  // equals 0.5 * (P(B|x) - P(B|other side)) from averaging the background.
  const double expect = 0.5 * (1.0 - 0.0);
  const auto f = [&](std::span<const double> u) {
    return tree.predict_dist(u)[1];
  };
  const auto exact = shapley_exact(f, x, bg);
  const auto viatree = shapley_tree(tree, 1, x, bg);
  REQUIRE(exact.size() == 1);
  CHECK_THAT(exact[0], Catch::Matchers::WithinAbs(expect, 1e-15));
  CHECK_THAT(viatree[0], Catch::Matchers::WithinAbs(expect, 1e-15));

  // Same stump embedded in a 2-feature space: enumerating the four subsets
  // by hand gives the same phi_0 and exactly zero for the unused feature.
  Matrix X2(0, 2);
  for (std::size_t r = 0; r < X.rows(); ++r) X2.push_row({X(r, 0), 7.0});
  const auto tree2 = fit_tree(X2, y, {"A", "B"}, cfg);
  const std::vector<double> x2{1.0, 3.0};
  const Matrix bg2 = Matrix::from_rows({{0.0, -1.0}, {1.0, 5.0}});
  const auto f2 = [&](std::span<const double> u) {
    return tree2.predict_dist(u)[1];
  };
  // v({}) = 0.5, v({0}) = 1, v({1}) = 0.5, v({0,1}) = 1; phi_0 =
  // 0.5*(v({0})-v({})) + 0.5*(v({0,1})-v({1})) = 0.5, phi_1 = 0.
  const auto exact2 = shapley_exact(f2, x2, bg2);
  const auto viatree2 = shapley_tree(tree2, 1, x2, bg2);
  CHECK_THAT(exact2[0], Catch::Matchers::WithinAbs(0.5, 1e-15));
  CHECK(exact2[1] == 0.0);
  CHECK_THAT(viatree2[0], Catch::Matchers::WithinAbs(0.5, 1e-15));
  CHECK(viatree2[1] == 0.0);
}

TEST_CASE("features outside every tree path get exactly zero", "[shapley]") {
  detail::Rng rng(99);
  Matrix X(0, 3);
  std::vector<int> y;
  for (int i = 0; i < 30; ++i) {
    // Only feature 0 carries the label; 1 and 2 are constant, so no split
    // can use them.
    const int c = static_cast<int>(rng.bounded(2));
    X.push_row({c + 0.1 * rng.uniform(), 4.0, -2.0});
    y.push_back(c);
  }
  const auto tree = fit_tree(X, y, {"n", "p"}, {});
  REQUIRE(tree.depth() >= 1);

  Matrix bg(0, 3);
  for (int r = 0; r < 6; ++r)
    bg.push_row({rng.uniform() * 2.0, rng.normal(), rng.normal()});
  const std::vector<double> x{0.4, 1.0, 2.0};
  const auto f = [&](std::span<const double> u) {
    return tree.predict_dist(u)[1];
  };
  const auto exact = shapley_exact(f, x, bg);
  const auto viatree = shapley_tree(tree, 1, x, bg);
  CHECK(exact[1] == 0.0);
  CHECK(exact[2] == 0.0);
  CHECK(viatree[1] == 0.0);
  CHECK(viatree[2] == 0.0);
  CHECK(exact[0] != 0.0);
}

TEST_CASE("duplicated columns earn equal values under both split orders",
          "[shapley]") {
  // Two hand-built trees computing the same symmetric function of features
  // 0 and 1, one splitting 0 first and the other 1 first.
  const auto make = [](int first, int second) {
    std::vector<DecisionTree::Node> nodes(7);
    nodes[0].feature = first;
    nodes[0].threshold = 0.5;
    nodes[0].left = 1;
    nodes[0].right = 2;
    for (const auto [parent, lo, hi] : {std::array<int, 3>{1, 3, 4},
                                        std::array<int, 3>{2, 5, 6}}) {
      nodes[static_cast<std::size_t>(parent)].feature = second;
      nodes[static_cast<std::size_t>(parent)].threshold = 0.5;
      nodes[static_cast<std::size_t>(parent)].left = lo;
      nodes[static_cast<std::size_t>(parent)].right = hi;
    }
    nodes[3].counts = {9.0, 1.0};   // both low
    nodes[4].counts = {5.0, 5.0};   // mixed, same value either order
    nodes[5].counts = {5.0, 5.0};
    nodes[6].counts = {1.0, 9.0};   // both high
    return DecisionTree(2, {"lo", "hi"}, {}, std::move(nodes));
  };
  const auto tree01 = make(0, 1);
  const auto tree10 = make(1, 0);

  const std::vector<double> x{0.7, 0.7};
  const Matrix bg = Matrix::from_rows({{0.2, 0.2}, {0.8, 0.8}, {0.4, 0.4}});
  const auto a = shapley_tree(tree01, 1, x, bg);
  const auto b = shapley_tree(tree10, 1, x, bg);
  CHECK_THAT(a[0], Catch::Matchers::WithinAbs(a[1], 1e-9));
  CHECK_THAT(b[0], Catch::Matchers::WithinAbs(b[1], 1e-9));
  CHECK_THAT(a[0], Catch::Matchers::WithinAbs(b[0], 1e-9));
  CHECK_THAT(a[1], Catch::Matchers::WithinAbs(b[1], 1e-9));

  // The black-box route sees any symmetric f the same way.
  detail::Rng rng(55);
  const auto f = [](std::span<const double> u) {
    return std::tanh(u[0] + u[1]) + (u[0] > 0.5) * (u[1] > 0.5) * 0.25;
  };
  for (int trial = 0; trial < 10; ++trial) {
    const double q = rng.uniform();
    std::vector<double> xq{q, q};
    Matrix bgq(0, 2);
    for (int r = 0; r < 5; ++r) {
      const double z = rng.uniform();
      bgq.push_row({z, z});
    }
    const auto phi = shapley_exact(f, xq, bgq);
    REQUIRE_THAT(phi[0], Catch::Matchers::WithinAbs(phi[1], 1e-12));
  }
}

TEST_CASE("tree route equals exact route on random instances", "[shapley]") {
  detail::Rng rng(2024);
  int nontrivial = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int T = 1 + static_cast<int>(rng.bounded(12));
    const int n_classes = 2 + static_cast<int>(rng.bounded(2));
    const int depth = 1 + static_cast<int>(rng.bounded(4));
    const auto inst = random_tree_instance(rng, T, n_classes, depth);
    const int target = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n_classes)));
    const auto f = [&](std::span<const double> u) {
      return inst.tree.predict_dist(u)[static_cast<std::size_t>(target)];
    };
    const auto exact = shapley_exact(f, inst.x, inst.background);
    const auto viatree = shapley_tree(inst.tree, target, inst.x, inst.background);
    REQUIRE(exact.size() == viatree.size());
    for (std::size_t k = 0; k < exact.size(); ++k)
      REQUIRE_THAT(viatree[k], Catch::Matchers::WithinAbs(exact[k], 1e-9));
    nontrivial += inst.tree.depth() > 0;
  }
  CHECK(nontrivial >= 40);
}

TEST_CASE("values sum to the gap between query and base", "[shapley]") {
  detail::Rng rng(777);
  for (int trial = 0; trial < 200; ++trial) {
    const int T = 1 + static_cast<int>(rng.bounded(8));
    const auto inst = random_tree_instance(rng, T, 2, 3);
    const auto f = [&](std::span<const double> u) {
      return inst.tree.predict_dist(u)[1];
    };
    const auto phi = shapley_tree(inst.tree, 1, inst.x, inst.background);
    const double total = std::accumulate(phi.begin(), phi.end(), 0.0);
    const double gap = f(inst.x) - interventional_base(f, inst.background);
    REQUIRE_THAT(total, Catch::Matchers::WithinAbs(gap, 1e-9));
  }
}

TEST_CASE("a single-leaf tree assigns zero to every feature", "[shapley]") {
  const Matrix X = Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
  const auto tree = fit_tree(X, {1, 1}, {"a", "b"}, {});
  REQUIRE(tree.num_nodes() == 1);
  const Matrix bg = Matrix::from_rows({{0.0, 0.0}, {9.0, 9.0}});
  const auto viatree = shapley_tree(tree, 1, std::vector<double>{5.0, 5.0}, bg);
  CHECK(viatree == std::vector<double>{0.0, 0.0});
  const auto f = [&](std::span<const double> u) {
    return tree.predict_dist(u)[1];
  };
  const auto exact = shapley_exact(f, std::vector<double>{5.0, 5.0}, bg);
  CHECK(exact == std::vector<double>{0.0, 0.0});
}

TEST_CASE("input validation", "[shapley]") {
  const auto f = [](std::span<const double>) { return 0.0; };
  const Matrix bg1 = Matrix::from_rows({{0.0}});
  CHECK_THROWS_AS(shapley_exact(f, std::vector<double>(21, 0.0), Matrix(0, 21)),
                  ValidationError);
  CHECK_THROWS_AS(shapley_exact(f, std::vector<double>{}, bg1), ValidationError);
  CHECK_THROWS_AS(shapley_exact(f, std::vector<double>{1.0}, Matrix(0, 1)),
                  ValidationError);
  CHECK_THROWS_AS(shapley_exact(f, std::vector<double>{1.0, 2.0}, bg1),
                  ValidationError);
  CHECK_THROWS_AS(interventional_base(f, Matrix(0, 3)), ValidationError);

  const Matrix X = Matrix::from_rows({{0.0}, {1.0}});
  const auto tree = fit_tree(X, {0, 1}, {"a", "b"}, {});
  CHECK_THROWS_AS(shapley_tree(tree, 2, std::vector<double>{0.5}, bg1),
                  ValidationError);
  CHECK_THROWS_AS(shapley_tree(tree, -1, std::vector<double>{0.5}, bg1),
                  ValidationError);
  CHECK_THROWS_AS(shapley_tree(tree, 0, std::vector<double>{0.5, 0.5}, bg1),
                  ValidationError);
  CHECK_THROWS_AS(shapley_tree(tree, 0, std::vector<double>{0.5}, Matrix(0, 1)),
                  ValidationError);
}

namespace {

// Train/dev pairs where one attribute dimension alone fixes the class.
void make_attr_data(detail::Rng& rng, std::size_t n, std::size_t deciding,
                    Matrix& X, std::vector<int>& y) {
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(5);
    for (auto& v : row) v = rng.uniform();
    const int c = static_cast<int>(rng.bounded(2));
    row[deciding] = c ? 0.75 + 0.2 * rng.uniform() : 0.25 * rng.uniform();
    X.push_row(row);
    y.push_back(c);
  }
}

}  // namespace

TEST_CASE("importance report ranks the deciding attribute first", "[shapley]") {
  detail::Rng rng(31337);
  Matrix X_train(0, 5), X_dev(0, 5);
  std::vector<int> y_train, y_dev;
  make_attr_data(rng, 60, 3, X_train, y_train);
  make_attr_data(rng, 30, 3, X_dev, y_dev);

  const auto report = importance_report(X_train, y_train, X_dev, {"n", "p"},
                                        kTinyTax, 3, 5, 42, 1);
  REQUIRE(report.attributes.size() == 5);
  CHECK(report.attributes ==
        std::vector<std::string>{"WaveNet", "Griffin-Lim", "HMM", "FF", "None"});
  CHECK(report.sets == std::vector<std::string>{"Vocoder", "Vocoder", "Prosody",
                                                "Prosody", "Prosody"});
  CHECK(report.rank[3] == 1);
  CHECK(report.mean_abs[3] > 0.2);
  REQUIRE(report.runs.size() == 5);
  for (const auto& run : report.runs) {
    REQUIRE(run.mean_abs.size() == 5);
    CHECK(run.base_value > 0.0);
    CHECK(run.base_value < 1.0);
  }
  // Distinct per-run tree seeds.
  for (std::size_t i = 0; i < report.runs.size(); ++i)
    for (std::size_t j = i + 1; j < report.runs.size(); ++j)
      CHECK(report.runs[i].tree_seed != report.runs[j].tree_seed);
  // The average of the retained per-run values is the headline number.
  for (std::size_t k = 0; k < 5; ++k) {
    double mean = 0.0;
    for (const auto& run : report.runs) mean += run.mean_abs[k];
    CHECK_THAT(report.mean_abs[k],
               Catch::Matchers::WithinAbs(mean / 5.0, 1e-15));
  }
  // Ranks are a permutation of 1..T ordered by mean_abs.
  std::vector<int> sorted_ranks = report.rank;
  std::sort(sorted_ranks.begin(), sorted_ranks.end());
  CHECK(sorted_ranks == std::vector<int>{1, 2, 3, 4, 5});
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t b = 0; b < 5; ++b)
      if (report.mean_abs[a] > report.mean_abs[b])
        CHECK(report.rank[a] < report.rank[b]);

  const auto again = importance_report(X_train, y_train, X_dev, {"n", "p"},
                                       kTinyTax, 3, 5, 42, 1);
  CHECK(again.mean_abs == report.mean_abs);
  CHECK(again.rank == report.rank);
}

TEST_CASE("single-run report equals a direct computation", "[shapley]") {
  detail::Rng rng(606);
  Matrix X_train(0, 5), X_dev(0, 5);
  std::vector<int> y_train, y_dev;
  make_attr_data(rng, 40, 1, X_train, y_train);
  make_attr_data(rng, 20, 1, X_dev, y_dev);

  const auto report = importance_report(X_train, y_train, X_dev, {"n", "p"},
                                        kTinyTax, 2, 1, 9, kPredictedClass);
  REQUIRE(report.runs.size() == 1);

  TreeConfig cfg;
  cfg.max_depth = 2;
  cfg.seed = detail::mix_seed(9, {"tree", "0"});
  CHECK(report.runs[0].tree_seed == cfg.seed);
  const auto tree = fit_tree(X_train, y_train, {"n", "p"}, cfg);
  std::vector<double> want(5, 0.0);
  double want_base = 0.0;
  for (std::size_t q = 0; q < X_dev.rows(); ++q) {
    const auto x = X_dev.row(q);
    const int target = tree.predict(x);
    const auto phi = shapley_tree(tree, target, x, X_dev);
    for (std::size_t k = 0; k < 5; ++k) want[k] += std::abs(phi[k]);
    want_base += interventional_base(
        [&](std::span<const double> z) {
          return tree.predict_dist(z)[static_cast<std::size_t>(target)];
        },
        X_dev);
  }
  for (auto& w : want) w /= static_cast<double>(X_dev.rows());
  want_base /= static_cast<double>(X_dev.rows());
  for (std::size_t k = 0; k < 5; ++k)
    CHECK_THAT(report.mean_abs[k], Catch::Matchers::WithinAbs(want[k], 1e-15));
  CHECK_THAT(report.runs[0].base_value,
             Catch::Matchers::WithinAbs(want_base, 1e-15));
}

TEST_CASE("report files", "[shapley]") {
  detail::Rng rng(515);
  Matrix X_train(0, 5), X_dev(0, 5);
  std::vector<int> y_train, y_dev;
  make_attr_data(rng, 40, 4, X_train, y_train);
  make_attr_data(rng, 20, 4, X_dev, y_dev);
  const auto report = importance_report(X_train, y_train, X_dev, {"n", "p"},
                                        kTinyTax, 2, 2, 5, 1);

  write_shapley_report("scratch_shap.csv", report);
  const auto table = lines_of(slurp("scratch_shap.csv"));
  REQUIRE(table.size() == 6);
  CHECK(table[0] == "attribute,set,mean_abs_shapley,rank");
  CHECK(table[1].substr(0, 16) == "WaveNet,Vocoder,");
  CHECK(table[5].substr(0, 13) == "None,Prosody,");

  write_shapley_bars("scratch_bars.csv", report);
  const auto bars = lines_of(slurp("scratch_bars.csv"));
  REQUIRE(bars.size() == 6);
  CHECK(bars[0] == "rank,attribute,set,mean_abs_shapley");
  // Rows come out in rank order 1..T.
  for (std::size_t i = 1; i < bars.size(); ++i)
    CHECK(bars[i].substr(0, 2) == std::to_string(i) + ",");
  CHECK(bars[1].find("None,Prosody") != std::string::npos);

  write_shapley_report("scratch_shap2.csv", report);
  CHECK(slurp("scratch_shap.csv") == slurp("scratch_shap2.csv"));
}

TEST_CASE("report validation", "[shapley]") {
  Matrix X(0, 5), Xd(0, 5);
  std::vector<int> y, yd;
  detail::Rng rng(2);
  make_attr_data(rng, 20, 0, X, y);
  make_attr_data(rng, 10, 0, Xd, yd);
  CHECK_THROWS_AS(importance_report(X, y, Xd, {"n", "p"}, kTinyTax, 2, 0, 1, 1),
                  ValidationError);
  CHECK_THROWS_AS(importance_report(X, y, Matrix(0, 5), {"n", "p"}, kTinyTax,
                                    2, 1, 1, 1),
                  ValidationError);
  CHECK_THROWS_AS(importance_report(X, y, Xd, {"n", "p"}, kTinyTax, 2, 1, 1, 7),
                  ValidationError);
  Matrix X4(0, 4), Xd4(0, 4);
  for (std::size_t r = 0; r < X.rows(); ++r) {
    auto row = X.row(r);
    X4.push_row(std::vector<double>(row.begin(), row.end() - 1));
  }
  for (std::size_t r = 0; r < Xd.rows(); ++r) {
    auto row = Xd.row(r);
    Xd4.push_row(std::vector<double>(row.begin(), row.end() - 1));
  }
  CHECK_THROWS_AS(importance_report(X4, y, Xd4, {"n", "p"}, kTinyTax, 2, 1, 1, 1),
                  ValidationError);
}
