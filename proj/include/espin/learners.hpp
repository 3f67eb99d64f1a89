#pragma once

// Regression learners trained on recipe-transformed design matrices:
// linear, elastic net, k-nearest neighbours, regression tree, random forest
// and gradient-boosted trees.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "espin/core.hpp"
#include "espin/io.hpp"

namespace espin {

enum class LearnerKind { linear, elastic_net, knn, tree, random_forest, gbt };

inline constexpr std::array<LearnerKind, 6> kAllLearners = {LearnerKind::linear, LearnerKind::elastic_net,
                                                            LearnerKind::knn,    LearnerKind::tree,
                                                            LearnerKind::random_forest, LearnerKind::gbt};

inline std::string_view learner_name(LearnerKind k) {
  switch (k) {
    case LearnerKind::linear: return "linear";
    case LearnerKind::elastic_net: return "elastic_net";
    case LearnerKind::knn: return "knn";
    case LearnerKind::tree: return "tree";
    case LearnerKind::random_forest: return "random_forest";
    case LearnerKind::gbt: return "gbt";
  }
  return "?";
}

inline LearnerKind parse_learner(std::string_view s) {
  for (auto k : kAllLearners)
    if (learner_name(k) == s) return k;
  if (s == "lm") return LearnerKind::linear;
  if (s == "glmnet" || s == "enet") return LearnerKind::elastic_net;
  if (s == "rpart") return LearnerKind::tree;
  if (s == "rf") return LearnerKind::random_forest;
  if (s == "gbm" || s == "xgbTree" || s == "boosting") return LearnerKind::gbt;
  throw Error("unknown_learner", "unknown learner '" + std::string(s) + "'");
}

/// One hyperparameter setting, ordered by name.
using Params = std::map<std::string, double>;

inline std::string params_label(const Params& p) {
  std::string s;
  for (const auto& [k, v] : p) {
    if (!s.empty()) s += ",";
    s += k + "=" + format_double(v);
  }
  return s.empty() ? "default" : s;
}

inline double param(const Params& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

/// Compact default grid for a learner on p input columns.
inline std::vector<Params> default_grid(LearnerKind kind, std::size_t p) {
  switch (kind) {
    case LearnerKind::linear:
      return {Params{}};
    case LearnerKind::elastic_net:
      return {{{"alpha", 0.5}, {"lambda_ratio", 0.001}},
              {{"alpha", 0.5}, {"lambda_ratio", 0.01}},
              {{"alpha", 0.5}, {"lambda_ratio", 0.1}}};
    case LearnerKind::knn:
      return {{{"k", 5}}, {{"k", 7}}, {{"k", 9}}};
    case LearnerKind::tree:
      return {{{"max_depth", 4}, {"min_leaf", 5}}, {{"max_depth", 8}, {"min_leaf", 5}}, {{"max_depth", 12}, {"min_leaf", 5}}};
    case LearnerKind::random_forest: {
      const double dp = static_cast<double>(std::max<std::size_t>(p, 1));
      const double centre = std::round(std::sqrt(dp));
      std::vector<Params> g;
      for (double off : {-2.0, 0.0, 2.0}) {
        const double c = std::clamp(centre + off, 1.0, dp);
        Params q{{"mtry", c}, {"trees", 100}, {"min_leaf", 5}};
        if (std::find(g.begin(), g.end(), q) == g.end()) g.push_back(q);
      }
      return g;
    }
    case LearnerKind::gbt: {
      std::vector<Params> g;
      for (double rounds : {100.0, 200.0, 400.0})
        for (double depth : {2.0, 4.0, 6.0})
          for (double eta : {0.05, 0.1, 0.2})
            g.push_back({{"rounds", rounds}, {"max_depth", depth}, {"eta", eta}, {"min_leaf", 5}});
      return g;
    }
  }
  return {Params{}};
}

// ---------------------------------------------------------------------------
// Trees

struct TreeNode {
  int feature = -1;  ///< -1 for leaves
  double threshold = 0.0;  ///< go left when x <= threshold
  int left = -1;
  int right = -1;
  double value = 0.0;
  std::size_t count = 0;
};

struct Tree {
  std::vector<TreeNode> nodes;

  template <typename Row>
  double predict(const Row& x) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
      const auto& n = nodes[static_cast<std::size_t>(i)];
      i = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
  }

  std::size_t depth() const { return depth_from(0); }

  void serialize(io::Writer& w) const {
    w.size(nodes.size());
    for (const auto& n : nodes) {
      w.i64(n.feature);
      w.f64(n.threshold);
      w.i64(n.left);
      w.i64(n.right);
      w.f64(n.value);
      w.size(n.count);
    }
  }

  static Tree deserialize(io::Reader& r) {
    Tree t;
    t.nodes.resize(r.size());
    for (auto& n : t.nodes) {
      n.feature = static_cast<int>(r.i64());
      n.threshold = r.f64();
      n.left = static_cast<int>(r.i64());
      n.right = static_cast<int>(r.i64());
      n.value = r.f64();
      n.count = static_cast<std::size_t>(r.u64());
    }
    const auto N = static_cast<int>(t.nodes.size());
    for (const auto& n : t.nodes)
      if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= N || n.right >= N))
        throw Error("bundle_corrupt", "tree child index out of range");
    if (t.nodes.empty()) throw Error("bundle_corrupt", "empty tree");
    return t;
  }

 private:
  std::size_t depth_from(int i) const {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    if (n.feature < 0) return 0;
    return 1 + std::max(depth_from(n.left), depth_from(n.right));
  }
};

/// Per-feature binning of a training matrix. With at most `max_bins`
/// distinct values a feature is binned exactly, so split search is exact.
class BinnedMatrix {
 public:
  BinnedMatrix(const Eigen::MatrixXd& X, std::size_t max_bins = 256)
      : rows_(static_cast<std::size_t>(X.rows())), cols_(static_cast<std::size_t>(X.cols())) {
    bins_.resize(rows_ * cols_);
    thresholds_.resize(cols_);
    for (std::size_t j = 0; j < cols_; ++j) {
      std::vector<double> v(rows_);
      for (std::size_t i = 0; i < rows_; ++i) v[i] = X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      auto& th = thresholds_[j];
      if (v.size() <= max_bins) {
        for (std::size_t b = 0; b + 1 < v.size(); ++b) th.push_back(0.5 * (v[b] + v[b + 1]));
      } else {
        for (std::size_t b = 1; b < max_bins; ++b) {
          const std::size_t k = b * v.size() / max_bins;
          th.push_back(0.5 * (v[k - 1] + v[k]));
        }
        th.erase(std::unique(th.begin(), th.end()), th.end());
      }
      for (std::size_t i = 0; i < rows_; ++i) {
        const double x = X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        bins_[j * rows_ + i] = static_cast<std::uint16_t>(std::lower_bound(th.begin(), th.end(), x) - th.begin());
      }
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::uint16_t bin(std::size_t row, std::size_t col) const { return bins_[col * rows_ + row]; }
  std::size_t bin_count(std::size_t col) const { return thresholds_[col].size() + 1; }
  /// Split value between bin b and b+1.
  double threshold(std::size_t col, std::size_t b) const { return thresholds_[col][b]; }

 private:
  std::size_t rows_, cols_;
  std::vector<std::uint16_t> bins_;
  std::vector<std::vector<double>> thresholds_;
};

struct TreeParams {
  std::size_t max_depth = 6;
  std::size_t min_leaf = 5;
  std::size_t mtry = 0;  ///< features tried per split; 0 = all
};

/// Variance-reduction CART on binned features. `rows` may contain repeats
/// (bootstrap). Ties in gain keep the lowest feature index, then lowest threshold.
inline Tree grow_tree(const BinnedMatrix& B, const std::vector<double>& target, std::vector<std::size_t> rows,
                      const TreeParams& tp, Stream* rng = nullptr) {
  Tree tree;
  struct Job {
    int node;
    std::size_t begin, end, depth;
  };
  const std::size_t p = B.cols();
  const std::size_t min_leaf = std::max<std::size_t>(tp.min_leaf, 1);
  std::vector<Job> stack;
  tree.nodes.push_back({});
  stack.push_back({0, 0, rows.size(), 0});
  std::vector<double> hsum;
  std::vector<std::size_t> hcnt;
  std::vector<std::size_t> features(p);
  std::iota(features.begin(), features.end(), std::size_t{0});

  while (!stack.empty()) {
    const Job job = stack.back();
    stack.pop_back();
    const std::size_t n = job.end - job.begin;
    double sum = 0;
    for (std::size_t i = job.begin; i < job.end; ++i) sum += target[rows[i]];
    auto& node = tree.nodes[static_cast<std::size_t>(job.node)];
    node.value = n ? sum / static_cast<double>(n) : 0.0;
    node.count = n;
    if (job.depth >= tp.max_depth || n < 2 * min_leaf) continue;

    // mtry counts features that vary in the node; keep drawing until a split exists.
    const bool sampled = tp.mtry > 0 && tp.mtry < p && rng;
    std::vector<std::size_t> order = features;
    std::size_t varying = 0;

    const double parent = sum * sum / static_cast<double>(n);
    double best_gain = 1e-12 * std::max(1.0, std::fabs(parent));
    int best_f = -1;
    std::size_t best_b = 0;
    for (std::size_t k = 0; k < p; ++k) {
      if (sampled) {
        if (varying >= tp.mtry && best_f >= 0) break;
        std::swap(order[k], order[k + rng->below(p - k)]);
      }
      const std::size_t f = order[k];
      const std::size_t nb = B.bin_count(f);
      if (nb < 2) continue;
      hsum.assign(nb, 0.0);
      hcnt.assign(nb, 0);
      for (std::size_t i = job.begin; i < job.end; ++i) {
        const auto b = B.bin(rows[i], f);
        hsum[b] += target[rows[i]];
        ++hcnt[b];
      }
      if (std::count_if(hcnt.begin(), hcnt.end(), [](std::size_t c) { return c > 0; }) < 2) continue;
      ++varying;
      double ls = 0;
      std::size_t lc = 0;
      for (std::size_t b = 0; b + 1 < nb; ++b) {
        ls += hsum[b];
        lc += hcnt[b];
        if (lc < min_leaf) continue;
        const std::size_t rc = n - lc;
        if (rc < min_leaf) break;
        if (hcnt[b] == 0) continue;
        const double rs = sum - ls;
        const double gain = ls * ls / static_cast<double>(lc) + rs * rs / static_cast<double>(rc) - parent;
        if (gain > best_gain || (gain == best_gain && best_f >= 0 && f < static_cast<std::size_t>(best_f))) {
          best_gain = gain;
          best_f = static_cast<int>(f);
          best_b = b;
        }
      }
    }
    if (best_f < 0) continue;

    const auto fb = static_cast<std::size_t>(best_f);
    auto mid = std::stable_partition(rows.begin() + static_cast<std::ptrdiff_t>(job.begin),
                                     rows.begin() + static_cast<std::ptrdiff_t>(job.end),
                                     [&](std::size_t r) { return B.bin(r, fb) <= best_b; });
    const auto split = static_cast<std::size_t>(mid - rows.begin());
    const int left = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes.push_back({});
    auto& parent_node = tree.nodes[static_cast<std::size_t>(job.node)];
    parent_node.feature = best_f;
    parent_node.threshold = B.threshold(fb, best_b);
    parent_node.left = left;
    parent_node.right = left + 1;
    stack.push_back({left + 1, split, job.end, job.depth + 1});
    stack.push_back({left, job.begin, split, job.depth + 1});
  }
  return tree;
}

// ---------------------------------------------------------------------------
// Fitted states

struct LinearFit {
  double intercept = 0.0;
  Eigen::VectorXd coef;
};

struct KnnFit {
  std::size_t k = 7;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

struct TreeFit {
  Tree tree;
};

struct ForestFit {
  std::vector<Tree> trees;
};

struct BoostFit {
  double init = 0.0;
  double eta = 0.1;
  std::vector<Tree> trees;
  /// Mean squared training error after each round (index 0 = initial constant).
  std::vector<double> train_loss;
};

using FittedState = std::variant<LinearFit, KnnFit, TreeFit, ForestFit, BoostFit>;

/// A trained learner. Immutable after construction; predict is reentrant.
class Model {
 public:
  Model() = default;
  Model(LearnerKind kind, Params params, std::size_t n_features, FittedState state, std::vector<std::string> flags = {})
      : kind_(kind), params_(std::move(params)), n_features_(n_features), state_(std::move(state)), flags_(std::move(flags)) {}

  LearnerKind kind() const { return kind_; }
  const Params& params() const { return params_; }
  std::size_t n_features() const { return n_features_; }
  const FittedState& state() const { return state_; }
  const std::vector<std::string>& flags() const { return flags_; }
  std::string label() const { return std::string(learner_name(kind_)) + "[" + params_label(params_) + "]"; }

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const {
    if (static_cast<std::size_t>(X.cols()) != n_features_)
      throw Error("column_misalignment", "design matrix has " + std::to_string(X.cols()) + " columns, model expects " +
                                             std::to_string(n_features_));
    Eigen::VectorXd out(X.rows());
    std::visit([&](const auto& s) { predict_into(s, X, out); }, state_);
    return out;
  }

  void serialize(io::Writer& w) const {
    w.str(learner_name(kind_));
    w.size(params_.size());
    for (const auto& [k, v] : params_) {
      w.str(k);
      w.f64(v);
    }
    w.size(n_features_);
    w.strs(flags_);
    std::visit([&](const auto& s) { write_state(w, s); }, state_);
  }

  static Model deserialize(io::Reader& r) {
    Model m;
    m.kind_ = parse_learner(r.str());
    const auto np = r.size();
    for (std::size_t i = 0; i < np; ++i) {
      auto k = r.str();
      m.params_[k] = r.f64();
    }
    m.n_features_ = r.size();
    m.flags_ = r.strs();
    switch (m.kind_) {
      case LearnerKind::linear:
      case LearnerKind::elastic_net: {
        LinearFit f;
        f.intercept = r.f64();
        f.coef = r.vector();
        m.state_ = std::move(f);
        break;
      }
      case LearnerKind::knn: {
        KnnFit f;
        f.k = r.size();
        f.X = r.matrix();
        f.y = r.vector();
        m.state_ = std::move(f);
        break;
      }
      case LearnerKind::tree:
        m.state_ = TreeFit{Tree::deserialize(r)};
        break;
      case LearnerKind::random_forest: {
        ForestFit f;
        f.trees.resize(r.size());
        for (auto& t : f.trees) t = Tree::deserialize(r);
        m.state_ = std::move(f);
        break;
      }
      case LearnerKind::gbt: {
        BoostFit f;
        f.init = r.f64();
        f.eta = r.f64();
        f.trees.resize(r.size());
        for (auto& t : f.trees) t = Tree::deserialize(r);
        f.train_loss = r.f64s();
        m.state_ = std::move(f);
        break;
      }
    }
    return m;
  }

 private:
  static void predict_into(const LinearFit& f, const Eigen::MatrixXd& X, Eigen::VectorXd& out) {
    out = (X * f.coef).array() + f.intercept;
  }

  static void predict_into(const KnnFit& f, const Eigen::MatrixXd& X, Eigen::VectorXd& out) {
    const auto n = static_cast<std::size_t>(f.X.rows());
    const std::size_t k = std::min(f.k, n);
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (std::size_t j = 0; j < n; ++j)
        dist[j] = {(f.X.row(static_cast<Eigen::Index>(j)) - X.row(i)).squaredNorm(), j};
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
      double s = 0;
      for (std::size_t j = 0; j < k; ++j) s += f.y(static_cast<Eigen::Index>(dist[j].second));
      out(i) = s / static_cast<double>(k);
    }
  }

  static void predict_into(const TreeFit& f, const Eigen::MatrixXd& X, Eigen::VectorXd& out) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = f.tree.predict(X.row(i));
  }

  static void predict_into(const ForestFit& f, const Eigen::MatrixXd& X, Eigen::VectorXd& out) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      double s = 0;
      for (const auto& t : f.trees) s += t.predict(X.row(i));
      out(i) = s / static_cast<double>(f.trees.size());
    }
  }

  static void predict_into(const BoostFit& f, const Eigen::MatrixXd& X, Eigen::VectorXd& out) {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      double s = f.init;
      for (const auto& t : f.trees) s += f.eta * t.predict(X.row(i));
      out(i) = s;
    }
  }

  static void write_state(io::Writer& w, const LinearFit& f) {
    w.f64(f.intercept);
    w.vector(f.coef);
  }
  static void write_state(io::Writer& w, const KnnFit& f) {
    w.size(f.k);
    w.matrix(f.X);
    w.vector(f.y);
  }
  static void write_state(io::Writer& w, const TreeFit& f) { f.tree.serialize(w); }
  static void write_state(io::Writer& w, const ForestFit& f) {
    w.size(f.trees.size());
    for (const auto& t : f.trees) t.serialize(w);
  }
  static void write_state(io::Writer& w, const BoostFit& f) {
    w.f64(f.init);
    w.f64(f.eta);
    w.size(f.trees.size());
    for (const auto& t : f.trees) t.serialize(w);
    w.f64s(f.train_loss);
  }

  LearnerKind kind_ = LearnerKind::linear;
  Params params_;
  std::size_t n_features_ = 0;
  FittedState state_ = LinearFit{};
  std::vector<std::string> flags_;
};

// ---------------------------------------------------------------------------
// Training

namespace detail {

inline LinearFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<std::string>& flags) {
  Eigen::MatrixXd A(X.rows(), X.cols() + 1);
  A.col(0).setOnes();
  A.rightCols(X.cols()) = X;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A.rows(), A.cols());
  cod.setThreshold(1e-10);
  cod.compute(A);
  if (cod.rank() < A.cols()) flags.push_back("rank_deficient_min_norm");
  const Eigen::VectorXd beta = cod.solve(y);
  return {beta(0), beta.tail(X.cols())};
}

/// Coordinate descent for
///   (1/2n) |y - b0 - Xb|^2 + lambda * ((1-alpha)/2 |b|^2 + alpha |b|_1).
inline LinearFit fit_elastic_net(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha, double lambda,
                                 std::size_t max_sweeps = 10000, double tol = 1e-12) {
  const auto n = static_cast<double>(X.rows());
  const auto p = X.cols();
  LinearFit f;
  f.coef = Eigen::VectorXd::Zero(p);
  f.intercept = y.mean();
  Eigen::VectorXd resid = y.array() - f.intercept;
  Eigen::VectorXd sq(p);
  for (Eigen::Index j = 0; j < p; ++j) sq(j) = X.col(j).squaredNorm() / n;
  const double yscale = std::max(1.0, y.squaredNorm() / n);
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_change = 0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (sq(j) == 0) continue;
      const double old = f.coef(j);
      const double rho = X.col(j).dot(resid) / n + sq(j) * old;
      const double l1 = lambda * alpha;
      const double soft = rho > l1 ? rho - l1 : (rho < -l1 ? rho + l1 : 0.0);
      const double updated = soft / (sq(j) + lambda * (1 - alpha));
      if (updated != old) {
        resid.noalias() -= (updated - old) * X.col(j);
        f.coef(j) = updated;
        max_change = std::max(max_change, (updated - old) * (updated - old) * sq(j));
      }
    }
    const double shift = resid.mean();
    f.intercept += shift;
    resid.array() -= shift;
    max_change = std::max(max_change, shift * shift);
    if (max_change < tol * yscale) break;
  }
  return f;
}

}  // namespace detail

/// Fit one learner at one grid point.
inline Model train(LearnerKind kind, const Params& params, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   std::uint64_t seed) {
  if (X.rows() != y.size()) throw Error("shape_mismatch", "design rows and outcome length differ");
  if (X.rows() < 2) throw Error("too_few_rows", "need at least two training rows");
  if (!(y.maxCoeff() > y.minCoeff())) throw Error("zero_outcome_variance", "outcome has zero variance");
  const auto p = static_cast<std::size_t>(X.cols());
  std::vector<std::string> flags;

  switch (kind) {
    case LearnerKind::linear: {
      LinearFit f = detail::fit_ols(X, y, flags);
      return Model(kind, params, p, std::move(f), flags);
    }

    case LearnerKind::elastic_net: {
      const double alpha = param(params, "alpha", 0.5);
      double lambda = param(params, "lambda", -1.0);
      if (lambda < 0) {
        const Eigen::VectorXd yc = y.array() - y.mean();
        const double lmax = (X.transpose() * yc).cwiseAbs().maxCoeff() / (static_cast<double>(X.rows()) * std::max(alpha, 1e-3));
        lambda = param(params, "lambda_ratio", 0.01) * lmax;
      }
      return Model(kind, params, p, detail::fit_elastic_net(X, y, alpha, lambda), flags);
    }

    case LearnerKind::knn: {
      const auto k = static_cast<std::size_t>(param(params, "k", 7));
      if (k < 1) throw Error("invalid_param", "k must be >= 1");
      return Model(kind, params, p, KnnFit{k, X, y}, flags);
    }

    case LearnerKind::tree: {
      const BinnedMatrix B(X);
      std::vector<double> target(y.data(), y.data() + y.size());
      std::vector<std::size_t> rows(target.size());
      std::iota(rows.begin(), rows.end(), std::size_t{0});
      TreeParams tp{static_cast<std::size_t>(param(params, "max_depth", 6)),
                    static_cast<std::size_t>(param(params, "min_leaf", 5)), 0};
      return Model(kind, params, p, TreeFit{grow_tree(B, target, std::move(rows), tp)}, flags);
    }

    case LearnerKind::random_forest: {
      const BinnedMatrix B(X);
      std::vector<double> target(y.data(), y.data() + y.size());
      const auto ntree = static_cast<std::size_t>(param(params, "trees", 100));
      TreeParams tp{static_cast<std::size_t>(param(params, "max_depth", 40)),
                    static_cast<std::size_t>(param(params, "min_leaf", 5)),
                    static_cast<std::size_t>(param(params, "mtry", std::max(1.0, std::round(std::sqrt(static_cast<double>(p))))))};
      ForestFit f;
      f.trees.reserve(ntree);
      const std::size_t n = target.size();
      for (std::size_t t = 0; t < ntree; ++t) {
        Stream rng(seed, t);
        std::vector<std::size_t> rows(n);
        for (auto& r : rows) r = rng.below(n);
        std::sort(rows.begin(), rows.end());
        f.trees.push_back(grow_tree(B, target, std::move(rows), tp, &rng));
      }
      return Model(kind, params, p, std::move(f), flags);
    }

    case LearnerKind::gbt: {
      const BinnedMatrix B(X);
      const auto rounds = static_cast<std::size_t>(param(params, "rounds", 100));
      BoostFit f;
      f.eta = param(params, "eta", 0.1);
      f.init = y.mean();
      TreeParams tp{static_cast<std::size_t>(param(params, "max_depth", 3)),
                    static_cast<std::size_t>(param(params, "min_leaf", 5)), 0};
      const auto n = static_cast<std::size_t>(y.size());
      std::vector<double> pred(n, f.init), resid(n);
      std::vector<std::size_t> all(n);
      std::iota(all.begin(), all.end(), std::size_t{0});
      auto loss = [&] {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += (y(static_cast<Eigen::Index>(i)) - pred[i]) * (y(static_cast<Eigen::Index>(i)) - pred[i]);
        return s / static_cast<double>(n);
      };
      f.train_loss.push_back(loss());
      for (std::size_t r = 0; r < rounds; ++r) {
        for (std::size_t i = 0; i < n; ++i) resid[i] = y(static_cast<Eigen::Index>(i)) - pred[i];
        Tree t = grow_tree(B, resid, all, tp);
        for (std::size_t i = 0; i < n; ++i) pred[i] += f.eta * t.predict(X.row(static_cast<Eigen::Index>(i)));
        f.trees.push_back(std::move(t));
        f.train_loss.push_back(loss());
      }
      return Model(kind, params, p, std::move(f), flags);
    }
  }
  throw Error("unknown_learner", "unsupported learner");
}

/// First `rounds` trees of a boosted model; identical to training with that
/// many rounds, since boosting is sequential and deterministic.
inline Model truncate_boosting(const Model& m, std::size_t rounds) {
  const auto* f = std::get_if<BoostFit>(&m.state());
  if (!f) throw Error("not_boosted", "model is not gradient boosted");
  if (rounds > f->trees.size()) throw Error("invalid_param", "cannot extend a boosted model");
  BoostFit g{f->init, f->eta, {f->trees.begin(), f->trees.begin() + static_cast<std::ptrdiff_t>(rounds)},
             {f->train_loss.begin(), f->train_loss.begin() + static_cast<std::ptrdiff_t>(rounds + 1)}};
  Params p = m.params();
  p["rounds"] = static_cast<double>(rounds);
  return Model(m.kind(), p, m.n_features(), std::move(g), m.flags());
}

}  // namespace espin
