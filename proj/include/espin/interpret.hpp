#pragma once

// Model-agnostic interpretation: permutation importance, two-variable
// response grids, surrogate trees and residual diagnostics.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "json.hpp"

#include "espin/bundle.hpp"
#include "espin/dataset.hpp"
#include "espin/evaluation.hpp"
#include "espin/imc.hpp"
#include "espin/learners.hpp"
#include "espin/stats.hpp"

namespace espin {

// ---------------------------------------------------------------------------
// Permutation importance

struct ImportanceItem {
  std::string variable;
  double score = 0;     ///< mean RMSE increase, floored at 0
  double raw_mean = 0;  ///< mean RMSE increase before flooring
  double std_error = 0;
  std::size_t rank = 0;
};

struct ImportanceReport {
  std::vector<ImportanceItem> items;  ///< sorted by rank
  double baseline_rmse = 0;
  std::size_t repeats = 0;
  std::uint64_t seed = 0;

  const ImportanceItem& at(std::string_view name) const {
    for (const auto& i : items)
      if (i.variable == name) return i;
    throw Error("unknown_variable", "no importance for '" + std::string(name) + "'");
  }

  nlohmann::json to_json() const {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& i : items)
      a.push_back({{"variable", i.variable}, {"score", i.score}, {"raw_mean", i.raw_mean},
                   {"std_error", i.std_error}, {"rank", i.rank}});
    return {{"items", a}, {"baseline_rmse", baseline_rmse}, {"repeats", repeats}, {"seed", seed}};
  }
};

/// Input variables of the record schema, numerics first.
inline std::vector<std::string> input_variables() {
  std::vector<std::string> v;
  for (auto n : kNumNames) v.emplace_back(n);
  for (auto n : kCatNames) v.emplace_back(n);
  return v;
}

/// Each input variable is permuted across records (a categorical moves as a
/// whole, so all of its indicator columns shift together).
inline ImportanceReport permutation_importance(const Predictor& predict, std::span<const SpinRecord> rows,
                                               std::size_t repeats, std::uint64_t seed) {
  if (rows.size() < 2) throw Error("too_few_rows", "permutation importance needs at least two rows");
  if (repeats < 1) throw Error("repeats", "need at least one repeat");
  const Eigen::VectorXd y = outcome_vector(rows);
  auto rmse_of = [&](std::span<const SpinRecord> rs) {
    const Eigen::VectorXd p = predict(rs);
    return std::sqrt((p - y).squaredNorm() / static_cast<double>(y.size()));
  };
  ImportanceReport rep;
  rep.repeats = repeats;
  rep.seed = seed;
  rep.baseline_rmse = rmse_of(rows);

  std::vector<SpinRecord> work(rows.begin(), rows.end());
  for (const auto& var : input_variables()) {
    const auto num = find_numeric(var);
    const auto cat = find_categorical(var);
    std::vector<double> inc;
    for (std::size_t r = 0; r < repeats; ++r) {
      std::vector<std::size_t> perm(rows.size());
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      Stream rng(seed, stream_id(var) + r);
      rng.shuffle(perm);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (num) work[i].num[*num] = rows[perm[i]].num[*num];
        if (cat) work[i].cat[*cat] = rows[perm[i]].cat[*cat];
      }
      inc.push_back(rmse_of(work) - rep.baseline_rmse);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) work[i] = rows[i];
    ImportanceItem it;
    it.variable = var;
    it.raw_mean = stats::mean(inc);
    it.score = std::max(0.0, it.raw_mean);
    it.std_error = repeats > 1 ? stats::sd(inc) / std::sqrt(static_cast<double>(repeats)) : 0.0;
    rep.items.push_back(it);
  }
  std::sort(rep.items.begin(), rep.items.end(), [](const ImportanceItem& a, const ImportanceItem& b) {
    return a.score > b.score || (a.score == b.score && a.variable < b.variable);
  });
  for (std::size_t i = 0; i < rep.items.size(); ++i) rep.items[i].rank = i + 1;
  return rep;
}

inline ImportanceReport permutation_importance(const ModelBundle& b, std::span<const SpinRecord> rows,
                                               std::size_t repeats, std::uint64_t seed) {
  return permutation_importance([&](std::span<const SpinRecord> rs) { return b.predict(rs); }, rows, repeats, seed);
}

// ---------------------------------------------------------------------------
// Response grid

/// Median of each numeric input, most frequent level of each categorical
/// (ties to the lexically smaller level).
inline SpinRecord reference_record(std::span<const SpinRecord> rows) {
  SpinRecord ref;
  for (std::size_t v = 0; v < kNumVars; ++v) {
    std::vector<double> x;
    for (const auto& r : rows)
      if (std::isfinite(r.num[v])) x.push_back(r.num[v]);
    ref.num[v] = x.empty() ? kNaN : stats::median(x);
  }
  for (std::size_t c = 0; c < kCatVars; ++c) {
    std::map<std::string, std::size_t> cnt;
    for (const auto& r : rows) ++cnt[r.cat[c]];
    std::size_t best = 0;
    for (const auto& [level, n] : cnt)
      if (n > best) {
        best = n;
        ref.cat[c] = level;
      }
  }
  return ref;
}

struct ResponseGrid {
  std::string var_a, var_b;
  std::vector<double> grid_a, grid_b;
  SpinRecord fixed;
  Eigen::MatrixXd z;  ///< z(i, j) at (grid_a[i], grid_b[j])

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      std::vector<double> r(static_cast<std::size_t>(z.cols()));
      for (Eigen::Index j = 0; j < z.cols(); ++j) r[static_cast<std::size_t>(j)] = z(i, j);
      rows.push_back(r);
    }
    return {{"var_a", var_a}, {"var_b", var_b}, {"grid_a", grid_a}, {"grid_b", grid_b},
            {"fixed", detail::record_json(fixed)}, {"z", rows}};
  }
};

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

/// All records the grid evaluates, row-major over (a, b).
inline std::vector<SpinRecord> grid_records(const ResponseGrid& g, std::size_t ia, std::size_t ib) {
  std::vector<SpinRecord> out;
  out.reserve(g.grid_a.size() * g.grid_b.size());
  for (double a : g.grid_a)
    for (double b : g.grid_b) {
      SpinRecord r = g.fixed;
      r.num[ia] = a;
      r.num[ib] = b;
      out.push_back(std::move(r));
    }
  return out;
}

inline ResponseGrid response_grid(const Predictor& predict, std::string_view var_a, std::string_view var_b,
                                  std::size_t resolution, std::span<const SpinRecord> train_rows) {
  const auto ia = find_numeric(var_a), ib = find_numeric(var_b);
  if (!ia) throw Error("unknown_variable", "'" + std::string(var_a) + "' is not a numeric input");
  if (!ib) throw Error("unknown_variable", "'" + std::string(var_b) + "' is not a numeric input");
  if (*ia == *ib) throw Error("same_variable", "grid variables must differ");
  if (resolution < 2) throw Error("resolution", "resolution must be at least 2");
  if (train_rows.empty()) throw Error("empty_input", "need training rows for ranges");
  ResponseGrid g;
  g.var_a = std::string(var_a);
  g.var_b = std::string(var_b);
  g.fixed = reference_record(train_rows);
  g.fixed.fiber_diameter = kNaN;
  g.fixed.doi.clear();
  auto range = [&](std::size_t v) {
    double lo = kNaN, hi = kNaN;
    for (const auto& r : train_rows)
      if (std::isfinite(r.num[v])) {
        lo = std::isnan(lo) ? r.num[v] : std::min(lo, r.num[v]);
        hi = std::isnan(hi) ? r.num[v] : std::max(hi, r.num[v]);
      }
    if (std::isnan(lo)) throw Error("empty_range", "no observed values for '" + std::string(kNumNames[v]) + "'");
    return std::pair{lo, hi};
  };
  const auto [alo, ahi] = range(*ia);
  const auto [blo, bhi] = range(*ib);
  g.grid_a = linspace(alo, ahi, resolution);
  g.grid_b = linspace(blo, bhi, resolution);
  const auto recs = grid_records(g, *ia, *ib);
  const Eigen::VectorXd p = predict(recs);
  g.z.resize(static_cast<Eigen::Index>(resolution), static_cast<Eigen::Index>(resolution));
  for (std::size_t i = 0; i < resolution; ++i)
    for (std::size_t j = 0; j < resolution; ++j)
      g.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p(static_cast<Eigen::Index>(i * resolution + j));
  return g;
}

inline ResponseGrid response_grid(const ModelBundle& b, std::string_view var_a, std::string_view var_b,
                                  std::size_t resolution, std::span<const SpinRecord> train_rows) {
  return response_grid([&](std::span<const SpinRecord> rs) { return b.predict(rs); }, var_a, var_b, resolution,
                       train_rows);
}

// ---------------------------------------------------------------------------
// Surrogate tree

struct SurrogateTree {
  Tree tree;
  std::vector<std::string> features;
  std::optional<double> fidelity;  ///< R^2 of tree vs model predictions; empty when they are constant
  std::string rules;

  nlohmann::json to_json() const {
    return {{"fidelity", fidelity ? nlohmann::json(*fidelity) : nlohmann::json(nullptr)},
            {"fidelity_defined", fidelity.has_value()},
            {"depth", tree.depth()},
            {"leaves", std::count_if(tree.nodes.begin(), tree.nodes.end(), [](const TreeNode& n) { return n.feature < 0; })},
            {"rules", rules}};
  }
};

inline std::string render_tree(const Tree& t, const std::vector<std::string>& names) {
  std::string out;
  auto walk = [&](auto&& self, int i, std::size_t depth) -> void {
    const TreeNode& n = t.nodes[static_cast<std::size_t>(i)];
    const std::string pad(2 * depth, ' ');
    if (n.feature < 0) {
      out += pad + "predict " + format_fixed(n.value, 2) + " nm (n=" + std::to_string(n.count) + ")\n";
      return;
    }
    const std::string& f = names[static_cast<std::size_t>(n.feature)];
    out += pad + "if " + f + " <= " + format_double(round_sig(n.threshold, 6)) + ":\n";
    self(self, n.left, depth + 1);
    out += pad + "else:  # " + f + " > " + format_double(round_sig(n.threshold, 6)) + "\n";
    self(self, n.right, depth + 1);
  };
  walk(walk, 0, 0);
  return out;
}

/// Depth-limited CART fit to the model's predictions on raw-unit encoded inputs.
inline SurrogateTree surrogate_tree(const Recipe& recipe, const Eigen::VectorXd& model_pred,
                                    std::span<const SpinRecord> rows, std::size_t max_depth, std::size_t min_leaf = 5) {
  if (static_cast<std::size_t>(model_pred.size()) != rows.size())
    throw Error("length_mismatch", "one prediction per row required");
  SurrogateTree s;
  const Eigen::MatrixXd X = recipe.apply_unscaled(rows);
  for (const auto& c : recipe.columns()) s.features.push_back(c.name);
  const BinnedMatrix B(X);
  std::vector<double> target(model_pred.data(), model_pred.data() + model_pred.size());
  std::vector<std::size_t> idx(rows.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  s.tree = grow_tree(B, target, idx, TreeParams{max_depth, min_leaf, 0});
  Eigen::VectorXd fit(model_pred.size());
  for (Eigen::Index i = 0; i < X.rows(); ++i) fit(i) = s.tree.predict(X.row(i));
  const double mu = model_pred.mean();
  const double sst = (model_pred.array() - mu).square().sum();
  if (sst > 0) s.fidelity = 1.0 - (model_pred - fit).squaredNorm() / sst;
  s.rules = render_tree(s.tree, s.features);
  return s;
}

inline SurrogateTree surrogate_tree(const ModelBundle& b, std::span<const SpinRecord> rows, std::size_t max_depth) {
  return surrogate_tree(b.recipe, b.predict(rows), rows, max_depth);
}

// ---------------------------------------------------------------------------
// Residual diagnostics

struct DiagnosticThresholds {
  double trend_slope = 0.1;
  double variance_ratio = 2.0;
  double tail_se = 3.0;
  double tail_p = 0.01;  ///< lower extreme quantile checked (and 1 - tail_p)
};

struct ResidualDiagnostics {
  std::vector<std::pair<double, double>> observed_vs_predicted;  ///< (predicted, observed)
  std::vector<std::pair<double, double>> residuals_vs_fitted;    ///< (fitted, residual)
  std::vector<std::pair<double, double>> qq;                     ///< (theoretical, standardized sample)
  double trend_slope = 0;
  double variance_ratio = 1;
  double tail_deviation = 0;  ///< in theoretical standard errors
  bool trend = false, heteroscedastic = false, tail = false;
  std::vector<std::string> flags;  ///< human-readable annotations

  nlohmann::json to_json(bool with_series = true) const {
    nlohmann::json j{{"trend_slope", trend_slope}, {"variance_ratio", variance_ratio},
                     {"tail_deviation", tail_deviation}, {"trend", trend}, {"heteroscedastic", heteroscedastic},
                     {"tail", tail}, {"flags", flags}};
    if (with_series) {
      j["observed_vs_predicted"] = observed_vs_predicted;
      j["residuals_vs_fitted"] = residuals_vs_fitted;
      j["qq"] = qq;
    }
    return j;
  }
};

inline ResidualDiagnostics residual_diagnostics(std::span<const double> y, std::span<const double> yhat,
                                                const DiagnosticThresholds& th = {}) {
  if (y.size() != yhat.size()) throw Error("length_mismatch", "actuals and predictions differ in length");
  if (y.empty()) throw Error("empty_input", "diagnostics need at least one observation");
  const std::size_t n = y.size();
  ResidualDiagnostics d;
  std::vector<double> res(n);
  for (std::size_t i = 0; i < n; ++i) {
    res[i] = y[i] - yhat[i];
    d.observed_vs_predicted.emplace_back(yhat[i], y[i]);
    d.residuals_vs_fitted.emplace_back(yhat[i], res[i]);
  }

  // Trend: slope of standardized residuals on standardized fitted values.
  const double rm = stats::mean(res), fm = stats::mean(std::vector<double>(yhat.begin(), yhat.end()));
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (yhat[i] - fm) * (res[i] - rm);
    sxx += (yhat[i] - fm) * (yhat[i] - fm);
    syy += (res[i] - rm) * (res[i] - rm);
  }
  d.trend_slope = (sxx > 0 && syy > 0) ? sxy / std::sqrt(sxx * syy) : 0.0;

  // Heteroscedasticity: residual variance across the lower and upper halves of fitted values.
  if (n >= 4) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return yhat[a] < yhat[b]; });
    std::vector<double> lo, hi;
    for (std::size_t k = 0; k < n; ++k) (k < n / 2 ? lo : hi).push_back(res[order[k]]);
    const double vl = stats::sd(lo) * stats::sd(lo), vh = stats::sd(hi) * stats::sd(hi);
    if (vl == 0 && vh == 0)
      d.variance_ratio = 1.0;
    else if (vl == 0 || vh == 0)
      d.variance_ratio = std::numeric_limits<double>::infinity();
    else
      d.variance_ratio = std::max(vl / vh, vh / vl);
  }

  // Normal QQ and tail check on standardized residuals.
  const double s = n > 1 ? stats::sd(res) : 0.0;
  std::vector<double> z(n, 0.0);
  if (s > 0)
    for (std::size_t i = 0; i < n; ++i) z[i] = (res[i] - rm) / s;
  std::sort(z.begin(), z.end());
  const boost::math::normal_distribution<> N01;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    d.qq.emplace_back(boost::math::quantile(N01, p), z[i]);
  }
  if (s > 0 && n >= 3) {
    for (double p : {th.tail_p, 1.0 - th.tail_p}) {
      const double q = boost::math::quantile(N01, p);
      const double se = std::sqrt(p * (1 - p) / static_cast<double>(n)) / boost::math::pdf(N01, q);
      const double dev = std::fabs(stats::quantile_sorted(z, p) - q) / se;
      d.tail_deviation = std::max(d.tail_deviation, dev);
    }
  }

  d.trend = std::fabs(d.trend_slope) > th.trend_slope;
  d.heteroscedastic = d.variance_ratio > th.variance_ratio;
  d.tail = d.tail_deviation > th.tail_se;
  if (d.trend)
    d.flags.push_back("Residuals trend with fitted values (standardized slope " + format_fixed(d.trend_slope, 3) + ")");
  if (d.heteroscedastic)
    d.flags.push_back("Residual spread changes across fitted values (variance ratio " +
                      format_fixed(d.variance_ratio, 2) + ")");
  if (d.tail)
    d.flags.push_back("Residual tails depart from normality (" + format_fixed(d.tail_deviation, 1) +
                      " standard errors at the extreme quantiles)");
  if (d.flags.empty()) d.flags.push_back("No residual pattern detected");
  return d;
}

inline ResidualDiagnostics residual_diagnostics(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat,
                                                const DiagnosticThresholds& th = {}) {
  return residual_diagnostics(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())),
                              std::span<const double>(yhat.data(), static_cast<std::size_t>(yhat.size())), th);
}

}  // namespace espin
