#pragma once

// Hold-out splitting, k-fold cross-validation, error metrics and
// best-model selection.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "espin/csv.hpp"
#include "espin/dataset.hpp"
#include "espin/learners.hpp"
#include "espin/pipeline.hpp"

namespace espin {

struct MetricSet {
  double rmse = kNaN;
  double mae = kNaN;
  double mape = kNaN;  ///< percent
  std::optional<double> r2;  ///< empty when the actuals have zero variance
  std::size_t n = 0;
  std::size_t mape_skipped = 0;  ///< terms with y == 0

  nlohmann::json to_json() const {
    nlohmann::json j{{"rmse", rmse}, {"mae", mae}, {"mape", mape}, {"n", n}, {"mape_skipped", mape_skipped}};
    j["r2"] = r2 ? nlohmann::json(*r2) : nlohmann::json(nullptr);
    return j;
  }

  static MetricSet from_json(const nlohmann::json& j) {
    MetricSet m;
    auto num = [](const nlohmann::json& v) { return v.is_null() ? kNaN : v.get<double>(); };
    m.rmse = num(j.at("rmse"));
    m.mae = num(j.at("mae"));
    m.mape = num(j.at("mape"));
    m.n = j.at("n").get<std::size_t>();
    m.mape_skipped = j.value("mape_skipped", std::size_t{0});
    if (!j.at("r2").is_null()) m.r2 = j.at("r2").get<double>();
    return m;
  }
};

inline MetricSet compute_metrics(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) throw Error("length_mismatch", "actuals and predictions differ in length");
  if (y.empty()) throw Error("empty_input", "metrics need at least one observation");
  MetricSet m;
  m.n = y.size();
  const double n = static_cast<double>(y.size());
  double ybar = 0;
  for (double v : y) ybar += v;
  ybar /= n;
  double sse = 0, sae = 0, sst = 0, ape = 0;
  std::size_t ape_n = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = y[i] - yhat[i];
    sse += e * e;
    sae += std::fabs(e);
    sst += (y[i] - ybar) * (y[i] - ybar);
    if (y[i] == 0.0) {
      ++m.mape_skipped;
    } else {
      ape += std::fabs(e / y[i]);
      ++ape_n;
    }
  }
  m.rmse = std::sqrt(sse / n);
  m.mae = sae / n;
  m.mape = ape_n ? 100.0 * ape / static_cast<double>(ape_n) : kNaN;
  if (sst > 0) m.r2 = 1.0 - sse / sst;
  return m;
}

inline MetricSet compute_metrics(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  return compute_metrics(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())),
                         std::span<const double>(yhat.data(), static_cast<std::size_t>(yhat.size())));
}

// ---------------------------------------------------------------------------
// Splits and folds

struct SplitResult {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::vector<std::string> warnings;
};

/// Stratified hold-out split: each polymer contributes round(fraction * size)
/// rows to the test side. Singleton strata stay in train.
inline SplitResult split(std::span<const SpinRecord> rows, double test_fraction, std::uint64_t seed,
                         bool stratify = true) {
  if (!(test_fraction >= 0.10 - 1e-12 && test_fraction <= 0.40 + 1e-12))
    throw Error("test_fraction", "test fraction must lie in [0.10, 0.40]");
  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < rows.size(); ++i) strata[stratify ? rows[i].polymer() : std::string()].push_back(i);
  SplitResult out;
  for (auto& [name, members] : strata) {
    if (members.size() == 1) {
      out.train.push_back(members[0]);
      out.warnings.push_back("stratum '" + name + "' has one row; kept in train");
      continue;
    }
    Stream rng(seed, stream_id("split:" + name));
    rng.shuffle(members);
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(members.size())));
    out.test.insert(out.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    out.train.insert(out.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

/// Fold id per row. Rows are shuffled within polymer strata, strata are
/// concatenated by name, and row i of that order goes to fold i mod k.
inline std::vector<std::size_t> make_folds(std::span<const SpinRecord> rows, std::size_t k, std::uint64_t seed,
                                           bool stratify = true) {
  if (k < 2 || k > rows.size())
    throw Error("fold_count", "fold count " + std::to_string(k) + " invalid for " + std::to_string(rows.size()) + " rows");
  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < rows.size(); ++i) strata[stratify ? rows[i].polymer() : std::string()].push_back(i);
  std::vector<std::size_t> order;
  for (auto& [name, members] : strata) {
    Stream rng(seed, stream_id("folds:" + name));
    rng.shuffle(members);
    order.insert(order.end(), members.begin(), members.end());
  }
  std::vector<std::size_t> fold(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) fold[order[i]] = i % k;
  return fold;
}

// ---------------------------------------------------------------------------
// Cross-validation

inline Eigen::VectorXd outcome_vector(std::span<const SpinRecord> rows) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = rows[i].fiber_diameter;
  return y;
}

inline std::vector<SpinRecord> take_rows(std::span<const SpinRecord> rows, std::span<const std::size_t> idx) {
  std::vector<SpinRecord> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(rows[i]);
  return out;
}

struct GridResult {
  Params params;
  MetricSet cv;
  /// Out-of-fold prediction per training row (NaN for rows of skipped folds).
  std::vector<double> oof;
};

struct CvResult {
  LearnerKind kind = LearnerKind::linear;
  std::size_t folds = 0;
  std::vector<GridResult> grid;
  std::size_t best = 0;  ///< index into grid, minimum cv RMSE
  std::vector<std::string> warnings;
};

struct CvOptions {
  std::size_t folds = 5;
  RecipeConfig recipe{};
  std::uint64_t seed = 0;
  bool stratify = true;
};

inline CvResult cross_validate(LearnerKind kind, const std::vector<Params>& grid, std::span<const SpinRecord> train_rows,
                               const CvOptions& opt) {
  if (grid.empty()) throw Error("empty_grid", "no hyperparameter settings");
  CvResult res;
  res.kind = kind;
  res.folds = opt.folds;
  const auto fold = make_folds(train_rows, opt.folds, opt.seed, opt.stratify);
  for (const auto& g : grid) res.grid.push_back({g, {}, std::vector<double>(train_rows.size(), kNaN)});

  for (std::size_t f = 0; f < opt.folds; ++f) {
    std::vector<std::size_t> in, out;
    for (std::size_t i = 0; i < train_rows.size(); ++i) (fold[i] == f ? out : in).push_back(i);
    const auto in_rows = take_rows(train_rows, in);
    const auto out_rows = take_rows(train_rows, out);
    const Eigen::VectorXd y_in = outcome_vector(in_rows);
    if (!(y_in.maxCoeff() > y_in.minCoeff())) {
      res.warnings.push_back("fold " + std::to_string(f) + " skipped: zero outcome variance");
      continue;
    }
    const Recipe recipe = Recipe::fit(in_rows, opt.recipe);
    const Eigen::MatrixXd X_in = recipe.apply(in_rows);
    const Eigen::MatrixXd X_out = recipe.apply(out_rows);
    const std::uint64_t fold_seed = splitmix64(opt.seed ^ (f + 1) * 0x9e37ULL);
    std::map<Params, Model> boosted;  // grid point without "rounds" -> longest fit
    if (kind == LearnerKind::gbt) {
      std::map<Params, double> longest;
      for (const auto& g : grid) {
        Params key = g;
        key.erase("rounds");
        longest[key] = std::max(longest[key], param(g, "rounds", 100));
      }
      for (const auto& [key, rounds] : longest) {
        Params full = key;
        full["rounds"] = rounds;
        boosted.emplace(key, train(kind, full, X_in, y_in, fold_seed));
      }
    }
    for (std::size_t g = 0; g < grid.size(); ++g) {
      Model m;
      if (kind == LearnerKind::gbt) {
        Params key = grid[g];
        key.erase("rounds");
        m = truncate_boosting(boosted.at(key), static_cast<std::size_t>(param(grid[g], "rounds", 100)));
      } else {
        m = train(kind, grid[g], X_in, y_in, fold_seed);
      }
      const Eigen::VectorXd pred = m.predict(X_out);
      for (std::size_t j = 0; j < out.size(); ++j) res.grid[g].oof[out[j]] = pred(static_cast<Eigen::Index>(j));
    }
  }

  for (auto& g : res.grid) {
    std::vector<double> y, p;
    for (std::size_t i = 0; i < train_rows.size(); ++i)
      if (!std::isnan(g.oof[i])) {
        y.push_back(train_rows[i].fiber_diameter);
        p.push_back(g.oof[i]);
      }
    if (y.empty()) throw Error("cv_failed", "every fold was skipped");
    g.cv = compute_metrics(y, p);
  }
  for (std::size_t g = 1; g < res.grid.size(); ++g)
    if (res.grid[g].cv.rmse < res.grid[res.best].cv.rmse) res.best = g;
  return res;
}

// ---------------------------------------------------------------------------
// Benchmark report

struct EvalEntry {
  std::string id;  ///< learner label, unique within a report
  std::string sampling;
  LearnerKind kind = LearnerKind::linear;
  Params params;
  MetricSet cv;
  std::optional<MetricSet> test;
  std::vector<double> oof;
  std::vector<GridResult> grid;

  /// test - cv per metric (NaN when test metrics are unavailable).
  std::map<std::string, double> deltas() const {
    std::map<std::string, double> d;
    const double nan = kNaN;
    d["rmse"] = test ? test->rmse - cv.rmse : nan;
    d["mae"] = test ? test->mae - cv.mae : nan;
    d["mape"] = test ? test->mape - cv.mape : nan;
    d["r2"] = (test && test->r2 && cv.r2) ? *test->r2 - *cv.r2 : nan;
    return d;
  }
};

struct EvalReport {
  std::vector<EvalEntry> entries;
  std::size_t folds = 0;
  double test_fraction = 0.0;
  std::string best_id;
  std::string selection_rule;

  const EvalEntry& entry(const std::string& id) const {
    for (const auto& e : entries)
      if (e.id == id) return e;
    throw Error("unknown_model", "no entry '" + id + "'");
  }

  nlohmann::json to_json(bool include_oof = false) const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : entries) {
      nlohmann::json j{{"id", e.id}, {"sampling", e.sampling}, {"learner", learner_name(e.kind)},
                       {"params", e.params}, {"cv", e.cv.to_json()}};
      j["test"] = e.test ? e.test->to_json() : nlohmann::json(nullptr);
      nlohmann::json d = nlohmann::json::object();
      for (const auto& [k, v] : e.deltas()) d[k] = std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
      j["deltas"] = d;
      if (include_oof) j["oof"] = e.oof;
      rows.push_back(std::move(j));
    }
    return {{"entries", rows}, {"folds", folds}, {"test_fraction", test_fraction}, {"best_id", best_id},
            {"selection_rule", selection_rule}};
  }

  static EvalReport from_json(const nlohmann::json& j) {
    EvalReport r;
    r.folds = j.at("folds").get<std::size_t>();
    r.test_fraction = j.at("test_fraction").get<double>();
    r.best_id = j.at("best_id").get<std::string>();
    r.selection_rule = j.at("selection_rule").get<std::string>();
    for (const auto& e : j.at("entries")) {
      EvalEntry x;
      x.id = e.at("id").get<std::string>();
      x.sampling = e.at("sampling").get<std::string>();
      x.kind = parse_learner(e.at("learner").get<std::string>());
      x.params = e.at("params").get<Params>();
      x.cv = MetricSet::from_json(e.at("cv"));
      if (!e.at("test").is_null()) x.test = MetricSet::from_json(e.at("test"));
      if (e.contains("oof")) x.oof = e.at("oof").get<std::vector<double>>();
      r.entries.push_back(std::move(x));
    }
    return r;
  }
};

/// Minimum test RMSE; cv RMSE when no test metrics exist. Ties go to the
/// lower cv RMSE, then the lexically smaller id.
inline std::string select_best(const EvalReport& report, std::string* rule = nullptr) {
  if (report.entries.empty()) throw Error("empty_report", "no models to select from");
  const bool have_test = std::all_of(report.entries.begin(), report.entries.end(), [](const EvalEntry& e) { return e.test.has_value(); });
  auto key = [&](const EvalEntry& e) { return have_test ? e.test->rmse : e.cv.rmse; };
  const EvalEntry* best = &report.entries.front();
  for (const auto& e : report.entries) {
    const double a = key(e), b = key(*best);
    if (a < b || (a == b && (e.cv.rmse < best->cv.rmse || (e.cv.rmse == best->cv.rmse && e.id < best->id))))
      best = &e;
  }
  if (rule) *rule = have_test ? "min_test_rmse" : "min_cv_rmse";
  return best->id;
}

/// Delimited table: per model, test / cv / delta columns for each metric.
inline std::string export_report(const EvalReport& report, char delim = ',') {
  csv::Writer w(delim);
  w.row({"sampling", "learner", "params", "test_RMSE", "test_MAE", "test_MAPE", "test_R2", "cv_RMSE", "cv_MAE",
         "cv_MAPE", "cv_R2", "delta_RMSE", "delta_MAE", "delta_MAPE", "delta_R2"});
  auto f = [](double v) { return format_fixed(v, 4); };
  auto fo = [](const std::optional<double>& v) { return v ? format_fixed(*v, 4) : std::string("NA"); };
  for (const auto& e : report.entries) {
    const auto d = e.deltas();
    const MetricSet t = e.test.value_or(MetricSet{});
    w.row({e.sampling, std::string(learner_name(e.kind)), params_label(e.params), f(t.rmse), f(t.mae), f(t.mape),
           fo(t.r2), f(e.cv.rmse), f(e.cv.mae), f(e.cv.mape), fo(e.cv.r2), f(d.at("rmse")), f(d.at("mae")),
           f(d.at("mape")), f(d.at("r2"))});
  }
  return w.str();
}

struct BenchmarkOptions {
  std::vector<LearnerKind> learners{kAllLearners.begin(), kAllLearners.end()};
  std::size_t folds = 5;
  RecipeConfig recipe{};
  std::uint64_t seed = 0;
  std::string sampling = "random";
  bool stratify = true;
  /// Optional per-learner grid override.
  std::map<LearnerKind, std::vector<Params>> grids;
};

struct BenchmarkResult {
  EvalReport report;
  Recipe recipe;  ///< fitted on the full training rows
  std::map<std::string, Model> models;  ///< refit at each learner's best grid point
};

/// Cross-validate every learner on `train`, refit its best grid point on all
/// of `train`, and score it on `test` (may be empty).
inline BenchmarkResult benchmark(std::span<const SpinRecord> train_rows, std::span<const SpinRecord> test,
                                 const BenchmarkOptions& opt) {
  BenchmarkResult out;
  out.recipe = Recipe::fit(train_rows, opt.recipe);
  const Eigen::MatrixXd X = out.recipe.apply(train_rows);
  const Eigen::VectorXd y = outcome_vector(train_rows);
  const Eigen::MatrixXd Xt = test.empty() ? Eigen::MatrixXd(0, X.cols()) : out.recipe.apply(test);
  const Eigen::VectorXd yt = outcome_vector(test);
  out.report.folds = opt.folds;

  for (auto kind : opt.learners) {
    const auto grid = opt.grids.count(kind) ? opt.grids.at(kind) : default_grid(kind, static_cast<std::size_t>(X.cols()));
    const std::uint64_t seed = splitmix64(opt.seed ^ stream_id(learner_name(kind)));
    CvOptions cvo{opt.folds, opt.recipe, seed, opt.stratify};
    CvResult cv = cross_validate(kind, grid, train_rows, cvo);
    const auto& best = cv.grid[cv.best];
    EvalEntry e;
    e.kind = kind;
    e.params = best.params;
    e.id = std::string(learner_name(kind));
    e.sampling = opt.sampling;
    e.cv = best.cv;
    e.oof = best.oof;
    Model m = train(kind, best.params, X, y, seed);
    if (test.size() > 0) {
      const Eigen::VectorXd pred = m.predict(Xt);
      e.test = compute_metrics(yt, pred);
    }
    e.grid = std::move(cv.grid);
    out.models.emplace(e.id, std::move(m));
    out.report.entries.push_back(std::move(e));
  }
  out.report.best_id = select_best(out.report, &out.report.selection_rule);
  return out;
}

}  // namespace espin
