#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "espin/evaluation.hpp"
#include "espin/synthetic.hpp"

using namespace espin;

namespace {

std::vector<SpinRecord> stratified_rows(std::initializer_list<std::pair<const char*, int>> sizes) {
  std::vector<SpinRecord> out;
  int k = 0;
  for (const auto& [name, n] : sizes)
    for (int i = 0; i < n; ++i, ++k) {
      SpinRecord r;
      r.cat[idx(CatVar::polymer)] = name;
      r.solvent(0) = "DMF";
      r.ratio(0) = 100;
      r.ratio(1) = r.ratio(2) = 0;
      r.num[idx(NumVar::voltage)] = k;
      r.fiber_diameter = 100 + k;
      out.push_back(r);
    }
  return out;
}

// Noise-free linear response in voltage and flow rate.
std::vector<SpinRecord> linear_rows(std::size_t n) {
  auto rows = synthetic::generate_records(n, 5);
  for (auto& r : rows)
    r.fiber_diameter = 50 + 3 * r.num[idx(NumVar::voltage)] + 20 * r.num[idx(NumVar::flow_rate)];
  return rows;
}

EvalEntry entry(const std::string& id, double test_rmse, double cv_rmse) {
  EvalEntry e;
  e.id = id;
  e.cv.rmse = cv_rmse;
  MetricSet t;
  t.rmse = test_rmse;
  e.test = t;
  return e;
}

}  // namespace

TEST(Metrics, PerfectFit) {
  const std::vector<double> y{1, 2, 3};
  const auto m = compute_metrics(y, y);
  EXPECT_EQ(m.rmse, 0.0);
  EXPECT_EQ(m.mae, 0.0);
  EXPECT_EQ(m.mape, 0.0);
  ASSERT_TRUE(m.r2);
  EXPECT_EQ(*m.r2, 1.0);
}

TEST(Metrics, HandArithmetic) {
  const std::vector<double> y{2, 4}, p{3, 3};
  const auto m = compute_metrics(y, p);
  EXPECT_DOUBLE_EQ(m.rmse, 1.0);
  EXPECT_DOUBLE_EQ(m.mae, 1.0);
  EXPECT_DOUBLE_EQ(m.mape, 37.5);
  EXPECT_DOUBLE_EQ(*m.r2, 0.0);
}

TEST(Metrics, ConstantActualsLeaveR2Undefined) {
  const std::vector<double> y{5, 5, 5}, p{6, 6, 6};
  const auto m = compute_metrics(y, p);
  EXPECT_FALSE(m.r2);
  EXPECT_DOUBLE_EQ(m.rmse, 1.0);
}

TEST(Metrics, ZeroActualSkippedInMape) {
  const std::vector<double> y{0, 10}, p{1, 12};
  const auto m = compute_metrics(y, p);
  EXPECT_EQ(m.mape_skipped, 1u);
  EXPECT_DOUBLE_EQ(m.mape, 20.0);
}

TEST(Metrics, Preconditions) {
  const std::vector<double> a{1, 2}, b{1};
  EXPECT_THROW(compute_metrics(a, b), Error);
  EXPECT_THROW(compute_metrics(std::span<const double>{}, std::span<const double>{}), Error);
}

TEST(Split, ThirtyPercentOfHundred) {
  const auto rows = stratified_rows({{"A", 100}});
  const auto s = split(rows, 0.30, 1);
  EXPECT_EQ(s.test.size(), 30u);
  EXPECT_EQ(s.train.size(), 70u);
}

TEST(Split, PerStratumRounding) {
  const auto rows = stratified_rows({{"A", 10}, {"B", 90}});
  const auto s = split(rows, 0.30, 2);
  std::map<std::string, int> t;
  for (auto i : s.test) ++t[rows[i].polymer()];
  EXPECT_EQ(t["A"], 3);
  EXPECT_EQ(t["B"], 27);
}

TEST(Split, FractionOutsideRangeRejected) {
  const auto rows = stratified_rows({{"A", 20}});
  EXPECT_THROW(split(rows, 0.45, 1), Error);
  EXPECT_THROW(split(rows, 0.05, 1), Error);
}

TEST(Split, PartitionDisjointCompleteDeterministic) {
  const auto rows = stratified_rows({{"A", 37}, {"B", 12}, {"C", 1}});
  const auto s = split(rows, 0.25, 9);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  for (auto i : s.test) EXPECT_TRUE(all.insert(i).second);
  EXPECT_EQ(all.size(), rows.size());
  EXPECT_EQ(s.warnings.size(), 1u);
  EXPECT_EQ(split(rows, 0.25, 9).test, s.test);
}

TEST(Folds, TenRowsThreeFolds) {
  const auto rows = stratified_rows({{"A", 10}});
  const auto f = make_folds(rows, 3, 1);
  std::array<int, 3> sizes{};
  for (auto x : f) ++sizes[x];
  std::vector<int> v(sizes.begin(), sizes.end());
  std::sort(v.rbegin(), v.rend());
  EXPECT_EQ(v, (std::vector<int>{4, 3, 3}));
}

TEST(Folds, LeaveOneOutPredictsEachRowOnce) {
  const auto rows = linear_rows(12);
  const auto f = make_folds(rows, 12, 1);
  EXPECT_EQ(std::set<std::size_t>(f.begin(), f.end()).size(), 12u);
  const auto cv = cross_validate(LearnerKind::linear, {Params{}}, rows, {12, {}, 1, true});
  for (double p : cv.grid[0].oof) EXPECT_TRUE(std::isfinite(p));
  EXPECT_EQ(cv.grid[0].cv.n, 12u);
}

TEST(CrossValidate, LinearOnNoiselessLinearData) {
  const auto rows = linear_rows(300);
  const auto cv = cross_validate(LearnerKind::linear, {Params{}}, rows, {5, {}, 3, true});
  EXPECT_LT(cv.grid[0].cv.rmse, 1e-6);
}

TEST(CrossValidate, BestIsMinimumRmseAndBoostingShortcutMatchesDirect) {
  const auto rows = synthetic::generate_records(240, 8);
  const std::vector<Params> grid{{{"rounds", 20}, {"max_depth", 2}, {"eta", 0.1}, {"min_leaf", 5}},
                                 {{"rounds", 50}, {"max_depth", 2}, {"eta", 0.1}, {"min_leaf", 5}}};
  const auto both = cross_validate(LearnerKind::gbt, grid, rows, {3, {}, 4, true});
  const auto one = cross_validate(LearnerKind::gbt, {grid[0]}, rows, {3, {}, 4, true});
  EXPECT_EQ(both.grid[0].oof, one.grid[0].oof);
  const auto best = both.best;
  for (const auto& g : both.grid) EXPECT_GE(g.cv.rmse, both.grid[best].cv.rmse);
}

TEST(SelectBest, LowerTestRmseWins) {
  EvalReport r;
  r.entries = {entry("A", 260.08, 270), entry("B", 296.23, 250)};
  std::string rule;
  EXPECT_EQ(select_best(r, &rule), "A");
  EXPECT_EQ(rule, "min_test_rmse");
}

TEST(SelectBest, SingleAndTieBreak) {
  EvalReport one;
  one.entries = {entry("only", 1, 1)};
  EXPECT_EQ(select_best(one), "only");
  EvalReport tie;
  tie.entries = {entry("x", 100, 263), entry("y", 100, 250)};
  EXPECT_EQ(select_best(tie), "y");
}

TEST(SelectBest, FallsBackToCvWithoutTest) {
  EvalReport r;
  r.entries = {entry("a", 1, 9), entry("b", 2, 3)};
  r.entries[0].test.reset();
  std::string rule;
  EXPECT_EQ(select_best(r, &rule), "b");
  EXPECT_EQ(rule, "min_cv_rmse");
}

TEST(Benchmark, ReportRoundTripAndExport) {
  const auto rows = synthetic::generate_records(300, 12);
  const auto s = split(rows, 0.3, 1);
  const auto tr = take_rows(rows, s.train), te = take_rows(rows, s.test);
  BenchmarkOptions o;
  o.learners = {LearnerKind::linear, LearnerKind::knn, LearnerKind::tree};
  o.folds = 3;
  o.seed = 5;
  const auto b = benchmark(tr, te, o);
  ASSERT_EQ(b.report.entries.size(), 3u);
  for (const auto& e : b.report.entries) {
    ASSERT_TRUE(e.test);
    EXPECT_NEAR(e.deltas().at("rmse"), e.test->rmse - e.cv.rmse, 1e-12);
    const auto direct = compute_metrics(outcome_vector(te), b.models.at(e.id).predict(b.recipe.apply(te)));
    EXPECT_DOUBLE_EQ(direct.rmse, e.test->rmse);
  }
  const auto back = EvalReport::from_json(nlohmann::json::parse(b.report.to_json().dump()));
  EXPECT_EQ(back.best_id, b.report.best_id);
  EXPECT_EQ(back.entries.size(), 3u);
  EXPECT_DOUBLE_EQ(back.entries[1].cv.rmse, b.report.entries[1].cv.rmse);
  const std::string csv = export_report(b.report);
  EXPECT_EQ(csv.rfind("sampling,learner,params,test_RMSE", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Benchmark, SameSeedSameReport) {
  const auto rows = synthetic::generate_records(200, 13);
  BenchmarkOptions o;
  o.learners = {LearnerKind::random_forest};
  o.grids[LearnerKind::random_forest] = {{{"mtry", 4}, {"trees", 10}, {"min_leaf", 5}}};
  o.folds = 3;
  o.seed = 6;
  EXPECT_EQ(benchmark(rows, {}, o).report.to_json(true).dump(), benchmark(rows, {}, o).report.to_json(true).dump());
}
