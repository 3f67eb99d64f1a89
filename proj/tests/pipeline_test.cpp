#include <gtest/gtest.h>

#include <algorithm>

#include "espin/pipeline.hpp"
#include "espin/synthetic.hpp"

using namespace espin;

namespace {

SpinRecord rec(std::string polymer, double conc, double voltage, std::string collector = "plate") {
  SpinRecord r;
  r.cat[idx(CatVar::polymer)] = std::move(polymer);
  r.solvent(0) = "DMF";
  r.ratio(0) = 100;
  r.ratio(1) = 0;
  r.ratio(2) = 0;
  r.num[idx(NumVar::solution_concentration)] = conc;
  r.num[idx(NumVar::voltage)] = voltage;
  r.num[idx(NumVar::needle_diameter)] = 0.8;  // constant
  r.cat[idx(CatVar::collector_type)] = std::move(collector);
  r.fiber_diameter = 100 + conc;
  return r;
}

std::ptrdiff_t column(const Recipe& r, const std::string& name) {
  const auto names = r.output_names();
  const auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? -1 : it - names.begin();
}

}  // namespace

TEST(Recipe, ConstantNumericRemoved) {
  std::vector<SpinRecord> rows{rec("A", 1, 10), rec("B", 2, 12), rec("A", 3, 14)};
  const auto r = Recipe::fit(rows);
  EXPECT_FALSE(r.keeps_numeric(idx(NumVar::needle_diameter)));
  EXPECT_EQ(column(r, "needle_diameter"), -1);
  EXPECT_GE(column(r, "voltage"), 0);
}

TEST(Recipe, RareLevelPooledIntoOther) {
  std::vector<SpinRecord> rows;
  for (int i = 0; i < 199; ++i) rows.push_back(rec(i % 2 ? "A" : "B", i, 10 + i % 7));
  rows.push_back(rec("RARE", 5, 11));  // 0.5% of rows
  const auto r = Recipe::fit(rows);
  const auto& lv = r.levels(idx(CatVar::polymer));
  EXPECT_EQ(std::count(lv.begin(), lv.end(), "RARE"), 0);
  const auto other = column(r, "polymer=other");
  ASSERT_GE(other, 0);
  const auto X = r.apply(std::span(&rows.back(), 1));
  EXPECT_DOUBLE_EQ(X(0, other), 1.0);
}

TEST(Recipe, MedianImputation) {
  std::vector<SpinRecord> rows{rec("A", 1, 10), rec("A", 2, 10), rec("B", kNaN, 10), rec("B", 3, 10)};
  const auto r = Recipe::fit(rows);
  EXPECT_DOUBLE_EQ(r.median(idx(NumVar::solution_concentration)), 2.0);
  const auto X = r.apply_unscaled(rows);
  EXPECT_DOUBLE_EQ(X(2, column(r, "solution_concentration")), 2.0);
}

TEST(Recipe, TrainingColumnsStandardized) {
  const auto ds = synthetic::generate(400, 3);
  const auto r = Recipe::fit(ds.records());
  const auto X = r.apply(ds.records());
  for (const auto& name : {"voltage", "flow_rate", "distance", "solution_concentration"}) {
    const auto j = column(r, name);
    ASSERT_GE(j, 0) << name;
    const Eigen::VectorXd c = X.col(j);
    const double m = c.mean();
    const double sd = std::sqrt((c.array() - m).square().sum() / static_cast<double>(c.size() - 1));
    EXPECT_NEAR(m, 0.0, 1e-9) << name;
    EXPECT_NEAR(sd, 1.0, 1e-9) << name;
  }
}

TEST(Recipe, ApplyIsDeterministic) {
  const auto ds = synthetic::generate(200, 4);
  const auto r = Recipe::fit(ds.records());
  EXPECT_EQ(r.apply(ds.records()), r.apply(ds.records()));
}

TEST(Recipe, UnseenLevelMapsToOtherWithoutNewColumn) {
  std::vector<SpinRecord> rows{rec("A", 1, 10, "plate"), rec("B", 2, 12, "drum"), rec("A", 3, 14, "plate")};
  const auto r = Recipe::fit(rows);
  const auto width = r.output_width();
  const SpinRecord odd = rec("A", 2, 12, "rotating disk");
  const auto X = r.apply(std::span(&odd, 1));
  EXPECT_EQ(static_cast<std::size_t>(X.cols()), width);
  EXPECT_DOUBLE_EQ(X(0, column(r, "collector_type=other")), 1.0);
  EXPECT_DOUBLE_EQ(X(0, column(r, "collector_type=plate")), 0.0);
  EXPECT_DOUBLE_EQ(X(0, column(r, "collector_type=drum")), 0.0);
}

TEST(Recipe, FitOnTrainOnlyDoesNotSeeTest) {
  const auto ds = synthetic::generate(300, 5);
  std::vector<SpinRecord> train(ds.records().begin(), ds.records().begin() + 200);
  std::vector<SpinRecord> test(ds.records().begin() + 200, ds.records().end());
  auto shifted = test;
  for (auto& t : shifted) t.num[idx(NumVar::voltage)] += 1000;
  const auto a = Recipe::fit(train);
  EXPECT_DOUBLE_EQ(a.center(idx(NumVar::voltage)), Recipe::fit(train).center(idx(NumVar::voltage)));
  const auto Xa = a.apply(test);
  const auto Xb = a.apply(shifted);
  const auto j = column(a, "voltage");
  EXPECT_NEAR(Xb(0, j) - Xa(0, j), 1000.0 / a.scale(idx(NumVar::voltage)), 1e-9);
}

TEST(Recipe, SerializeRoundTrip) {
  const auto ds = synthetic::generate(200, 6);
  const auto r = Recipe::fit(ds.records());
  io::Writer w;
  r.serialize(w);
  const std::string bytes = w.take();
  io::Reader rd(bytes);
  const auto back = Recipe::deserialize(rd);
  EXPECT_EQ(back.output_names(), r.output_names());
  EXPECT_EQ(back.apply(ds.records()), r.apply(ds.records()));
}

TEST(Recipe, PcaProjectionIsOrthonormalAndBounded) {
  const auto ds = synthetic::generate(300, 8);
  RecipeConfig cfg;
  cfg.pca = true;
  cfg.pca_components = 5;
  const auto r = Recipe::fit(ds.records(), cfg);
  EXPECT_EQ(r.output_width(), 5u);
  const Eigen::MatrixXd G = r.pca_basis().transpose() * r.pca_basis();
  EXPECT_TRUE(G.isIdentity(1e-9));
}

TEST(Recipe, EmptyTrainRejected) { EXPECT_THROW(Recipe::fit(std::span<const SpinRecord>{}), Error); }
