#include <gtest/gtest.h>

#include <numeric>

#include "espin/imc.hpp"
#include "espin/synthetic.hpp"

using namespace espin;

namespace {

SpinRecord rec(const std::string& polymer, double voltage, double y, const std::string& solvent = "DMF") {
  SpinRecord r;
  r.cat[idx(CatVar::polymer)] = polymer;
  r.cat[idx(CatVar::collector_type)] = "Flat";
  r.solvent(0) = solvent;
  r.ratio(0) = 100;
  r.ratio(1) = r.ratio(2) = 0;
  r.num[idx(NumVar::solution_concentration)] = 10;
  r.num[idx(NumVar::voltage)] = voltage;
  r.num[idx(NumVar::flow_rate)] = 1;
  r.num[idx(NumVar::distance)] = 15;
  r.fiber_diameter = y;
  return r;
}

// `k` rows of polymer P among filler rows of polymer Q.
SpinDataset with_polymer_rows(std::size_t k) {
  std::vector<SpinRecord> rows;
  for (std::size_t i = 0; i < k; ++i) rows.push_back(rec("P", 10 + static_cast<double>(i), 100 + 10.0 * i));
  for (int i = 0; i < 40; ++i) rows.push_back(rec("Q", 30 + i, 500));
  return SpinDataset(rows);
}

Predictor constant(double c) {
  return [c](std::span<const SpinRecord> r) { return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(r.size()), c); };
}

Predictor by_voltage() {
  return [](std::span<const SpinRecord> rows) {
    Eigen::VectorXd p(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) p(static_cast<Eigen::Index>(i)) = 10 * rows[i].num[idx(NumVar::voltage)];
    return p;
  };
}

ImcConfig config(ImcMode mode, const std::string& polymer, std::size_t n, std::uint64_t seed = 1) {
  ImcConfig c;
  c.mode = mode;
  c.polymer = polymer;
  c.target = 150;
  c.tolerance = 20;
  c.n = n;
  c.seed = seed;
  return c;
}

FeasibilityTables tables_for(const std::string& polymer, std::initializer_list<std::pair<const char*, Rating>> rated) {
  FeasibilityTables t;
  for (const auto& [s, r] : rated) t.solubility.set(polymer, s, {r, std::nullopt});
  return t;
}

}  // namespace

TEST(Imc, TooFewRowsFallsBackToWholeDataset) {
  const auto ds = with_polymer_rows(1);
  const auto res = run_imc(config(ImcMode::experimental, "P", 500), constant(1), ds, {});
  EXPECT_TRUE(res.summary.polymer_fallback);
  std::set<std::size_t> used;
  for (const auto& d : res.draws) used.insert(*d.source_row);
  EXPECT_GT(used.size(), 1u);
}

TEST(Imc, ExactlyMinimumRowsUsesPolymerSubset) {
  const auto ds = with_polymer_rows(kImcMinRows);
  const auto res = run_imc(config(ImcMode::experimental, "P", 500), constant(1), ds, {});
  EXPECT_FALSE(res.summary.polymer_fallback);
  for (const auto& d : res.draws) {
    ASSERT_TRUE(d.source_row);
    EXPECT_LT(*d.source_row, kImcMinRows);
  }
}

TEST(Imc, ExperimentalDrawsAreUniformOverRows) {
  const auto ds = with_polymer_rows(10);
  const std::size_t n = 10000;
  const auto res = run_imc(config(ImcMode::experimental, "P", n), constant(1), ds, {});
  std::vector<int> hits(10, 0);
  for (const auto& d : res.draws) ++hits[*d.source_row];
  for (int h : hits) EXPECT_NEAR(h / static_cast<double>(n), 0.10, 0.02);
}

TEST(Imc, ExperimentalModeHasNoAcceptanceRate) {
  const auto ds = with_polymer_rows(10);
  const auto res = run_imc(config(ImcMode::experimental, "P", 50), constant(1), ds, {});
  EXPECT_FALSE(res.summary.p_acc);
  EXPECT_FALSE(res.summary.to_json().contains("p_acc"));
  EXPECT_EQ(res.summary.accepted, 50u);
}

TEST(Imc, AllNoRatingsRejectEverything) {
  const auto ds = with_polymer_rows(10);
  const auto t = tables_for("P", {{"DMF", Rating::NO}});
  const auto res = run_imc(config(ImcMode::optimization, "P", 300), constant(150), ds, t);
  ASSERT_TRUE(res.summary.p_acc);
  EXPECT_EQ(*res.summary.p_acc, 0.0);
  EXPECT_FALSE(res.summary.p_succ);
  EXPECT_TRUE(res.summary.to_json()["zero_accepted"].get<bool>());
  EXPECT_TRUE(res.summary.top.empty());
}

TEST(Imc, OptimizationStaysInsideEmpiricalRanges) {
  auto rows = std::vector<SpinRecord>{};
  for (int i = 0; i < 8; ++i) {
    auto r = rec("P", 15, 100, i % 2 ? "DMF" : "DMSO");
    r.num[idx(NumVar::distance)] = 10 + i;
    rows.push_back(r);
  }
  const SpinDataset ds(rows);
  const auto t = tables_for("P", {{"DMF", Rating::OK}, {"DMSO", Rating::OK}});
  const auto res = run_imc(config(ImcMode::optimization, "P", 1000), by_voltage(), ds, t);
  EXPECT_EQ(*res.summary.p_acc, 1.0);
  for (const auto& d : res.draws) {
    EXPECT_EQ(d.x.num[idx(NumVar::voltage)], 15.0);
    EXPECT_GE(d.x.num[idx(NumVar::distance)], 10.0);
    EXPECT_LE(d.x.num[idx(NumVar::distance)], 17.0);
    EXPECT_NEAR(d.x.ratio(0) + d.x.ratio(1) + d.x.ratio(2), 100.0, 1e-9);
    for (std::size_t s = 0; s < 3; ++s)
      if (!d.x.solvent(s).empty()) EXPECT_TRUE(d.x.solvent(s) == "DMF" || d.x.solvent(s) == "DMSO");
  }
}

TEST(Imc, ConstantPredictorInsideBand) {
  const auto ds = with_polymer_rows(10);
  const auto res = run_imc(config(ImcMode::experimental, "P", 200), constant(150), ds, {});
  EXPECT_EQ(*res.summary.p_succ, 1.0);
  EXPECT_EQ(*res.summary.pred_sd, 0.0);
  EXPECT_EQ(*res.summary.rmse_to_target, 0.0);
}

TEST(Imc, SuccessFractionHandValue) {
  const auto ds = with_polymer_rows(10);
  Predictor three = [](std::span<const SpinRecord> r) {
    EXPECT_EQ(r.size(), 3u);
    Eigen::VectorXd p(3);
    p << 100, 110, 200;
    return p;
  };
  auto cfg = config(ImcMode::experimental, "P", 3);
  cfg.target = 105;
  cfg.tolerance = 10;
  const auto res = run_imc(cfg, three, ds, {});
  EXPECT_DOUBLE_EQ(*res.summary.p_succ, 2.0 / 3.0);
  EXPECT_EQ(res.summary.within_band, 2u);
  EXPECT_NEAR(*res.summary.pred_mean, 410.0 / 3.0, 1e-12);
}

TEST(Imc, TopKSortedAndDeduplicated) {
  std::vector<ImcDraw> draws;
  const double preds[] = {160, 149, 149, 100, 151};
  for (std::size_t i = 0; i < 5; ++i) {
    ImcDraw d;
    d.index = i;
    d.x = rec("P", 10 + static_cast<double>(i), 0);
    d.prediction = preds[i];
    draws.push_back(d);
  }
  draws[2].x = draws[1].x;  // duplicate configuration
  draws[4].accepted = false;
  const auto top = top_k(draws, 150, 10);
  ASSERT_EQ(top.size(), 3u);
  EXPECT_EQ(top[0].draw, 1u);
  EXPECT_EQ(top[1].draw, 0u);
  EXPECT_EQ(top[2].draw, 3u);
  EXPECT_EQ(top_k(draws, 150, 1).size(), 1u);
}

TEST(Imc, DedupKeyRoundsToThreeFigures) {
  auto a = rec("P", 15.001, 0), b = rec("P", 15.004, 0), c = rec("P", 15.2, 0);
  EXPECT_EQ(dedup_key(a), dedup_key(b));
  EXPECT_NE(dedup_key(a), dedup_key(c));
}

TEST(Imc, SameSeedSameResultDifferentSeedDiffers) {
  const auto ds = synthetic::generate(600, 3);
  const auto tables = load_feasibility(std::string(ESPIN_DATA_DIR) + "/solubility.csv",
                                       std::string(ESPIN_DATA_DIR) + "/incompatibility.csv");
  auto cfg = config(ImcMode::optimization, "PAN", 400, 42);
  const auto a = run_imc(cfg, by_voltage(), ds, tables);
  const auto b = run_imc(cfg, by_voltage(), ds, tables);
  EXPECT_EQ(export_draws(a), export_draws(b));
  EXPECT_EQ(a.summary.to_json().dump(), b.summary.to_json().dump());
  cfg.seed = 43;
  EXPECT_NE(export_draws(run_imc(cfg, by_voltage(), ds, tables)), export_draws(a));
}

TEST(Imc, ConfigValidation) {
  const auto ds = with_polymer_rows(10);
  auto cfg = config(ImcMode::experimental, "P", 10);
  cfg.target = 0;
  EXPECT_THROW(run_imc(cfg, constant(1), ds, {}), Error);
  cfg = config(ImcMode::experimental, "P", 0);
  EXPECT_THROW(run_imc(cfg, constant(1), ds, {}), Error);
  EXPECT_THROW(parse_imc_mode("guess"), Error);
}

TEST(Imc, ExportsHaveOneLinePerDraw) {
  const auto ds = with_polymer_rows(10);
  const auto res = run_imc(config(ImcMode::experimental, "P", 25), by_voltage(), ds, {});
  const auto csv = export_draws(res);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 26);
  const auto top = export_top(res.summary);
  EXPECT_EQ(top.rfind("rank,draw,prediction", 0), 0u);
}
