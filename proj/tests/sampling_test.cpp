#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "espin/sampling.hpp"
#include "espin/synthetic.hpp"

using namespace espin;

namespace {

// Max absolute deviation of cell counts from uniform on a g x g grid.
double grid_discrepancy(const std::vector<std::vector<double>>& pts, int g) {
  std::vector<int> cells(static_cast<std::size_t>(g * g), 0);
  for (const auto& p : pts) {
    const int i = std::min(g - 1, static_cast<int>(p[0] * g));
    const int j = std::min(g - 1, static_cast<int>(p[1] * g));
    ++cells[static_cast<std::size_t>(i * g + j)];
  }
  const double expect = static_cast<double>(pts.size()) / (g * g);
  double worst = 0;
  for (int c : cells) worst = std::max(worst, std::fabs(c - expect));
  return worst / static_cast<double>(pts.size());
}

}  // namespace

TEST(RandomSample, FullSizeIsIdentity) {
  const auto s = sample_random(25, 25, 1);
  std::vector<std::size_t> all(25);
  std::iota(all.begin(), all.end(), std::size_t{0});
  EXPECT_EQ(s, all);
}

TEST(RandomSample, SingleRowFrequenciesUniform) {
  std::array<int, 3> hits{};
  for (std::uint64_t seed = 0; seed < 30000; ++seed) ++hits[sample_random(3, 1, seed)[0]];
  for (int h : hits) EXPECT_NEAR(h / 30000.0, 1.0 / 3.0, 0.02);
}

TEST(RandomSample, DeterministicSortedDistinct) {
  const auto a = sample_random(1000, 100, 77);
  EXPECT_EQ(a, sample_random(1000, 100, 77));
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(std::set<std::size_t>(a.begin(), a.end()).size(), 100u);
  EXPECT_THROW(sample_random(10, 11, 1), Error);
}

TEST(Sobol, FirstSevenOneDimensionalPointsAreDyadic) {
  SobolStream s(1);
  const auto pts = sobol_points(1, 7, s);
  std::multiset<double> got;
  for (const auto& p : pts) got.insert(p[0]);
  std::multiset<double> want;
  for (int i = 1; i < 8; ++i) want.insert(i / 8.0);
  EXPECT_EQ(got, want);
}

TEST(Sobol, EachDimensionStratifiesDyadicIntervals) {
  for (unsigned m : {3u, 4u, 5u}) {
    SobolStream s(8, 0);
    const std::size_t n = std::size_t{1} << m;
    const auto pts = sobol_points(8, n, s);
    for (std::size_t d = 0; d < 8; ++d) {
      std::vector<int> bins(n, 0);
      for (const auto& p : pts) ++bins[static_cast<std::size_t>(p[d] * static_cast<double>(n))];
      for (int b : bins) EXPECT_EQ(b, 1) << "m=" << m << " d=" << d;
    }
  }
}

TEST(Sobol, GridDiscrepancyBeatsPseudoRandom) {
  SobolStream s(2);
  const auto sob = sobol_points(2, 256, s);
  Stream rng(12345, 0);
  std::vector<std::vector<double>> pr(256);
  for (auto& p : pr) p = {rng.uniform(), rng.uniform()};
  EXPECT_LT(grid_discrepancy(sob, 16), grid_discrepancy(pr, 16));
}

TEST(Sobol, ZeroPointsAndBadDimension) {
  SobolStream s(3);
  EXPECT_TRUE(sobol_points(3, 0, s).empty());
  EXPECT_THROW(SobolStream(0), Error);
  EXPECT_THROW(SobolStream(SobolStream::kMaxDimension + 1), Error);
}

TEST(ScaleToRanges, AffineAndDegenerate) {
  const std::vector<Range> r{{10, 22}, {5, 5}};
  const auto x = scale_to_ranges({{0.5, 0.3}, {0.0, 0.9}, {0.999999, 0.1}}, r);
  EXPECT_DOUBLE_EQ(x[0][0], 16.0);
  EXPECT_DOUBLE_EQ(x[1][0], 10.0);
  EXPECT_NEAR(x[2][0], 22.0, 1e-4);
  EXPECT_LT(x[2][0], 22.0);
  for (const auto& p : x) EXPECT_DOUBLE_EQ(p[1], 5.0);
}

TEST(Fedorov, ThreeCandidateLine) {
  Eigen::MatrixXd X(3, 2);
  X << 1, 0, 1, 1, 1, 2;
  const auto sel = federov_select(X, 2, 1);
  EXPECT_EQ(sel.chosen, (std::vector<std::size_t>{0, 2}));
  EXPECT_NEAR(sel.det(), 4.0, 1e-9);
}

TEST(Fedorov, FullSelectionMatchesFullMatrix) {
  Stream rng(4, 0);
  Eigen::MatrixXd X(8, 3);
  for (Eigen::Index i = 0; i < X.rows(); ++i) X.row(i) << 1.0, rng.normal(), rng.normal();
  const auto sel = federov_select(X, 8, 1);
  EXPECT_EQ(sel.chosen.size(), 8u);
  const double full = (X.transpose() * X).determinant();
  EXPECT_NEAR(sel.criterion, std::pow(full, 1.0 / 3.0), 1e-9 * std::pow(full, 1.0 / 3.0));
}

TEST(Fedorov, TraceIsMonotone) {
  Stream rng(5, 0);
  Eigen::MatrixXd X(40, 4);
  for (Eigen::Index i = 0; i < X.rows(); ++i) X.row(i) << 1.0, rng.uniform(), rng.uniform(), rng.uniform();
  const auto sel = federov_select(X, 10, 3);
  for (std::size_t i = 1; i < sel.trace.size(); ++i) EXPECT_GE(sel.trace[i], sel.trace[i - 1]);
}

TEST(Fedorov, NearExhaustiveOptimumSmallInstance) {
  Stream rng(6, 0);
  Eigen::MatrixXd X(20, 3);
  for (Eigen::Index i = 0; i < X.rows(); ++i) X.row(i) << 1.0, rng.uniform(-1, 1), rng.uniform(-1, 1);
  double best = 0;
  std::vector<int> pick(20, 0);
  std::fill(pick.end() - 6, pick.end(), 1);
  do {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(3, 3);
    for (int i = 0; i < 20; ++i)
      if (pick[static_cast<std::size_t>(i)]) M += X.row(i).transpose() * X.row(i);
    best = std::max(best, M.determinant());
  } while (std::next_permutation(pick.begin(), pick.end()));
  EXPECT_GE(federov_select(X, 6, 1).det(), 0.99 * best);
}

TEST(Fedorov, TooSmallDesignRejected) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(10, 4);
  EXPECT_THROW(federov_select(X, 3, 1), Error);
}

TEST(SobolDoptimal, CandidateCountFollowsOversampleFactor) {
  const auto ds = synthetic::generate(2000, 21);
  SobolDoptOptions o;
  o.seed = 2;
  o.constrain_to_observed_tuples = false;
  const auto s = sobol_doptimal_sample(ds, 100, o);
  EXPECT_EQ(s.rows.size(), 100u);
  EXPECT_EQ(s.log.at("candidates_requested").get<std::size_t>(), 262u);
  EXPECT_EQ(std::set<std::size_t>(s.rows.begin(), s.rows.end()).size(), 100u);
}

TEST(SobolDoptimal, ConstrainedCandidatesUseObservedTuples) {
  const auto ds = synthetic::generate(1500, 22);
  SobolDoptOptions o;
  o.seed = 3;
  const auto batch = detail::make_candidates(ds, 300, o);
  const auto tuples = observed_tuples(ds);
  ASSERT_FALSE(batch.records.empty());
  for (const auto& r : batch.records) EXPECT_TRUE(tuples.count({r.polymer(), solvent_set_key(r)}));
}

TEST(SobolDoptimal, DeterministicGivenSeed) {
  const auto ds = synthetic::generate(800, 23);
  SobolDoptOptions o;
  o.seed = 9;
  EXPECT_EQ(sobol_doptimal_sample(ds, 80, o).rows, sobol_doptimal_sample(ds, 80, o).rows);
}

TEST(Allocation, LogWeightsWithLargestRemainder) {
  const auto a = allocate_balanced({{"A", 9}, {"B", 99}}, 10);
  EXPECT_NEAR(a.uncapped_raw.at("A"), 10 * std::log(10.0) / (std::log(10.0) + std::log(100.0)), 1e-12);
  EXPECT_EQ(a.allocation.at("A"), 3u);
  EXPECT_EQ(a.allocation.at("B"), 7u);
}

TEST(Allocation, CapAndRedistribute) {
  const auto a = allocate_balanced({{"A", 2}, {"B", 3}, {"C", 1000}}, 20);
  EXPECT_EQ(a.allocation.at("A"), 2u);
  EXPECT_EQ(a.allocation.at("B"), 3u);
  EXPECT_EQ(a.allocation.at("C"), 15u);
  EXPECT_EQ(a.capped, (std::vector<std::string>{"A", "B"}));
}

TEST(Allocation, SinglePolymerGetsEverything) {
  EXPECT_EQ(allocate_balanced({{"A", 50}}, 17).allocation.at("A"), 17u);
}

TEST(Allocation, RandomInstancesConserveBudgetAndCaps) {
  Stream rng(31, 0);
  for (int rep = 0; rep < 200; ++rep) {
    std::map<std::string, std::size_t> f;
    std::size_t total = 0;
    const std::size_t k = 1 + rng.below(10);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t c = 1 + rng.below(rng.uniform() < 0.3 ? 20 : 5000);
      f["P" + std::to_string(i)] = c;
      total += c;
    }
    const std::size_t n = 1 + rng.below(total);
    const auto a = allocate_balanced(f, n);
    std::size_t sum = 0;
    for (const auto& [p, np] : a.allocation) {
      EXPECT_LE(np, f.at(p));
      sum += np;
    }
    EXPECT_EQ(sum, n);
  }
}

TEST(Allocation, BudgetAboveDataRejected) { EXPECT_THROW(allocate_balanced({{"A", 3}}, 4), Error); }

TEST(BalancedSample, StrataSumToBudgetAndRespectAllocation) {
  const auto ds = synthetic::generate(3000, 24);
  SobolDoptOptions o;
  o.seed = 4;
  const auto s = balanced_sobol_doptimal(ds, 600, o);
  EXPECT_EQ(s.rows.size(), 600u);
  EXPECT_EQ(std::set<std::size_t>(s.rows.begin(), s.rows.end()).size(), 600u);
  const auto alloc = allocate_balanced(ds.polymer_counts(), 600);
  std::map<std::string, std::size_t> got;
  for (auto r : s.rows) ++got[ds[r].polymer()];
  for (const auto& [p, np] : alloc.allocation) EXPECT_EQ(got[p], np) << p;
}

TEST(Ratios, SimplexCornerAndSums) {
  Stream rng(8, 0);
  EXPECT_EQ(sample_ratios(1, rng), std::vector<double>{100.0});
  for (int i = 0; i < 1000; ++i) {
    const auto r = sample_ratios(1 + rng.below(3), rng);
    EXPECT_NEAR(std::accumulate(r.begin(), r.end(), 0.0), 100.0, 1e-9);
    for (double x : r) EXPECT_GE(x, 0.0);
  }
}

TEST(Ratios, SymmetricDirichletMeans) {
  Stream rng(10, 0);
  std::array<double, 3> m{};
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto r = sample_ratios(3, rng);
    for (int j = 0; j < 3; ++j) m[static_cast<std::size_t>(j)] += r[static_cast<std::size_t>(j)] / n;
  }
  for (double x : m) EXPECT_NEAR(x, 100.0 / 3.0, 1.0);
  EXPECT_THROW(sample_ratios(4, rng), Error);
}
