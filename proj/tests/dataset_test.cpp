#include <gtest/gtest.h>

#include <cmath>

#include "espin/dataset.hpp"
#include "espin/synthetic.hpp"

using namespace espin;

namespace {

const char* kHeader =
    "polymer,solvent_1,solvent_2,solvent_3,solvent1_ratio,solvent2_ratio,solvent3_ratio,solution_concentration,"
    "needle_diameter,collector_type,rotation_speed,voltage,flow_rate,distance,temperature,humidity,fiber_diameter\n";

std::string rows(std::initializer_list<const char*> lines) {
  std::string s = kHeader;
  for (auto l : lines) s += std::string(l) + "\n";
  return s;
}

}  // namespace

TEST(Load, PartialRatiosAreNormalized) {
  const auto ds = load_dataset_text(rows({"PAN,DMF,DMSO,,60,30,,10,0.8,Flat,0,15,1,15,25,40,300"}));
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_NEAR(ds[0].ratio(0), 66.667, 1e-3);
  EXPECT_NEAR(ds[0].ratio(1), 33.333, 1e-3);
  EXPECT_DOUBLE_EQ(ds[0].ratio(2), 0.0);
  EXPECT_NEAR(ds[0].ratio(0) + ds[0].ratio(1) + ds[0].ratio(2), 100.0, 1e-9);
}

TEST(Load, NonFiniteOutcomeIsDroppedAndCounted) {
  const auto ds = load_dataset_text(rows({"PAN,DMF,,,100,,,10,0.8,Flat,0,15,1,15,25,40,NaN",
                                          "PAN,DMF,,,100,,,10,0.8,Flat,0,15,1,15,25,40,250"}));
  EXPECT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.load_report().rows_in, 2u);
  EXPECT_EQ(ds.load_report().rows_out, 1u);
  std::size_t dropped = 0;
  for (const auto& [reason, n] : ds.load_report().drops) dropped += n;
  EXPECT_EQ(dropped, 1u);
}

TEST(Load, SingleSolventUnchanged) {
  const auto ds = load_dataset_text(rows({"PVA,WATER,,,100,,,8,0.7,Flat,0,20,0.5,12,22,50,180"}));
  EXPECT_DOUBLE_EQ(ds[0].ratio(0), 100.0);
  EXPECT_EQ(ds[0].solvent_count(), 1u);
}

TEST(Load, AliasesCanonicalizeHeadersAndSolvents) {
  Canonicalizer c;
  c.merge_json(nlohmann::json::parse(R"j({"headers":{"Diameter (nm)":"fiber_diameter"},"solvents":{"h2o":"WATER"}})j"));
  LoadOptions lo;
  lo.names = c;
  const auto ds = load_dataset_text("polymer,solvent_1,solvent1_ratio,Diameter (nm)\nPVA,H2O,100,150\n", lo);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].solvent(0), "WATER");
  EXPECT_DOUBLE_EQ(ds[0].fiber_diameter, 150.0);
  EXPECT_FALSE(ds.canonicalization_log().empty());
}

TEST(Load, UnparseableNumberNamesRowAndColumn) {
  try {
    load_dataset_text(rows({"PAN,DMF,,,100,,,ten,0.8,Flat,0,15,1,15,25,40,300"}));
    FAIL() << "expected throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "unparseable_numeric");
    EXPECT_NE(std::string(e.what()).find("solution_concentration"), std::string::npos);
  }
}

TEST(Load, MissingOutcomeColumnRejected) {
  EXPECT_THROW(load_dataset_text("polymer,solvent_1\nPAN,DMF\n"), Error);
}

TEST(Load, SameTextSameFingerprint) {
  const std::string text = write_dataset(synthetic::generate(50, 3));
  EXPECT_EQ(load_dataset_text(text).fingerprint(), load_dataset_text(text).fingerprint());
  const std::string other = write_dataset(synthetic::generate(50, 4));
  EXPECT_NE(load_dataset_text(text).fingerprint(), load_dataset_text(other).fingerprint());
}

TEST(Load, WriteReadRoundTripIsExact) {
  const auto ds = synthetic::generate(200, 5);
  const auto back = load_dataset_text(write_dataset(ds));
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(back[i], ds[i]) << "row " << i;
}

TEST(Validate, RatiosMustSumTo100) {
  SpinRecord r;
  r.cat[idx(CatVar::polymer)] = "PAN";
  r.solvent(0) = "DMF";
  r.ratio(0) = 90;
  r.ratio(1) = 0;
  r.ratio(2) = 0;
  r.fiber_diameter = 100;
  EXPECT_THROW(SpinDataset({r}), Error);
  r.ratio(0) = 100;
  EXPECT_NO_THROW(SpinDataset({r}));
}

TEST(Describe, HandArithmeticAndTotalRow) {
  auto ds = load_dataset_text(rows({
      "A,DMF,,,100,,,10,0.8,Flat,0,15,1,15,25,40,1",
      "A,DMF,,,100,,,10,0.8,Flat,0,15,1,15,25,40,2",
      "A,DMF,,,100,,,10,0.8,Flat,0,15,1,15,25,40,3",
      "A,DMF,,,100,,,10,0.8,Flat,0,15,1,15,25,40,4",
      "A,DMF,,,100,,,10,0.8,Flat,0,15,1,15,25,40,100",
      "B,DMF,,,100,,,10,0.8,Flat,0,15,1,15,25,40,5",
      "B,DMF,,,100,,,10,0.8,Flat,0,15,1,15,25,40,5",
  }));
  const auto d = describe(ds);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d[0].polymer, "A");
  EXPECT_DOUBLE_EQ(d[0].stats.mean, 22.0);
  EXPECT_DOUBLE_EQ(d[0].stats.median, 3.0);
  EXPECT_EQ(d[1].polymer, "B");
  EXPECT_DOUBLE_EQ(d[1].stats.std_dev, 0.0);
  EXPECT_FALSE(d[1].stats.skewness);
  EXPECT_EQ(d[2].polymer, "TOTAL");
  EXPECT_EQ(d[2].stats.n, 7u);
  const std::string csv = export_describe(d);
  EXPECT_NE(csv.find("NA"), std::string::npos);
}

TEST(Describe, EmptyDatasetRejected) { EXPECT_THROW(describe(SpinDataset{}), Error); }

TEST(EmpiricalRanges, MinMaxAndLevelFrequencies) {
  auto ds = load_dataset_text(rows({
      "P,DMF,,,100,,,10,0.8,Flat,0,10,1,15,25,40,100",
      "P,DMF,,,100,,,10,0.8,Flat,0,15,1,15,25,40,110",
      "P,DMF,,,100,,,10,0.8,Flat,0,22,1,15,25,40,120",
      "P,DMF,,,100,,,10,0.8,Drum,500,12,1,15,25,40,130",
      "Q,WATER,,,100,,,5,0.8,Drum,0,30,1,15,25,40,200",
  }));
  const auto p = empirical_ranges(ds, "P");
  EXPECT_FALSE(p.fallback);
  EXPECT_DOUBLE_EQ(p.ranges[idx(NumVar::voltage)].min, 10.0);
  EXPECT_DOUBLE_EQ(p.ranges[idx(NumVar::voltage)].max, 22.0);
  const auto& coll = p.levels[idx(CatVar::collector_type)];
  EXPECT_DOUBLE_EQ(coll.at("Flat"), 0.75);
  EXPECT_DOUBLE_EQ(coll.at("Drum"), 0.25);
}

TEST(EmpiricalRanges, AbsentPolymerFallsBackToFullDataset) {
  auto ds = synthetic::generate(100, 1);
  const auto p = empirical_ranges(ds, "NOPE");
  EXPECT_TRUE(p.fallback);
  EXPECT_EQ(p.rows.size(), ds.size());
  double lo = 1e300, hi = -1e300;
  for (const auto& r : ds.records()) {
    lo = std::min(lo, r.num[idx(NumVar::voltage)]);
    hi = std::max(hi, r.num[idx(NumVar::voltage)]);
  }
  EXPECT_DOUBLE_EQ(p.ranges[idx(NumVar::voltage)].min, lo);
  EXPECT_DOUBLE_EQ(p.ranges[idx(NumVar::voltage)].max, hi);
}

TEST(EmpiricalRanges, MinRowsFallback) {
  auto ds = synthetic::generate(300, 2);
  const auto counts = ds.polymer_counts();
  const auto& [name, n] = *counts.begin();
  EXPECT_FALSE(empirical_ranges(ds, name, n).fallback);
  EXPECT_TRUE(empirical_ranges(ds, name, n + 1).fallback);
}

TEST(Synthetic, DeterministicAndValid) {
  const auto a = synthetic::generate_records(300, 11);
  const auto b = synthetic::generate_records(300, 11);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i], b[i]);
  EXPECT_NO_THROW(SpinDataset(a));
}
