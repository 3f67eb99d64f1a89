#include <gtest/gtest.h>

#include <filesystem>

#include "espin/bundle.hpp"
#include "espin/evaluation.hpp"
#include "espin/synthetic.hpp"

using namespace espin;

namespace {

ModelBundle make_bundle(LearnerKind kind, const Params& params) {
  const auto rows = synthetic::generate_records(400, 51);
  ModelBundle b;
  b.recipe = Recipe::fit(rows);
  b.model = train(kind, params, b.recipe.apply(rows), outcome_vector(rows), 7);
  b.metadata = {{"seed", 7}, {"learner", learner_name(kind)}};
  return b;
}

}  // namespace

TEST(Bundle, RoundTripIsBitExactForEveryLearner) {
  const auto probe = synthetic::generate_records(200, 52);
  const std::vector<std::pair<LearnerKind, Params>> cases{
      {LearnerKind::linear, {}},
      {LearnerKind::elastic_net, {{"alpha", 0.5}, {"lambda_ratio", 0.01}}},
      {LearnerKind::knn, {{"k", 5}}},
      {LearnerKind::tree, {{"max_depth", 6}, {"min_leaf", 5}}},
      {LearnerKind::random_forest, {{"mtry", 6}, {"trees", 20}, {"min_leaf", 5}}},
      {LearnerKind::gbt, {{"rounds", 30}, {"max_depth", 3}, {"eta", 0.1}, {"min_leaf", 5}}},
  };
  for (const auto& [kind, params] : cases) {
    const auto b = make_bundle(kind, params);
    const std::string bytes = encode_bundle(b);
    const auto back = decode_bundle(bytes);
    const Eigen::VectorXd p0 = b.predict(probe), p1 = back.predict(probe);
    for (Eigen::Index i = 0; i < p0.size(); ++i)
      EXPECT_EQ(std::memcmp(&p0(i), &p1(i), sizeof(double)), 0) << learner_name(kind) << " row " << i;
    EXPECT_EQ(back.metadata, b.metadata);
    EXPECT_EQ(encode_bundle(back), bytes);
  }
}

TEST(Bundle, FileRoundTrip) {
  const auto b = make_bundle(LearnerKind::tree, {{"max_depth", 4}, {"min_leaf", 5}});
  const auto path = (std::filesystem::temp_directory_path() / "espin_bundle_test.espb").string();
  save_bundle(b, path);
  EXPECT_EQ(encode_bundle(load_bundle(path)), encode_bundle(b));
  std::filesystem::remove(path);
}

TEST(Bundle, TruncatedFileRejected) {
  const std::string bytes = encode_bundle(make_bundle(LearnerKind::linear, {}));
  for (std::size_t cut : {std::size_t{3}, std::size_t{20}, bytes.size() - 1}) {
    try {
      decode_bundle(std::string_view(bytes).substr(0, cut));
      FAIL() << "accepted truncation at " << cut;
    } catch (const Error& e) {
      EXPECT_TRUE(e.code() == "bundle_corrupt" || e.code() == "bundle_checksum") << e.code();
    }
  }
}

TEST(Bundle, VersionBumpRejected) {
  std::string bytes = encode_bundle(make_bundle(LearnerKind::linear, {}));
  bytes[kBundleMagic.size()] = static_cast<char>(kBundleVersion + 1);
  try {
    decode_bundle(bytes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "bundle_version");
  }
}

TEST(Bundle, FlippedPayloadByteFailsChecksum) {
  std::string bytes = encode_bundle(make_bundle(LearnerKind::linear, {}));
  bytes[bytes.size() / 2] ^= 0x40;
  try {
    decode_bundle(bytes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "bundle_checksum");
  }
}

TEST(Bundle, BadMagicRejected) {
  std::string bytes = encode_bundle(make_bundle(LearnerKind::linear, {}));
  bytes[0] = 'X';
  EXPECT_THROW(decode_bundle(bytes), Error);
}

TEST(Crc32, KnownValue) { EXPECT_EQ(crc32_of("123456789"), 0xCBF43926u); }
