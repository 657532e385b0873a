#include <gtest/gtest.h>

#include <map>
#include <set>

#include "vcasir/evaluation.hpp"

using namespace vcasir;

namespace {

std::vector<RatedSample> linear_corpus(std::size_t scenes, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<RatedSample> out;
  for (std::size_t s = 0; s < scenes; ++s)
    for (const char* m : {"crop", "scale", "seam", "multi"}) {
      RatedSample r;
      r.scene = "s" + std::to_string(s);
      r.method = m;
      r.id = r.scene + "_" + m;
      r.features.dr = rng.uniform(-1.0, 1.0);
      r.features.bd = {rng.uniform(), rng.uniform(), 1.0};
      r.features.did = {rng.uniform(), rng.uniform()};
      r.mos.vc = 3.0 + 1.5 * r.features.dr;
      out.push_back(r);
    }
  return out;
}

}  // namespace

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 10; ++i) {
    const auto va = a.next();
    EXPECT_EQ(va, b.next());
    EXPECT_NE(va, c.next());
  }
  Rng u(7);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
    EXPECT_LT(u.below(5), 5u);
  }
}

TEST(Rng, ShuffleIsPermutation) {
  Rng rng(3);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
  rng.shuffle(v);
  std::multiset<int> s(v.begin(), v.end());
  EXPECT_EQ(s, (std::multiset<int>{0, 1, 2, 3, 4, 5, 6, 7}));
}

TEST(FeatureSet, ParseAndLabel) {
  EXPECT_EQ(FeatureSet::parse("dr,bd,did").label(), "DR+BD+DID");
  EXPECT_EQ(FeatureSet::parse("DID+NIQ+dr").label(), "NIQ+DR+DID");
  EXPECT_EQ(FeatureSet::parse("fiq,dr").label(), "FIQ+DR");
  EXPECT_EQ(FeatureSet::parse(" dr , bd "), FeatureSet::parse("BD+DR"));
  EXPECT_THROW(FeatureSet::parse("dr,xyz"), ParameterError);
  EXPECT_THROW(FeatureSet::parse(","), ParameterError);
}

TEST(FeatureSet, SelectOrderAndFiq) {
  FeatureVector fv;
  fv.dr = 0.5;
  fv.bd = {1, 2, 3};
  fv.did = {4, 5};
  EXPECT_EQ(FeatureSet::parse("did,dr").select(fv), (std::vector<double>{0.5, 4, 5}));
  EXPECT_EQ(FeatureSet::parse("dr,bd,did").select(fv).size(), 6u);
  EXPECT_EQ(FeatureSet::parse("niq").select(fv).size(), kNiqDims);
  EXPECT_THROW(FeatureSet::parse("fiq").select(fv), InputError);
  fv.fiq = {7, 8};
  EXPECT_EQ(FeatureSet::parse("fiq,dr").select(fv), (std::vector<double>{0.5, 7, 8}));
}

TEST(Split, GroupsNeverStraddle) {
  const auto data = linear_corpus(10, 1);
  Rng rng(9);
  for (int it = 0; it < 50; ++it) {
    const Split s = random_split(data, 0.8, true, rng);
    EXPECT_EQ(s.train.size() + s.test.size(), data.size());
    EXPECT_EQ(s.train.size(), 32u);
    std::set<std::string> train_scenes;
    for (auto i : s.train) train_scenes.insert(data[i].scene);
    for (auto i : s.test) EXPECT_FALSE(train_scenes.count(data[i].scene));
  }
}

TEST(Split, UngroupedUsesSamples) {
  const auto data = linear_corpus(5, 2);
  Rng rng(1);
  const Split s = random_split(data, 0.75, false, rng);
  EXPECT_EQ(s.train.size(), 15u);
  EXPECT_EQ(s.test.size(), 5u);
}

TEST(CrossValidate, LinearLabelsAreRecovered) {
  const auto data = linear_corpus(20, 4);
  CrossValidationOptions o;
  o.iterations = 20;
  o.seed = 5;
  SvrParams p;
  p.kernel = KernelType::Linear;
  p.epsilon = 0.01;
  const auto rep = cross_validate(data, FeatureSet::parse("dr"), p, o);
  EXPECT_GE(rep.plcc.mean, 0.999);
  EXPECT_GE(rep.srcc.mean, 0.999);
  EXPECT_EQ(rep.iterations, 20u);
  EXPECT_EQ(rep.skipped, 0u);
  EXPECT_EQ(rep.features, "DR");
}

TEST(CrossValidate, DeterministicForSeed) {
  const auto data = linear_corpus(12, 6);
  CrossValidationOptions o;
  o.iterations = 10;
  o.seed = 77;
  const auto a = cross_validate(data, FeatureSet::parse("dr,bd,did"), {}, o);
  const auto b = cross_validate(data, FeatureSet::parse("dr,bd,did"), {}, o);
  EXPECT_EQ(a.plcc.mean, b.plcc.mean);
  EXPECT_EQ(a.rmse.std, b.rmse.std);
  o.seed = 78;
  const auto c = cross_validate(data, FeatureSet::parse("dr,bd,did"), {}, o);
  EXPECT_NE(a.plcc.mean, c.plcc.mean);
}

TEST(CrossValidate, DegenerateSplitsAreRejected) {
  // Two scenes: every test split holds one scene, whose labels are constant.
  auto data = linear_corpus(2, 3);
  for (auto& s : data) s.mos.vc = s.scene == "s0" ? 2.0 : 4.0;
  CrossValidationOptions o;
  o.iterations = 5;
  EXPECT_THROW(cross_validate(data, FeatureSet::parse("dr"), {}, o), InputError);
}

TEST(CrossValidate, ParameterErrors) {
  const auto data = linear_corpus(5, 1);
  CrossValidationOptions o;
  o.iterations = 0;
  EXPECT_THROW(cross_validate(data, FeatureSet(), {}, o), ParameterError);
  o.iterations = 3;
  o.train_fraction = 1.0;
  EXPECT_THROW(cross_validate(data, FeatureSet(), {}, o), ParameterError);
  EXPECT_THROW(cross_validate(std::vector<RatedSample>(3), FeatureSet(), {}, {}), InputError);
}
