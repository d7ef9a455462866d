#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace icca;

namespace {

struct SegmentFixture : ::testing::Test {
  UrPath local = fx::dp_local();
  RefSet refs = build_references(local, fx::kDpAssoc);
  CrSequence crs = build_contention_regions(local, refs, fx::kDpAssoc);
  std::vector<RemoteRegion> remote = summarize_remote(fx::dp_remote());
  SegmentFn seg = fx::single_core(remote);
};

}  // namespace

TEST_F(SegmentFixture, SingleRefsNeedTheirSegments) {
  auto r1 = region_miss_bound(refs, {4}, seg(1, 1), fx::kDpAssoc);
  auto r2a = region_miss_bound(refs, {7}, seg(1, 1), fx::kDpAssoc);
  auto r2 = region_miss_bound(refs, {7}, seg(1, 2), fx::kDpAssoc);
  auto r3 = region_miss_bound(refs, {6}, seg(2, 3), fx::kDpAssoc);
  auto r3a = region_miss_bound(refs, {6}, seg(3, 3), fx::kDpAssoc);
  EXPECT_EQ(r1.total, 1u);
  EXPECT_EQ(r2a.total, 0u);
  EXPECT_EQ(r2.total, 1u);
  EXPECT_EQ(r3.total, 1u);
  EXPECT_EQ(r3a.total, 0u);
}

TEST_F(SegmentFixture, MaximumIsThree) {
  auto res = analyze_pair(refs, crs, remote.size(), seg, fx::kDpAssoc);
  EXPECT_EQ(res.max_misses, 3u);
  EXPECT_EQ(dp_exhaustive(refs, crs, remote.size(), seg, fx::kDpAssoc), 3u);
}

TEST_F(SegmentFixture, IntermediateStates) {
  auto res = analyze_pair(refs, crs, remote.size(), seg, fx::kDpAssoc);
  ASSERT_EQ(res.tables.size(), 4u);
  const auto& t1 = res.tables[0];
  ASSERT_TRUE(t1.count(DpKey{1, {4}}));
  EXPECT_EQ(t1.at(DpKey{1, {4}}).value, 1u);
  const auto& t2 = res.tables[1];
  ASSERT_TRUE(t2.count(DpKey{2, {4, 7}}));
  EXPECT_EQ(t2.at(DpKey{2, {4, 7}}).value, 2u);
  ASSERT_TRUE(t2.count(DpKey{1, {4}}));
  EXPECT_EQ(t2.at(DpKey{1, {4}}).value, 1u);
  const auto& t4 = res.tables[3];
  ASSERT_TRUE(t4.count(DpKey{3, {7}}));
  EXPECT_EQ(t4.at(DpKey{3, {7}}).value, 3u);
}

TEST_F(SegmentFixture, WitnessIsMonotoneAndAddsUp) {
  auto res = analyze_pair(refs, crs, remote.size(), seg, fx::kDpAssoc);
  ASSERT_EQ(res.witness.size(), crs.size());
  Count sum = 0;
  std::size_t prev = 1;
  for (const auto& w : res.witness) {
    EXPECT_LE(prev, w.first);
    EXPECT_LE(w.first, w.last);
    prev = w.last;
    sum += w.misses;
  }
  EXPECT_EQ(sum, res.max_misses);
}

TEST_F(SegmentFixture, NoReferenceCountedTwice) {
  auto res = analyze_pair(refs, crs, remote.size(), seg, fx::kDpAssoc);
  // every reference has δ = 1 here, so three misses means three references
  Count hittable = 0;
  for (const auto& r : refs)
    if (r.age.hits(fx::kDpAssoc)) hittable += r.count;
  EXPECT_LE(res.max_misses, hittable);
}

TEST(Dp, EmptyInputs) {
  RefSet refs;
  CrSequence crs;
  std::vector<RemoteRegion> remote;
  auto res = analyze_pair(refs, crs, 0, fx::single_core(remote), 4);
  EXPECT_EQ(res.max_misses, 0u);
  EXPECT_TRUE(res.witness.empty());
}

TEST(Dp, EmptyRemoteQueuesGiveZero) {
  UrPath local{{region(1, 3, {block("a", 1)})}};
  auto refs = build_references(local, 2);
  auto crs = build_contention_regions(local, refs, 2);
  std::vector<RemoteRegion> remote{RemoteRegion{}, RemoteRegion{}};
  auto res = analyze_pair(refs, crs, remote.size(), fx::single_core(remote), 2);
  EXPECT_EQ(res.max_misses, 0u);
}

TEST(Dp, SingleCrSingleRegionEqualsRegionBound) {
  UrPath local{{region(1, 4, {block("a", 1), block("b", 2)})}};
  auto refs = build_references(local, 3);
  auto crs = build_contention_regions(local, refs, 3);
  ASSERT_EQ(crs.size(), 1u);
  std::vector<RemoteRegion> remote{summarize_remote(region(1, 2, {block("x", 7), block("y", 8)}))};
  auto seg = fx::single_core(remote);
  auto res = analyze_pair(refs, crs, 1, seg, 3);
  EXPECT_EQ(res.max_misses, region_miss_bound(refs, crs.regions[0].refs, seg(1, 1), 3).total);
  EXPECT_EQ(res.max_misses, 4u);
}

TEST(Dp, FullMissSetBlocksRecounting) {
  // a4, b5 and a6 each sit in two CRs; their single accesses may miss once
  auto local = fx::window_path();
  auto refs = build_references(local, 4);
  auto crs = build_contention_regions(local, refs, 4);
  std::vector<RemoteRegion> remote{summarize_remote(
      region(1, 3, {block("v", 30), block("w", 31), block("x", 32), block("y", 33), block("z", 34)}))};
  auto seg = fx::single_core(remote);
  auto res = analyze_pair(refs, crs, 1, seg, 4);
  EXPECT_EQ(res.max_misses, 5u);
  EXPECT_EQ(dp_exhaustive(refs, crs, 1, seg, 4), 5u);
}
