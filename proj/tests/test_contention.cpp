#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace icca;

namespace {

// Remote regions with queues {3,3,3} and {9,3}.
Region remote_u1() { return region(1, 3, {block("x", 20), block("y", 21), block("z", 22)}); }
Region remote_u2() { return region(2, 3, {region(3, 3, {block("p", 23)}), block("q", 24)}); }

// r0, r1 share an address; r2 is alone. κ = 3.
RefSet aggregation_refs() { return {fx::ref(0, 1, 4, 1), fx::ref(1, 1, 2, 0), fx::ref(2, 2, 4, 1)}; }

}  // namespace

TEST(Queue, BuiltFromRegions) {
  EXPECT_EQ(build_access_queue(remote_u1()), (AccessQueue{3, 3, 3}));
  EXPECT_EQ(build_access_queue(remote_u2()), (AccessQueue{9, 3}));
}

TEST(Queue, SameAddressBlocksMerge) {
  Region r = region(1, 2, {block("a", 5), block("b", 5), block("c", 6)});
  EXPECT_EQ(build_access_queue(r), (AccessQueue{4, 2}));
}

TEST(Queue, NormalizesOnConstruction) {
  AccessQueue q{0, 2, 5, 0, 1};
  EXPECT_EQ(q.entries, (std::vector<Count>{5, 2, 1}));
  EXPECT_EQ(q.total(), 8u);
}

TEST(Queue, Aggregation) {
  EXPECT_EQ(aggregate_queues({AccessQueue{3, 3, 3}, AccessQueue{9, 3}}), (AccessQueue{12, 6, 3}));
  EXPECT_EQ(aggregate_queues({AccessQueue{12, 6, 3}, AccessQueue{}}), (AccessQueue{12, 6, 3}));
  EXPECT_EQ(aggregate_queues({AccessQueue{1}, AccessQueue{1}, AccessQueue{1}}), (AccessQueue{3}));
}

TEST(Queue, Concatenation) {
  std::vector<AccessQueue> qs{AccessQueue{5}, AccessQueue{5, 1}};
  EXPECT_EQ(concatenate_queues(qs), (AccessQueue{5, 5, 1}));
}

TEST(Queue, FirstOnlyBlocksCountOnce) {
  UrPath p{{region(1, 4, {block("a", 1), block("b", 2)})}};
  p.first_only.insert("a");
  auto seq = summarize_remote(p);
  ASSERT_EQ(seq.size(), 1u);
  EXPECT_EQ(seq[0].queue, (AccessQueue{4, 1}));
  EXPECT_EQ(seq[0].addresses, (std::vector<Address>{1, 2}));
}

TEST(Phi, SingleReference) {
  auto r = phi(AccessQueue{3, 3, 3}, {Demand{0, 2, 4}});
  EXPECT_EQ(r.total, 4u);
  EXPECT_EQ(r.residual, (AccessQueue{1}));
  EXPECT_EQ(phi(AccessQueue{2, 1}, 2, 5), 1u);
  EXPECT_EQ(phi(AccessQueue{}, 1, 5), 0u);
  EXPECT_EQ(phi(AccessQueue{4}, 2, 5), 0u);
}

TEST(Phi, AggregatedTrace) {
  std::vector<AccessQueue> seen;
  PhiObserver obs = [&](const AccessQueue& before, const Demand&, Count) { seen.push_back(before); };
  auto r = phi(AccessQueue{12, 6, 3}, {Demand{1, 3, 2}, Demand{0, 2, 4}}, &obs);
  EXPECT_EQ(r.total, 6u);
  EXPECT_EQ(r.misses, (std::vector<Count>{2, 4}));   // as given, served by ρ
  ASSERT_EQ(seen.size(), 2u);
  EXPECT_EQ(seen[0], (AccessQueue{12, 6, 3}));
  EXPECT_EQ(seen[1], (AccessQueue{8, 3, 2}));
  EXPECT_EQ(r.residual, (AccessQueue{6, 1}));
}

TEST(Phi, TotalMassDropsByRhoPerMiss) {
  AccessQueue q{7, 5, 4, 2};
  auto r = phi(q, {Demand{0, 3, 100}});
  EXPECT_EQ(q.total() - r.residual.total(), 3 * r.total);
}

TEST(QueueInequalities, Conditions) {
  EXPECT_TRUE(queue_inequalities_hold(AccessQueue{3, 3, 3}, 2, 4, 4));
  EXPECT_FALSE(queue_inequalities_hold(AccessQueue{3, 3, 3}, 2, 4, 5));
  EXPECT_TRUE(queue_inequalities_hold(AccessQueue{}, 2, 4, 0));
  EXPECT_FALSE(queue_inequalities_hold(AccessQueue{1, 1}, 2, 4, 2));
}

TEST(RegionBound, AggregatedRegionTotals) {
  auto refs = aggregation_refs();
  std::vector<RemoteRegion> seq{summarize_remote(remote_u1()), summarize_remote(remote_u2())};
  auto in = segment_interference(seq, 1, 2);
  EXPECT_EQ(in.queue, (AccessQueue{12, 6, 3}));
  EXPECT_EQ(in.boundaries, 1u);
  auto b = region_miss_bound(refs, {0, 1, 2}, in, 3);
  EXPECT_EQ(b.phi_total, 10u);
  EXPECT_EQ(b.carry_on_total, 0u);
  EXPECT_EQ(b.total, 10u);
  EXPECT_EQ(b.misses.at(0), 4u);
  EXPECT_EQ(b.misses.at(1), 2u);
  EXPECT_EQ(b.misses.at(2), 4u);
}

TEST(RegionBound, PerRegionApplicationGivesEight) {
  auto refs = aggregation_refs();
  std::vector<AccessQueue> qs{AccessQueue{3, 3, 3}, AccessQueue{9, 3}};
  EXPECT_EQ(per_ur_phi_sum(refs, {0, 1, 2}, qs, 3), 8u);
}

TEST(RegionBound, CarryOnOnly) {
  auto local = fx::carry_local();
  auto refs = build_references(local, 3);
  auto seq = summarize_remote(fx::carry_remote());
  auto in = segment_interference(seq, 1, 2);
  EXPECT_EQ(in.queue, (AccessQueue{3}));
  std::vector<std::size_t> hit;
  for (const auto& r : refs)
    if (r.age.hits(3)) hit.push_back(r.index);
  ASSERT_EQ(hit.size(), 2u);
  auto b = region_miss_bound(refs, hit, in, 3);
  EXPECT_EQ(b.phi_total, 0u);
  EXPECT_EQ(b.carry_on_total, 2u);
  EXPECT_EQ(b.total, 2u);
}

TEST(RegionBound, SingleRemoteRegionHasNoCarryOn) {
  auto refs = build_references(fx::carry_local(), 3);
  auto seq = summarize_remote(fx::carry_remote());
  auto b = region_miss_bound(refs, {1, 3}, segment_interference(seq, 2, 2), 3);
  EXPECT_EQ(b.carry_on_total, 0u);
  EXPECT_EQ(b.total, 0u);
}

TEST(RegionBound, CarryOnNeedsEnoughDistinctAddresses) {
  // one remote address cannot push a ρ = 2 block out
  RefSet refs{fx::ref(0, 1, 3, 1)};
  std::vector<RemoteRegion> seq{summarize_remote(region(1, 1, {block("x", 9)})),
                                summarize_remote(region(2, 1, {block("x2", 9)}))};
  auto b = region_miss_bound(refs, {0}, segment_interference(seq, 1, 2), 3);
  EXPECT_EQ(b.total, 0u);
}

TEST(RegionBound, ObserverSeesEveryDemand) {
  auto refs = aggregation_refs();
  std::size_t calls = 0;
  bool ok = true;
  PhiObserver obs = [&](const AccessQueue& q, const Demand& d, Count n) {
    ++calls;
    ok = ok && queue_inequalities_hold(q, d.rho, d.count, n);
  };
  Interference in{AccessQueue{12, 6, 3}, 1, {20, 21, 22, 23, 24}};
  region_miss_bound(refs, {0, 1, 2}, in, 3, &obs);
  EXPECT_EQ(calls, 3u);
  EXPECT_TRUE(ok);
}

TEST(RegionBound, RepeatedAddressAcrossCoresCannotEvict) {
  // both cores hammer the same line: one distinct address, ρ = 2
  RefSet refs{fx::ref(0, 1, 5, 0)};
  Interference a{AccessQueue{5}, 0, {9}}, b{AccessQueue{5}, 0, {9}};
  std::vector<Interference> parts{a, b};
  auto in = combine_cores(parts);
  EXPECT_EQ(in.queue, (AccessQueue{5, 5}));
  EXPECT_EQ(region_miss_bound(refs, {0}, in, 2).total, 0u);
  Interference c{AccessQueue{5}, 0, {10}};
  std::vector<Interference> distinct{a, c};
  EXPECT_EQ(region_miss_bound(refs, {0}, combine_cores(distinct), 2).total, 5u);
}

TEST(Interference, CombineCores) {
  Interference a{AccessQueue{5}, 1, {1}};
  Interference b{AccessQueue{5, 2}, 2, {2, 3}};
  std::vector<Interference> parts{a, b};
  auto c = combine_cores(parts);
  EXPECT_EQ(c.queue, (AccessQueue{5, 5, 2}));
  EXPECT_EQ(c.boundaries, 3u);
  EXPECT_EQ(c.addresses, (std::vector<Address>{1, 2, 3}));
}

TEST(Interference, OutOfRangeSegmentIsEmpty) {
  std::vector<RemoteRegion> seq{summarize_remote(region(1, 1, {block("x", 9)}))};
  EXPECT_TRUE(segment_interference(seq, 2, 1).queue.empty());
  EXPECT_TRUE(segment_interference(seq, 1, 3).queue.empty());
}
