#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <vector>

#include "model.hpp"
#include "refs.hpp"

namespace icca {

// Per-address remote access counts, non-increasing, zeros removed.
struct AccessQueue {
  std::vector<Count> entries;

  AccessQueue() = default;
  AccessQueue(std::initializer_list<Count> xs) : entries(xs) { normalize(); }
  explicit AccessQueue(std::vector<Count> xs) : entries(std::move(xs)) { normalize(); }

  void normalize() {
    std::erase(entries, Count{0});
    std::sort(entries.begin(), entries.end(), std::greater<>());
  }

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  Count total() const {
    Count t = 0;
    for (Count e : entries) t = saturating_add(t, e);
    return t;
  }

  friend bool operator==(const AccessQueue&, const AccessQueue&) = default;
};

inline AccessQueue build_access_queue(const Region& r) {
  std::map<Address, Count> per;
  for_each_block(r, [&](const MemoryBlock& b, const auto& chain) {
    per[b.address] = saturating_add(per[b.address], chain_product(chain));
  });
  std::vector<Count> xs;
  for (auto& [a, n] : per) xs.push_back(n);
  return AccessQueue(std::move(xs));
}

// ⊕: rank-wise sum, the i-th largest entries add up.
inline AccessQueue aggregate_queues(std::span<const AccessQueue> qs) {
  std::vector<Count> out;
  for (const auto& q : qs) {
    if (q.size() > out.size()) out.resize(q.size(), 0);
    for (std::size_t i = 0; i < q.size(); ++i) out[i] = saturating_add(out[i], q.entries[i]);
  }
  return AccessQueue(std::move(out));
}

inline AccessQueue aggregate_queues(std::initializer_list<AccessQueue> qs) {
  return aggregate_queues(std::span<const AccessQueue>(qs.begin(), qs.size()));
}

// Multiset union, used across cores whose addresses never coincide by rank.
inline AccessQueue concatenate_queues(std::span<const AccessQueue> qs) {
  std::vector<Count> out;
  for (const auto& q : qs) out.insert(out.end(), q.entries.begin(), q.entries.end());
  return AccessQueue(std::move(out));
}

// Summary of one remote out-most region.
struct RemoteRegion {
  AccessQueue queue;
  std::vector<Address> addresses;   // sorted, unique
};

inline RemoteRegion summarize_remote(const Region& r) {
  RemoteRegion out;
  out.queue = build_access_queue(r);
  auto om = unique_addresses(r);
  out.addresses.assign(om.begin(), om.end());
  return out;
}

// Honours first-only blocks of derived level models.
inline std::vector<RemoteRegion> summarize_remote(const UrPath& p) {
  std::vector<std::map<Address, Count>> per(p.size());
  for (const auto& s : block_sites(p))
    per[s.outer - 1][s.block.address] = saturating_add(per[s.outer - 1][s.block.address], s.accesses());
  std::vector<RemoteRegion> out;
  for (const auto& m : per) {
    RemoteRegion rr;
    std::vector<Count> xs;
    for (auto& [a, n] : m) {
      xs.push_back(n);
      rr.addresses.push_back(a);
    }
    rr.queue = AccessQueue(std::move(xs));
    out.push_back(std::move(rr));
  }
  return out;
}

// Everything the bound needs to know about the remote side of one CR.
struct Interference {
  AccessQueue queue;
  Count boundaries = 0;              // caps the carry-on misses
  std::vector<Address> addresses;    // distinct remote addresses, sorted

  friend bool operator==(const Interference&, const Interference&) = default;
};

// Consecutive remote regions first..last (1-based, inclusive) of one core.
inline Interference segment_interference(std::span<const RemoteRegion> seq, std::size_t first, std::size_t last) {
  Interference out;
  if (first > last || first == 0 || last > seq.size()) return out;
  std::vector<AccessQueue> qs;
  std::set<Address> addrs;
  for (std::size_t y = first; y <= last; ++y) {
    qs.push_back(seq[y - 1].queue);
    addrs.insert(seq[y - 1].addresses.begin(), seq[y - 1].addresses.end());
  }
  out.queue = aggregate_queues(qs);
  out.boundaries = last - first;
  out.addresses.assign(addrs.begin(), addrs.end());
  return out;
}

inline Interference whole_path_interference(std::span<const RemoteRegion> seq) {
  return segment_interference(seq, 1, seq.size());
}

// Interference of several cores at once: queues concatenate, boundary
// budgets add up.
inline Interference combine_cores(std::span<const Interference> parts) {
  Interference out;
  std::vector<AccessQueue> qs;
  std::set<Address> addrs;
  for (const auto& p : parts) {
    qs.push_back(p.queue);
    out.boundaries += p.boundaries;
    addrs.insert(p.addresses.begin(), p.addresses.end());
  }
  out.queue = concatenate_queues(qs);
  out.addresses.assign(addrs.begin(), addrs.end());
  return out;
}

// One reference as seen by Φ.
struct Demand {
  std::size_t ref = 0;
  Count rho = 1;
  Count count = 1;
};

// Called once per demand with the queue it starts from and the misses it got.
using PhiObserver = std::function<void(const AccessQueue& before, const Demand& d, Count misses)>;

struct PhiResult {
  Count total = 0;
  std::vector<Count> misses;     // parallel to the demands as given
  AccessQueue residual;
};

// Φ: demands are served in non-decreasing ρ; every miss consumes one access
// from each of the ρ largest entries.
inline PhiResult phi(AccessQueue q, const std::vector<Demand>& demands, const PhiObserver* observer = nullptr) {
  PhiResult res;
  res.misses.assign(demands.size(), 0);
  std::vector<std::size_t> order(demands.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return demands[a].rho < demands[b].rho; });
  auto& e = q.entries;
  for (auto i : order) {
    const auto& d = demands[i];
    AccessQueue before;
    if (observer) before = q;
    Count n = 0;
    while (n < d.count && d.rho > 0 && e.size() >= d.rho) {
      for (std::size_t j = 0; j < d.rho; ++j) --e[j];
      // only the decremented prefix can be out of order
      std::sort(e.begin(), e.end(), std::greater<>());
      while (!e.empty() && e.back() == 0) e.pop_back();
      ++n;
    }
    res.misses[i] = n;
    res.total += n;
    if (observer) (*observer)(before, d, n);
  }
  res.residual = std::move(q);
  return res;
}

inline Count phi(const AccessQueue& q, Count rho, Count count) { return phi(q, {Demand{0, rho, count}}).total; }

// Necessary for n misses drawn from q: n <= count and n * rho <= sum of min(v, n).
inline bool queue_inequalities_hold(const AccessQueue& q, Count rho, Count count, Count n) {
  if (n > count) return false;
  Count cap = 0;
  for (Count v : q.entries) cap = saturating_add(cap, std::min(v, n));
  return saturating_mul(n, rho) <= cap;
}

struct RegionBound {
  Count total = 0;
  Count phi_total = 0;
  Count carry_on_total = 0;
  std::map<std::size_t, Count> misses;   // ref index -> misses
};

// N(C, U'): Φ per address group on a fresh copy of the queue, plus at most
// one carry-on miss per remote boundary and address group. A reference needs
// ρ distinct remote addresses to be evicted at all, so references with a
// larger ρ are left out; this matters once queues of several cores are
// concatenated and may repeat an address.
inline RegionBound region_miss_bound(const RefSet& refs, const std::vector<std::size_t>& members,
                                     const Interference& in, Count assoc, const PhiObserver* observer = nullptr) {
  RegionBound out;
  const Count distinct = in.addresses.size();
  std::map<Address, std::vector<std::size_t>> groups;
  for (auto k : members)
    if (refs[k].age.hits(assoc) && refs[k].rho(assoc) <= distinct) groups[refs[k].address].push_back(k);
  for (auto& [addr, ks] : groups) {
    std::vector<Demand> ds;
    for (auto k : ks) ds.push_back(Demand{k, refs[k].rho(assoc), refs[k].count});
    auto pr = phi(in.queue, ds, observer);
    std::vector<std::pair<Demand, Count>> left;   // demand, remaining
    for (std::size_t i = 0; i < ds.size(); ++i) {
      out.misses[ds[i].ref] += pr.misses[i];
      if (pr.misses[i] < ds[i].count) left.emplace_back(ds[i], ds[i].count - pr.misses[i]);
    }
    Count spare = 0;
    for (auto& [d, r] : left) spare = saturating_add(spare, r);
    Count carry = std::min(spare, in.boundaries);
    std::stable_sort(left.begin(), left.end(), [](const auto& a, const auto& b) { return a.first.rho < b.first.rho; });
    Count c = carry;
    for (auto& [d, r] : left) {
      Count take = std::min(r, c);
      out.misses[d.ref] += take;
      c -= take;
    }
    out.phi_total += pr.total;
    out.carry_on_total += carry;
  }
  out.total = out.phi_total + out.carry_on_total;
  return out;
}

// Φ applied region by region with the address groups' budgets shrinking as
// they go; no aggregation and no carry-on. Reference point only.
inline Count per_ur_phi_sum(const RefSet& refs, const std::vector<std::size_t>& members,
                            std::span<const AccessQueue> queues, Count assoc) {
  std::map<std::size_t, Count> remaining;
  std::map<Address, std::vector<std::size_t>> groups;
  for (auto k : members)
    if (refs[k].age.hits(assoc)) {
      groups[refs[k].address].push_back(k);
      remaining[k] = refs[k].count;
    }
  Count total = 0;
  for (const auto& q : queues) {
    for (auto& [addr, ks] : groups) {
      std::vector<Demand> ds;
      for (auto k : ks) ds.push_back(Demand{k, refs[k].rho(assoc), remaining[k]});
      auto pr = phi(q, ds);
      for (std::size_t i = 0; i < ds.size(); ++i) remaining[ds[i].ref] -= pr.misses[i];
      total += pr.total;
    }
  }
  return total;
}

}  // namespace icca
