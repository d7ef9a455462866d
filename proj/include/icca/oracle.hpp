#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "contention.hpp"
#include "dp.hpp"
#include "intra.hpp"
#include "model.hpp"

namespace icca {

class OracleLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- LRU ------------------------------------------------------------------

// One fully associative LRU set.
class LruSet {
 public:
  explicit LruSet(Count ways) : ways_(ways) {}

  bool access(Address a) {
    auto it = std::find(lines_.begin(), lines_.end(), a);
    bool hit = it != lines_.end();
    if (hit) lines_.erase(it);
    lines_.insert(lines_.begin(), a);
    if (lines_.size() > ways_) lines_.pop_back();
    return hit;
  }

  const std::vector<Address>& lines() const { return lines_; }

 private:
  Count ways_;
  std::vector<Address> lines_;   // most recent first
};

// Hit flags of a trace run alone through one LRU set.
inline std::vector<bool> simulate_lru(const std::vector<Address>& trace, Count ways) {
  LruSet set(ways);
  std::vector<bool> out;
  out.reserve(trace.size());
  for (Address a : trace) out.push_back(set.access(a));
  return out;
}

// ---- concrete executions --------------------------------------------------

struct ConcreteAccess {
  Address address = 0;
  BlockId block;
  RegionId context = kProgramScope;   // scope this access is counted under
  friend auto operator<=>(const ConcreteAccess&, const ConcreteAccess&) = default;
};

// Fixed execution order of every region body, reused by all its iterations.
using Ordering = std::map<RegionId, std::vector<std::size_t>>;

namespace detail {

inline void unroll_region(const Region& r, const Ordering& ord, std::vector<std::pair<RegionId, Count>>& iters,
                          std::vector<ConcreteAccess>& out) {
  std::vector<std::size_t> idx;
  if (auto it = ord.find(r.id); it != ord.end()) {
    idx = it->second;
  } else {
    idx.resize(r.body.size());
    std::iota(idx.begin(), idx.end(), 0);
  }
  for (Count i = 0; i < r.count; ++i) {
    iters.emplace_back(r.id, i);
    for (auto j : idx) {
      const auto& item = r.body[j];
      if (item.is_block()) {
        // innermost scope whose iteration counter is past its first round
        RegionId ctx = kProgramScope;
        for (std::size_t d = iters.size(); d-- > 0;)
          if (iters[d].second > 0) {
            ctx = iters[d].first;
            break;
          }
        out.push_back(ConcreteAccess{item.block().address, item.block().id, ctx});
      } else {
        unroll_region(item.region(), ord, iters, out);
      }
    }
    iters.pop_back();
  }
}

inline void collect_orderable(const Region& r, std::vector<const Region*>& out) {
  if (r.body.size() > 1) out.push_back(&r);
  for (const auto& item : r.body)
    if (!item.is_block()) collect_orderable(item.region(), out);
}

inline Count factorial_capped(std::size_t n, Count cap) {
  Count f = 1;
  for (std::size_t i = 2; i <= n; ++i) {
    f = saturating_mul(f, i);
    if (f > cap) return cap + 1;
  }
  return f;
}

}  // namespace detail

inline std::vector<ConcreteAccess> unroll(const UrPath& p, const Ordering& ord = {}) {
  std::vector<ConcreteAccess> out;
  std::vector<std::pair<RegionId, Count>> iters;
  for (const auto& r : p.regions) detail::unroll_region(r, ord, iters, out);
  return out;
}

// All per-region permutations of a path, or a seeded sample of them when
// there are more than `cap`.
inline std::vector<Ordering> orderings(const UrPath& p, Count cap, bool sample, std::uint64_t seed, bool* complete) {
  std::vector<const Region*> rs;
  for (const auto& r : p.regions) detail::collect_orderable(r, rs);
  Count total = 1;
  for (auto* r : rs) total = saturating_mul(total, detail::factorial_capped(r->body.size(), cap));
  std::vector<Ordering> out;
  if (total <= cap) {
    if (complete) *complete = true;
    Ordering cur;
    for (auto* r : rs) {
      cur[r->id].resize(r->body.size());
      std::iota(cur[r->id].begin(), cur[r->id].end(), 0);
    }
    // odometer over the regions' permutations
    while (true) {
      out.push_back(cur);
      std::size_t i = 0;
      for (; i < rs.size(); ++i) {
        auto& v = cur[rs[i]->id];
        if (std::next_permutation(v.begin(), v.end())) break;
      }
      if (i == rs.size()) break;
    }
    return out;
  }
  if (!sample) throw OracleLimitError("too many intra-region orderings (" + std::to_string(total) + ")");
  if (complete) *complete = false;
  std::mt19937_64 rng(seed);
  for (Count n = 0; n < cap; ++n) {
    Ordering cur;
    for (auto* r : rs) {
      auto& v = cur[r->id];
      v.resize(r->body.size());
      std::iota(v.begin(), v.end(), 0);
      std::shuffle(v.begin(), v.end(), rng);
    }
    out.push_back(std::move(cur));
  }
  return out;
}

// Accesses of a private-cache-filtered trace that reach `level` in `set`.
inline std::vector<ConcreteAccess> reaching(const std::vector<ConcreteAccess>& trace, const CacheConfig& cache,
                                            std::size_t level, Count set) {
  std::vector<std::map<Count, LruSet>> priv(level);
  std::vector<ConcreteAccess> out;
  for (const auto& a : trace) {
    bool hit = false;
    for (std::size_t l = 0; l < level && !hit; ++l) {
      Count s = cache.set_of(l, a.address);
      auto it = priv[l].try_emplace(s, cache.levels[l].associativity).first;
      hit = it->second.access(a.address);
    }
    if (!hit && cache.set_of(level, a.address) == set) out.push_back(a);
  }
  return out;
}

struct OracleLimits {
  Count max_accesses = 14;          // unrolled accesses of all tasks together
  Count max_orderings = 5000;       // per task
  bool sample = false;              // sample orderings instead of failing
  std::uint64_t seed = 1;
};

// Contexts the analysis predicts to hit the shared level in isolation.
using HitMask = std::set<ContextKey>;

struct OracleResult {
  Count max_flagged = 0;            // interference misses, worst case
  Count max_flagged_any = 0;        // same without the hit mask
  Count intra_violations = 0;       // predicted hits that miss in isolation
  bool exhaustive = true;
  std::size_t local_streams = 0;
  std::size_t remote_combinations = 0;
};

namespace detail {

struct VecHash {
  std::size_t operator()(const std::vector<std::uint64_t>& v) const {
    std::size_t h = v.size();
    for (auto x : v) h ^= std::hash<std::uint64_t>()(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

// Worst interleaving of one local stream with fixed remote streams.
class Interleaver {
 public:
  Interleaver(const std::vector<Address>& local, const std::vector<char>& flag,
              const std::vector<std::vector<Address>>& remote, Count ways)
      : local_(local), flag_(flag), remote_(remote), ways_(ways) {}

  Count run() {
    std::vector<std::size_t> pos(remote_.size(), 0);
    std::vector<Address> lru;
    return best(0, pos, lru);
  }

 private:
  static bool touch(std::vector<Address>& lru, Address a, Count ways) {
    auto it = std::find(lru.begin(), lru.end(), a);
    bool hit = it != lru.end();
    if (hit) lru.erase(it);
    lru.insert(lru.begin(), a);
    if (lru.size() > ways) lru.pop_back();
    return hit;
  }

  Count best(std::size_t i, std::vector<std::size_t>& pos, std::vector<Address>& lru) {
    if (i == local_.size()) return 0;
    std::vector<std::uint64_t> key;
    key.reserve(2 + pos.size() + lru.size());
    key.push_back(i);
    key.insert(key.end(), pos.begin(), pos.end());
    key.push_back(lru.size());
    key.insert(key.end(), lru.begin(), lru.end());
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    Count v = 0;
    {
      auto next = lru;
      bool hit = touch(next, local_[i], ways_);
      Count gain = (!hit && flag_[i]) ? 1 : 0;
      v = gain + best(i + 1, pos, next);
    }
    for (std::size_t c = 0; c < remote_.size(); ++c) {
      if (pos[c] == remote_[c].size()) continue;
      auto next = lru;
      touch(next, remote_[c][pos[c]], ways_);
      ++pos[c];
      v = std::max(v, best(i, pos, next));
      --pos[c];
    }
    memo_.emplace(std::move(key), v);
    return v;
  }

  const std::vector<Address>& local_;
  const std::vector<char>& flag_;
  const std::vector<std::vector<Address>>& remote_;
  Count ways_;
  std::unordered_map<std::vector<std::uint64_t>, Count, VecHash> memo_;
};

inline std::vector<Address> addresses_of(const std::vector<ConcreteAccess>& t) {
  std::vector<Address> out;
  for (const auto& a : t) out.push_back(a.address);
  return out;
}

}  // namespace detail

// Worst number of local misses at the shared level (in `set`) that hit when
// the same local ordering runs alone. Every local ordering, every remote
// ordering and every interleaving is explored.
inline OracleResult max_interference_misses(const UrPath& local, const std::vector<UrPath>& remote_cores,
                                            const CacheConfig& cache, Count set, const OracleLimits& lim = {},
                                            const HitMask* mask = nullptr) {
  std::size_t level = cache.shared_level();
  Count ways = cache.levels[level].associativity;
  Count n = total_accesses(local);
  for (const auto& r : remote_cores) n = saturating_add(n, total_accesses(r));
  if (n > lim.max_accesses)
    throw OracleLimitError("instance has " + std::to_string(n) + " accesses, limit is " +
                           std::to_string(lim.max_accesses));

  OracleResult res;
  bool complete = true;
  // distinct shared-level streams per participant
  std::set<std::vector<ConcreteAccess>> local_streams;
  for (const auto& o : orderings(local, lim.max_orderings, lim.sample, lim.seed, &complete))
    local_streams.insert(reaching(unroll(local, o), cache, level, set));
  res.exhaustive = complete;

  std::vector<std::vector<std::vector<Address>>> remote_streams;
  for (std::size_t c = 0; c < remote_cores.size(); ++c) {
    std::set<std::vector<Address>> ss;
    bool comp = true;
    for (const auto& o : orderings(remote_cores[c], lim.max_orderings, lim.sample, lim.seed + c + 1, &comp))
      ss.insert(detail::addresses_of(reaching(unroll(remote_cores[c], o), cache, level, set)));
    res.exhaustive = res.exhaustive && comp;
    remote_streams.emplace_back(ss.begin(), ss.end());
  }
  res.local_streams = local_streams.size();

  for (const auto& ls : local_streams) {
    auto addrs = detail::addresses_of(ls);
    auto iso = simulate_lru(addrs, ways);
    std::vector<char> flag_any(ls.size()), flag(ls.size());
    for (std::size_t i = 0; i < ls.size(); ++i) {
      bool predicted = !mask || mask->count(ContextKey{ls[i].block, ls[i].context});
      flag_any[i] = iso[i];
      flag[i] = iso[i] && predicted;
      if (mask && predicted && !iso[i]) ++res.intra_violations;
    }
    // odometer over remote stream combinations
    std::vector<std::size_t> pick(remote_streams.size(), 0);
    bool any_empty = false;
    for (const auto& rs : remote_streams) any_empty = any_empty || rs.empty();
    while (!any_empty) {
      std::vector<std::vector<Address>> chosen;
      for (std::size_t c = 0; c < pick.size(); ++c) chosen.push_back(remote_streams[c][pick[c]]);
      ++res.remote_combinations;
      res.max_flagged = std::max(res.max_flagged, detail::Interleaver(addrs, flag, chosen, ways).run());
      if (mask)
        res.max_flagged_any = std::max(res.max_flagged_any, detail::Interleaver(addrs, flag_any, chosen, ways).run());
      std::size_t c = 0;
      for (; c < pick.size(); ++c) {
        if (++pick[c] < remote_streams[c].size()) break;
        pick[c] = 0;
      }
      if (c == pick.size()) break;
    }
  }
  if (!mask) res.max_flagged_any = res.max_flagged;
  return res;
}

// ---- brute-force references for the analytical pieces ----------------------

// Misses with the given ρ values can all happen within one remote region iff
// each can be served by ρ distinct addresses and no address is used more
// often than it is accessed. Bipartite degree condition, ρs sorted descending.
inline bool misses_fit(std::vector<Count> rhos, const AccessQueue& q) {
  std::sort(rhos.begin(), rhos.end(), std::greater<>());
  Count need = 0;
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    need += rhos[i];
    Count cap = 0;
    for (Count v : q.entries) cap += std::min<Count>(v, i + 1);
    if (need > cap) return false;
  }
  return true;
}

// Best total over all splits n[k][x] of the demands across remote regions
// such that every region can serve its share on its own.
inline Count max_assignment_bound(const std::vector<Demand>& demands, const std::vector<AccessQueue>& queues) {
  const std::size_t K = demands.size(), X = queues.size();
  if (K == 0 || X == 0) return 0;
  std::vector<Count> n(K * X, 0), used(K, 0);
  Count best = 0;
  std::function<void(std::size_t)> rec = [&](std::size_t cell) {
    if (cell == K * X) {
      Count tot = 0;
      for (std::size_t x = 0; x < X; ++x) {
        std::vector<Count> rhos;
        for (std::size_t k = 0; k < K; ++k) rhos.insert(rhos.end(), n[k * X + x], demands[k].rho);
        if (!misses_fit(std::move(rhos), queues[x])) return;
        for (std::size_t k = 0; k < K; ++k) tot += n[k * X + x];
      }
      best = std::max(best, tot);
      return;
    }
    std::size_t k = cell / X;
    for (Count v = 0; used[k] + v <= demands[k].count; ++v) {
      n[cell] = v;
      used[k] += v;
      rec(cell + 1);
      used[k] -= v;
    }
    n[cell] = 0;
  };
  rec(0);
  return best;
}

// Exhaustive search over every segment assignment allowed to the DP.
inline Count dp_exhaustive(const RefSet& refs, const CrSequence& crs, std::size_t remote_len, const SegmentFn& seg,
                           Count assoc) {
  if (crs.regions.empty() || remote_len == 0) return 0;
  Count best = 0;
  std::function<void(std::size_t, std::size_t, Zeta, Count)> rec = [&](std::size_t s, std::size_t lo, Zeta z,
                                                                      Count acc) {
    if (s == crs.regions.size()) {
      best = std::max(best, acc);
      return;
    }
    const auto& members = crs.regions[s].refs;
    auto live = detail::minus(members, z);
    for (std::size_t xc = lo; xc <= remote_len; ++xc)
      for (std::size_t xh = xc; xh <= remote_len; ++xh) {
        auto b = region_miss_bound(refs, live, seg(xc, xh), assoc);
        rec(s + 1, xh, detail::next_zeta(refs, members, z, b), acc + b.total);
      }
  };
  rec(0, 1, {}, 0);
  return best;
}

}  // namespace icca
