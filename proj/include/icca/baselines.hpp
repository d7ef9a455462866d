#pragma once

#include <map>
#include <set>
#include <vector>

#include "contention.hpp"
#include "dp.hpp"
#include "refs.hpp"

namespace icca {

// Region-level bound in the style of earlier work: local out-most regions
// and remote segments are matched monotonically, and whenever a segment
// touches the set at all, every hit-classified access homed in that local
// region is charged as a miss.
inline Count conflict_bound(const RefSet& refs, std::size_t local_len, std::size_t remote_len,
                            const SegmentFn& seg, Count assoc) {
  if (local_len == 0) return 0;
  std::vector<Count> hittable(local_len + 1, 0);
  for (const auto& r : refs)
    if (r.age.hits(assoc)) hittable[r.home] = saturating_add(hittable[r.home], r.count);
  if (remote_len == 0) return 0;

  std::map<std::pair<std::size_t, std::size_t>, bool> touch;
  auto conflicts = [&](std::size_t a, std::size_t b) {
    auto key = std::make_pair(a, b);
    auto it = touch.find(key);
    if (it == touch.end()) it = touch.emplace(key, !seg(a, b).queue.empty()).first;
    return it->second;
  };
  // best[xh]: best total so far with the last segment ending at xh
  std::vector<Count> best(remote_len + 1, 0);
  std::vector<bool> live(remote_len + 1, false);
  for (std::size_t xh = 1; xh <= remote_len; ++xh) {
    for (std::size_t xc = 1; xc <= xh; ++xc) {
      Count v = conflicts(xc, xh) ? hittable[1] : 0;
      if (!live[xh] || v > best[xh]) best[xh] = v;
      live[xh] = true;
    }
  }
  for (std::size_t x = 2; x <= local_len; ++x) {
    std::vector<Count> nb(remote_len + 1, 0);
    std::vector<bool> nl(remote_len + 1, false);
    for (std::size_t prev = 1; prev <= remote_len; ++prev) {
      if (!live[prev]) continue;
      for (std::size_t xh = prev; xh <= remote_len; ++xh)
        for (std::size_t xc = prev; xc <= xh; ++xc) {
          Count v = best[prev] + (conflicts(xc, xh) ? hittable[x] : 0);
          if (!nl[xh] || v > nb[xh]) nb[xh] = v;
          nl[xh] = true;
        }
    }
    best.swap(nb);
    live.swap(nl);
  }
  Count out = 0;
  for (std::size_t xh = 1; xh <= remote_len; ++xh)
    if (live[xh]) out = std::max(out, best[xh]);
  return out;
}

// Task-level bound: a hit-classified reference loses all of its hits as soon
// as the remote side touches at least ρ distinct addresses of its set.
inline Count footprint_bound(const RefSet& refs, std::size_t remote_unique, Count assoc) {
  Count total = 0;
  for (const auto& r : refs)
    if (r.age.hits(assoc) && r.rho(assoc) <= remote_unique) total = saturating_add(total, r.count);
  return total;
}

}  // namespace icca
