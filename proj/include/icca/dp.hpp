#pragma once

#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "contention.hpp"
#include "regions.hpp"

namespace icca {

// Remote interference seen by a CR that overlaps remote regions first..last.
using SegmentFn = std::function<Interference(std::size_t first, std::size_t last)>;

using Zeta = std::vector<std::size_t>;   // sorted ref indices counted as full misses

struct DpKey {
  std::size_t x_hat = 0;
  Zeta zeta;
  friend auto operator<=>(const DpKey&, const DpKey&) = default;
};

struct DpState {
  Count value = 0;
  std::size_t x_check = 0;   // segment of this CR: x_check..key.x_hat
  Count step = 0;            // misses contributed by this CR
  DpKey prev;                // predecessor key in the previous CR's table
};

struct SegmentChoice {
  std::size_t first = 0;
  std::size_t last = 0;
  Count misses = 0;
  friend bool operator==(const SegmentChoice&, const SegmentChoice&) = default;
};

struct DpResult {
  Count max_misses = 0;
  std::vector<SegmentChoice> witness;              // one per CR
  std::vector<std::map<DpKey, DpState>> tables;    // one per CR
};

struct DpOptions {
  const PhiObserver* observer = nullptr;
};

namespace detail {

inline Zeta next_zeta(const RefSet& refs, const std::vector<std::size_t>& members, const Zeta& prev,
                      const RegionBound& b) {
  Zeta z;
  for (auto k : members) {
    bool full = std::binary_search(prev.begin(), prev.end(), k);
    if (!full) {
      auto it = b.misses.find(k);
      full = it != b.misses.end() && it->second == refs[k].count;
    }
    if (full) z.push_back(k);
  }
  return z;
}

inline std::vector<std::size_t> minus(const std::vector<std::size_t>& members, const Zeta& z) {
  std::vector<std::size_t> out;
  for (auto k : members)
    if (!std::binary_search(z.begin(), z.end(), k)) out.push_back(k);
  return out;
}

}  // namespace detail

// Maximum total misses over every monotone assignment of remote segments to
// CRs (neighbouring segments share their boundary region). States are keyed
// by (last remote region used, full-miss set) and merged by max.
inline DpResult analyze_pair(const RefSet& refs, const CrSequence& crs, std::size_t remote_len, const SegmentFn& seg,
                             Count assoc, const DpOptions& opt = {}) {
  DpResult res;
  if (crs.regions.empty() || remote_len == 0) {
    for (std::size_t s = 0; s < crs.regions.size(); ++s) res.witness.push_back({0, 0, 0});
    return res;
  }
  std::map<std::pair<std::size_t, std::size_t>, Interference> seg_cache;
  auto interference = [&](std::size_t a, std::size_t b) -> const Interference& {
    auto key = std::make_pair(a, b);
    auto it = seg_cache.find(key);
    if (it == seg_cache.end()) it = seg_cache.emplace(key, seg(a, b)).first;
    return it->second;
  };

  res.tables.resize(crs.regions.size());
  for (std::size_t s = 0; s < crs.regions.size(); ++s) {
    const auto& members = crs.regions[s].refs;
    auto& table = res.tables[s];
    auto relax = [&](const DpKey& prev, Count base, std::size_t lo, const Zeta& zprev) {
      auto live = detail::minus(members, zprev);
      for (std::size_t xh = lo; xh <= remote_len; ++xh) {
        for (std::size_t xc = lo; xc <= xh; ++xc) {
          auto b = region_miss_bound(refs, live, interference(xc, xh), assoc, opt.observer);
          DpKey key{xh, detail::next_zeta(refs, members, zprev, b)};
          Count v = base + b.total;
          auto it = table.find(key);
          if (it == table.end() || v > it->second.value) table[key] = DpState{v, xc, b.total, prev};
        }
      }
    };
    if (s == 0) {
      relax(DpKey{0, {}}, 0, 1, {});
    } else {
      for (const auto& [k, st] : res.tables[s - 1]) relax(k, st.value, k.x_hat, k.zeta);
    }
  }

  const auto& last = res.tables.back();
  const DpKey* best = nullptr;
  for (const auto& [k, st] : last)
    if (!best || st.value > last.at(*best).value) best = &k;
  res.max_misses = last.at(*best).value;

  res.witness.resize(crs.regions.size());
  DpKey cur = *best;
  for (std::size_t s = crs.regions.size(); s-- > 0;) {
    const auto& st = res.tables[s].at(cur);
    res.witness[s] = SegmentChoice{st.x_check, cur.x_hat, st.step};
    cur = st.prev;
  }
  return res;
}

}  // namespace icca
