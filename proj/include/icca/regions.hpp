#pragma once

#include <set>
#include <vector>

#include "intra.hpp"
#include "model.hpp"
#include "refs.hpp"

namespace icca {

// Literal: the published formulas. Sound: program-scope references keep the
// home region in their window and region-scope references only see it.
enum class WindowRule { Sound, Literal };

struct Window {
  std::size_t alpha = 1;
  std::size_t beta = 0;
  bool empty() const { return alpha > beta; }
  bool contains(std::size_t x) const { return alpha <= x && x <= beta; }
  friend bool operator==(const Window&, const Window&) = default;
};

// Index of the first out-most region after the last earlier access to the
// reference's address (1 when there is none). Under the sound rule the
// region holding that access is itself included unless it touches nothing
// else, since remote accesses may land after the access but inside it.
inline std::size_t preceding_ur_index(const std::vector<std::set<Address>>& omega, const MemoryReference& r,
                                      WindowRule rule = WindowRule::Sound) {
  auto p = previous_outer(omega, r.home, r.address);
  if (!p) return 1;
  if (rule == WindowRule::Literal) return *p + 1;
  const auto& om = omega[*p - 1];
  return om.size() == 1 ? *p + 1 : *p;
}

inline std::size_t preceding_ur_index(const UrPath& p, const MemoryReference& r,
                                      WindowRule rule = WindowRule::Sound) {
  return preceding_ur_index(outer_address_sets(p), r, rule);
}

inline Window contention_window(const std::vector<std::set<Address>>& omega, const UrPath& p,
                                const MemoryReference& r, WindowRule rule = WindowRule::Sound) {
  std::size_t x = r.home;
  if (rule == WindowRule::Literal) {
    std::size_t a = r.count == 1 ? preceding_ur_index(omega, r, rule) : x;
    std::size_t b = p.at(x).count == 1 ? x - 1 : x;
    return {a, b};
  }
  if (!r.program_scope()) return {x, x};
  return {preceding_ur_index(omega, r, rule), x};
}

inline Window contention_window(const UrPath& p, const MemoryReference& r, WindowRule rule = WindowRule::Sound) {
  return contention_window(outer_address_sets(p), p, r, rule);
}

struct ContentionRegion {
  std::size_t first = 0;              // local out-most span, 1-based
  std::size_t last = 0;
  std::vector<std::size_t> refs;      // indices into the RefSet, ascending

  friend bool operator==(const ContentionRegion&, const ContentionRegion&) = default;
};

struct CrSequence {
  std::vector<ContentionRegion> regions;
  std::vector<Window> windows;        // per reference
  std::size_t path_length = 0;
  std::size_t max_distinct = 0;       // most distinct addresses in one CR
  bool premise_violated = false;      // some CR holds more than κ addresses

  std::size_t size() const { return regions.size(); }
};

inline CrSequence build_contention_regions(const UrPath& p, const RefSet& refs, Count assoc,
                                           WindowRule rule = WindowRule::Sound, bool optimize = true) {
  CrSequence seq;
  seq.path_length = p.size();
  auto omega = outer_address_sets(p);
  seq.windows.reserve(refs.size());
  for (const auto& r : refs) seq.windows.push_back(contention_window(omega, p, r, rule));

  for (std::size_t x = 1; x <= p.size(); ++x) {
    ContentionRegion c{x, x, {}};
    for (std::size_t k = 0; k < refs.size(); ++k)
      if (refs[k].age.hits(assoc) && seq.windows[k].contains(x)) c.refs.push_back(k);
    std::set<Address> addrs;
    for (auto k : c.refs) addrs.insert(refs[k].address);
    seq.max_distinct = std::max(seq.max_distinct, addrs.size());
    if (optimize) {
      if (c.refs.empty()) continue;
      if (!seq.regions.empty() && seq.regions.back().refs == c.refs && seq.regions.back().last + 1 == x) {
        seq.regions.back().last = x;
        continue;
      }
    }
    seq.regions.push_back(std::move(c));
  }
  seq.premise_violated = seq.max_distinct > assoc;
  return seq;
}

}  // namespace icca
