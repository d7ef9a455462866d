#pragma once

#include <compare>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "model.hpp"

namespace icca {

// Number of distinct same-set addresses touched since the last access to a
// block's address. Infinity when there is no earlier access in scope or the
// value reaches the associativity.
class Age {
 public:
  static constexpr Count kInf = std::numeric_limits<Count>::max();

  constexpr Age() = default;
  constexpr explicit Age(Count v) : value_(v) {}
  static constexpr Age inf() { return Age(kInf); }

  constexpr bool infinite() const { return value_ == kInf; }
  constexpr Count value() const { return value_; }
  constexpr bool hits(Count assoc) const { return !infinite() && value_ < assoc; }

  // Saturate anything >= assoc to infinity.
  constexpr Age clamp(Count assoc) const { return hits(assoc) ? *this : inf(); }

  std::string str() const { return infinite() ? "inf" : std::to_string(value_); }

  friend constexpr auto operator<=>(Age, Age) = default;

 private:
  Count value_ = kInf;
};

// Scope of a reference: the whole program (first access) or an enclosing
// region's later iterations.
inline constexpr RegionId kProgramScope = std::numeric_limits<RegionId>::min();

struct ContextKey {
  BlockId block;
  RegionId scope = kProgramScope;
  friend auto operator<=>(const ContextKey&, const ContextKey&) = default;
};

using AgeTable = std::map<ContextKey, Age>;

// (scope, access count) pairs of one block, program scope first and then
// innermost to out-most. Zero-count scopes are skipped.
inline std::vector<std::pair<RegionId, Count>> block_contexts(const std::vector<const Region*>& chain,
                                                              bool first_only = false) {
  std::vector<std::pair<RegionId, Count>> out{{kProgramScope, 1}};
  if (first_only) return out;
  for (std::size_t l = 0; l < chain.size(); ++l) {
    Count d = chain[l]->count - 1;
    for (std::size_t a = l + 1; a < chain.size(); ++a) d = saturating_mul(d, chain[a]->count);
    if (d > 0) out.emplace_back(chain[l]->id, d);
  }
  return out;
}

// Keep only blocks mapping to `set` at `level`; empty regions disappear.
inline std::optional<Region> filter_region(const Region& r, const CacheConfig& cache, std::size_t level, Count set) {
  Region out{r.id, r.count, {}};
  for (const auto& item : r.body) {
    if (item.is_block()) {
      if (cache.set_of(level, item.block().address) == set) out.body.push_back(item.block());
    } else if (auto child = filter_region(item.region(), cache, level, set)) {
      out.body.push_back(std::move(*child));
    }
  }
  if (out.body.empty()) return std::nullopt;
  return out;
}

inline UrPath filter_set(const UrPath& p, const CacheConfig& cache, std::size_t level, Count set) {
  UrPath out;
  for (const auto& r : p.regions)
    if (auto f = filter_region(r, cache, level, set)) out.regions.push_back(std::move(*f));
  for (const auto& s : block_sites(out))
    if (p.first_only.count(s.block.id)) out.first_only.insert(s.block.id);
  return out;
}

inline std::set<Count> sets_used(const UrPath& p, const CacheConfig& cache, std::size_t level) {
  std::set<Count> out;
  for (const auto& r : p.regions)
    for_each_block(r, [&](const MemoryBlock& b, const auto&) { out.insert(cache.set_of(level, b.address)); });
  return out;
}

// Latest out-most index p < x whose region touches `a`.
inline std::optional<std::size_t> previous_outer(const std::vector<std::set<Address>>& omega, std::size_t x,
                                                 Address a) {
  for (std::size_t p = x - 1; p >= 1; --p)
    if (omega[p - 1].count(a)) return p;
  return std::nullopt;
}

inline std::vector<std::set<Address>> outer_address_sets(const UrPath& p) {
  std::vector<std::set<Address>> omega;
  omega.reserve(p.size());
  for (const auto& r : p.regions) omega.push_back(unique_addresses(r));
  return omega;
}

inline Age region_scope_age(const Region& scope, Address a, Count assoc) {
  auto om = unique_addresses(scope);
  om.erase(a);
  return Age(om.size()).clamp(assoc);
}

inline Age program_scope_age(const std::vector<std::set<Address>>& omega, std::size_t x, Address a,
                             Count assoc) {
  auto p = previous_outer(omega, x, a);
  if (!p) return Age::inf();
  std::set<Address> between;
  for (std::size_t i = *p; i <= x; ++i) between.insert(omega[i - 1].begin(), omega[i - 1].end());
  between.erase(a);
  return Age(between.size()).clamp(assoc);
}

// Ages of every context on a path already restricted to a single cache set.
inline AgeTable compute_ages(const UrPath& p, Count assoc) {
  AgeTable out;
  auto omega = outer_address_sets(p);
  for (const auto& site : block_sites(p)) {
    for (auto [scope, delta] : block_contexts(site.chain, site.first_only)) {
      (void)delta;
      Age age;
      if (scope == kProgramScope) {
        age = program_scope_age(omega, site.outer, site.block.address, assoc);
      } else {
        const Region* r = nullptr;
        for (const Region* c : site.chain)
          if (c->id == scope) r = c;
        age = region_scope_age(*r, site.block.address, assoc);
      }
      out[ContextKey{site.block.id, scope}] = age;
    }
  }
  return out;
}

inline void apply_overrides(AgeTable& ages, const std::map<BlockId, AgeOverride>& overrides, Count assoc) {
  auto conv = [&](Count v) { return v == Age::kInf ? Age::inf() : Age(v).clamp(assoc); };
  for (const auto& [id, ov] : overrides) {
    if (ov.program) {
      auto it = ages.find(ContextKey{id, kProgramScope});
      if (it != ages.end()) it->second = conv(*ov.program);
    }
    for (const auto& [rid, v] : ov.regions) {
      auto it = ages.find(ContextKey{id, rid});
      if (it != ages.end()) it->second = conv(v);
    }
  }
}

enum class CacClass { AlwaysHit, MayAccess };

inline CacClass classify(Age age, Count assoc) { return age.hits(assoc) ? CacClass::AlwaysHit : CacClass::MayAccess; }

// Ages of every context at `level`, each block judged in its own set.
inline AgeTable level_ages(const UrPath& model, const CacheConfig& cache, std::size_t level) {
  AgeTable all;
  Count assoc = cache.levels[level].associativity;
  for (Count s : sets_used(model, cache, level)) {
    auto part = compute_ages(filter_set(model, cache, level, s), assoc);
    all.insert(part.begin(), part.end());
  }
  return all;
}

namespace detail {

// Where each surviving block lands after hoisting out always-hit scopes.
inline void hoist_targets(const UrPath& model, const AgeTable& ages, Count assoc,
                          std::map<BlockId, RegionId>& target, std::set<BlockId>& first_only) {
  for (const auto& site : block_sites(model)) {
    const auto& chain = site.chain;
    bool program_hit = ages.at(ContextKey{site.block.id, kProgramScope}).hits(assoc);
    if (site.first_only) {
      if (!program_hit) {
        target[site.block.id] = chain.front()->id;
        first_only.insert(site.block.id);
      }
      continue;
    }
    std::size_t t = 0;
    while (t < chain.size()) {
      auto it = ages.find(ContextKey{site.block.id, chain[t]->id});
      // a scope that never repeats generates no accesses of its own
      bool hit = chain[t]->count == 1 || (it != ages.end() && it->second.hits(assoc));
      if (!hit) break;
      ++t;
    }
    if (t == chain.size()) {
      if (program_hit) continue;   // never reaches the next level
      // only the very first access misses
      target[site.block.id] = chain.front()->id;
      first_only.insert(site.block.id);
      continue;
    }
    target[site.block.id] = chain[t]->id;
  }
}

inline void collect_lifted(const Region& r, const std::map<BlockId, RegionId>& target, RegionId to,
                           std::vector<RegionItem>& out) {
  for (const auto& item : r.body) {
    if (item.is_block()) {
      auto it = target.find(item.block().id);
      if (it != target.end() && it->second == to) out.push_back(item.block());
    } else {
      collect_lifted(item.region(), target, to, out);
    }
  }
}

inline std::optional<Region> rebuild(const Region& r, const std::map<BlockId, RegionId>& target) {
  Region out{r.id, r.count, {}};
  for (const auto& item : r.body) {
    if (item.is_block()) {
      auto it = target.find(item.block().id);
      if (it != target.end() && it->second == r.id) out.body.push_back(item.block());
    } else {
      collect_lifted(item.region(), target, r.id, out.body);
      if (auto c = rebuild(item.region(), target)) out.body.push_back(std::move(*c));
    }
  }
  if (out.body.empty()) return std::nullopt;
  return out;
}

}  // namespace detail

// Model of the accesses that may reach level + 1. Always-hit blocks vanish;
// blocks whose inner scopes always hit are moved up to the innermost scope
// that may miss, so their count matches the misses of that scope. A block
// that only misses on its first access stays where it is, flagged first-only.
inline UrPath next_level_model(const UrPath& model, const CacheConfig& cache, std::size_t level) {
  auto ages = level_ages(model, cache, level);
  std::map<BlockId, RegionId> target;
  UrPath out;
  detail::hoist_targets(model, ages, cache.levels[level].associativity, target, out.first_only);
  for (const auto& r : model.regions)
    if (auto n = detail::rebuild(r, target)) out.regions.push_back(std::move(*n));
  return out;
}

// models[l] = accesses that may reach level l.
inline std::vector<UrPath> level_models(const UrPath& path, const CacheConfig& cache) {
  std::vector<UrPath> models{path};
  for (std::size_t l = 0; l + 1 < cache.levels.size(); ++l)
    models.push_back(next_level_model(models.back(), cache, l));
  return models;
}

// Worst-case latency of one path without interference. Counts of hoisted
// blocks may exceed the true number of lower-level accesses, which only
// makes the estimate larger.
inline Cycles intra_wcet(const UrPath& path, const CacheConfig& cache,
                         const std::map<BlockId, AgeOverride>* overrides = nullptr) {
  auto models = level_models(path, cache);
  Cycles total = 0;
  std::size_t shared = cache.shared_level();
  for (std::size_t l = 0; l < models.size(); ++l) {
    Count assoc = cache.levels[l].associativity;
    auto ages = level_ages(models[l], cache, l);
    if (overrides && l == shared) apply_overrides(ages, *overrides, assoc);
    bool last = l + 1 == models.size();
    for (const auto& site : block_sites(models[l])) {
      for (auto [scope, delta] : block_contexts(site.chain, site.first_only)) {
        bool hit = ages.at(ContextKey{site.block.id, scope}).hits(assoc);
        if (hit)
          total = saturating_add(total, saturating_mul(delta, cache.levels[l].hit_latency));
        else if (last)
          total = saturating_add(total, saturating_mul(delta, cache.miss_latency));
      }
    }
  }
  return total;
}

}  // namespace icca
