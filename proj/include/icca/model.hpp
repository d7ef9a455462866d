#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace icca {

using Address = std::uint64_t;   // cache-line granular
using Count = std::uint64_t;
using Cycles = std::uint64_t;
using RegionId = std::int64_t;
using BlockId = std::string;

// Malformed program or cache model.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model is well formed but cannot be analysed (bad cache geometry etc).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MemoryBlock {
  BlockId id;
  Address address = 0;

  friend bool operator==(const MemoryBlock&, const MemoryBlock&) = default;
};

struct RegionItem;

// Unordered region: body executes `count` times, internal order unknown.
struct Region {
  RegionId id = 0;
  Count count = 1;
  std::vector<RegionItem> body;
};

struct RegionItem {
  std::variant<MemoryBlock, Region> node;

  RegionItem(MemoryBlock b) : node(std::move(b)) {}
  RegionItem(Region r) : node(std::move(r)) {}

  bool is_block() const { return std::holds_alternative<MemoryBlock>(node); }
  const MemoryBlock& block() const { return std::get<MemoryBlock>(node); }
  const Region& region() const { return std::get<Region>(node); }
  MemoryBlock& block() { return std::get<MemoryBlock>(node); }
  Region& region() { return std::get<Region>(node); }
};

inline bool operator==(const Region& a, const Region& b);

inline bool operator==(const RegionItem& a, const RegionItem& b) {
  if (a.is_block() != b.is_block()) return false;
  return a.is_block() ? a.block() == b.block() : a.region() == b.region();
}

inline bool operator==(const Region& a, const Region& b) {
  return a.id == b.id && a.count == b.count && a.body == b.body;
}

// Ordered sequence of out-most regions along one control-flow path.
// Out-most region at vector position i has path index i + 1.
struct UrPath {
  std::vector<Region> regions;
  // Blocks that reach this cache level only on their very first access
  // (derived level models only).
  std::set<BlockId> first_only;

  std::size_t size() const { return regions.size(); }
  bool empty() const { return regions.empty(); }
  const Region& at(std::size_t index) const { return regions.at(index - 1); }

  friend bool operator==(const UrPath&, const UrPath&) = default;
};

// Supplied per-context ages for one block; nullopt entries mean "compute".
struct AgeOverride {
  std::optional<Count> program;          // Count max() encodes infinity
  std::map<RegionId, Count> regions;

  friend bool operator==(const AgeOverride&, const AgeOverride&) = default;
};

struct TaskCfg {
  std::string name;
  std::vector<UrPath> paths;
  std::optional<Cycles> intra_wcet;
  std::map<BlockId, AgeOverride> age_overrides;   // applied at the shared level

  friend bool operator==(const TaskCfg&, const TaskCfg&) = default;
};

struct CacheLevel {
  Count sets = 1;
  Count associativity = 1;
  Cycles hit_latency = 1;
  bool shared = false;

  friend bool operator==(const CacheLevel&, const CacheLevel&) = default;
};

struct CacheConfig {
  std::vector<CacheLevel> levels;   // levels[0] is closest to the core
  Count line_size = 16;
  Cycles miss_latency = 100;

  std::size_t level_count() const { return levels.size(); }

  Count set_of(std::size_t level, Address a) const { return a % levels.at(level).sets; }

  // First shared level; throws if none.
  std::size_t shared_level() const {
    for (std::size_t l = 0; l < levels.size(); ++l)
      if (levels[l].shared) return l;
    throw ConfigError("cache has no shared level");
  }

  // Latency of the level below `level` (memory past the last one).
  Cycles next_latency(std::size_t level) const {
    return level + 1 < levels.size() ? levels[level + 1].hit_latency : miss_latency;
  }

  void validate() const {
    if (levels.empty()) throw ConfigError("cache has no levels");
    if (line_size == 0) throw ConfigError("line size must be positive");
    bool seen_shared = false;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const auto& lv = levels[l];
      if (lv.sets == 0) throw ConfigError("level " + std::to_string(l + 1) + ": zero sets");
      if (lv.associativity == 0)
        throw ConfigError("level " + std::to_string(l + 1) + ": zero associativity");
      if (seen_shared && !lv.shared)
        throw ConfigError("private level below a shared level is not supported");
      seen_shared = seen_shared || lv.shared;
    }
    if (!seen_shared) throw ConfigError("cache has no shared level");
  }

  // Two-level default: split private L1, shared L2, 16 byte lines.
  static CacheConfig defaults(Count l2_ways = 2) {
    CacheConfig c;
    c.levels = {CacheLevel{8, 2, 1, false}, CacheLevel{32, l2_ways, 5, true}};
    c.line_size = 16;
    c.miss_latency = 100;
    return c;
  }

  // One shared level only, used heavily by the tests.
  static CacheConfig single(Count ways, Count sets = 1) {
    CacheConfig c;
    c.levels = {CacheLevel{sets, ways, 5, true}};
    return c;
  }

  friend bool operator==(const CacheConfig&, const CacheConfig&) = default;
};

// ---- construction helpers -------------------------------------------------

inline MemoryBlock block(BlockId id, Address address) { return MemoryBlock{std::move(id), address}; }

inline Region region(RegionId id, Count count, std::vector<RegionItem> body) {
  return Region{id, count, std::move(body)};
}

// ---- traversal ------------------------------------------------------------

// Visit every block with its chain of enclosing regions, innermost first.
template <class F>
void for_each_block(const Region& r, std::vector<const Region*>& chain, F&& f) {
  chain.insert(chain.begin(), &r);
  for (const auto& item : r.body) {
    if (item.is_block())
      f(item.block(), static_cast<const std::vector<const Region*>&>(chain));
    else
      for_each_block(item.region(), chain, f);
  }
  chain.erase(chain.begin());
}

template <class F>
void for_each_block(const Region& r, F&& f) {
  std::vector<const Region*> chain;
  for_each_block(r, chain, f);
}

template <class F>
void for_each_region(const Region& r, F&& f) {
  f(r);
  for (const auto& item : r.body)
    if (!item.is_block()) for_each_region(item.region(), f);
}

// Ω: unique addresses accessed inside a region (any depth).
inline std::set<Address> unique_addresses(const Region& r) {
  std::set<Address> out;
  for_each_block(r, [&](const MemoryBlock& b, const auto&) { out.insert(b.address); });
  return out;
}

inline Count saturating_mul(Count a, Count b) {
  if (a == 0 || b == 0) return 0;
  if (a > UINT64_MAX / b) return UINT64_MAX;
  return a * b;
}

inline Count saturating_add(Count a, Count b) { return a > UINT64_MAX - b ? UINT64_MAX : a + b; }

inline Count chain_product(const std::vector<const Region*>& chain) {
  Count p = 1;
  for (const Region* r : chain) p = saturating_mul(p, r->count);
  return p;
}

// Total number of accesses performed by one out-most region.
inline Count total_accesses(const Region& r) {
  Count n = 0;
  for_each_block(r, [&](const MemoryBlock&, const auto& chain) { n = saturating_add(n, chain_product(chain)); });
  return n;
}


// Where a block sits on a path.
struct BlockSite {
  MemoryBlock block;
  std::size_t outer = 0;                 // 1-based out-most index
  std::vector<const Region*> chain;      // innermost -> out-most
  bool first_only = false;

  Count accesses() const { return first_only ? 1 : chain_product(chain); }
};

inline std::vector<BlockSite> block_sites(const UrPath& p) {
  std::vector<BlockSite> out;
  for (std::size_t x = 0; x < p.regions.size(); ++x)
    for_each_block(p.regions[x], [&](const MemoryBlock& b, const auto& chain) {
      out.push_back(BlockSite{b, x + 1, chain, p.first_only.count(b.id) > 0});
    });
  return out;
}

inline Count total_accesses(const UrPath& p) {
  Count n = 0;
  for (const auto& s : block_sites(p)) n = saturating_add(n, s.accesses());
  return n;
}

// Enclosing regions of a block, innermost first.
inline std::vector<const Region*> nesting_chain(const UrPath& p, const BlockId& id) {
  for (const auto& r : p.regions) {
    std::vector<const Region*> found;
    bool hit = false;
    for_each_block(r, [&](const MemoryBlock& b, const auto& chain) {
      if (!hit && b.id == id) {
        found = chain;
        hit = true;
      }
    });
    if (hit) return found;
  }
  throw ModelError("unknown block id '" + id + "'");
}

inline void validate_region(const Region& r, std::set<RegionId>& ids, std::set<BlockId>& blocks) {
  if (!ids.insert(r.id).second) throw ModelError("duplicate region index " + std::to_string(r.id));
  if (r.count == 0) throw ModelError("region " + std::to_string(r.id) + " has zero count");
  if (r.body.empty()) throw ModelError("region " + std::to_string(r.id) + " has an empty body");
  for (const auto& item : r.body) {
    if (item.is_block()) {
      if (!blocks.insert(item.block().id).second)
        throw ModelError("block '" + item.block().id + "' appears twice on one path");
    } else {
      validate_region(item.region(), ids, blocks);
    }
  }
}

inline void validate_path(const UrPath& p) {
  if (p.empty()) throw ModelError("empty path");
  std::set<RegionId> ids;
  std::set<BlockId> blocks;
  for (const auto& r : p.regions) validate_region(r, ids, blocks);
}

// Checked path list of a task. Blocks sharing an id across paths must agree
// on the address.
inline std::vector<UrPath> enumerate_paths(const TaskCfg& task) {
  if (task.paths.empty()) throw ModelError("task '" + task.name + "' has no paths");
  std::map<BlockId, Address> addr;
  for (const auto& p : task.paths) {
    validate_path(p);
    for (const auto& r : p.regions)
      for_each_block(r, [&](const MemoryBlock& b, const auto&) {
        auto [it, fresh] = addr.emplace(b.id, b.address);
        if (!fresh && it->second != b.address)
          throw ModelError("block '" + b.id + "' has different addresses on different paths");
      });
  }
  return task.paths;
}

}  // namespace icca
