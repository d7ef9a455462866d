#pragma once

#include <vector>

#include "intra.hpp"
#include "model.hpp"

namespace icca {

// A block's accesses within one scope, counted together.
struct MemoryReference {
  std::size_t index = 0;      // position in its RefSet
  BlockId block;
  Address address = 0;
  Count count = 0;            // δ
  Age age;
  std::size_t home = 0;       // 1-based out-most region holding the block
  RegionId scope = kProgramScope;

  bool program_scope() const { return scope == kProgramScope; }
  Count rho(Count assoc) const { return age.hits(assoc) ? assoc - age.value() : 0; }

  friend bool operator==(const MemoryReference&, const MemoryReference&) = default;
};

using RefSet = std::vector<MemoryReference>;

// References of one path. The path is normally restricted to one cache set;
// `ages` must cover every context.
inline RefSet build_references(const UrPath& p, const AgeTable& ages) {
  RefSet out;
  for (const auto& site : block_sites(p)) {
    for (auto [scope, delta] : block_contexts(site.chain, site.first_only)) {
      auto it = ages.find(ContextKey{site.block.id, scope});
      if (it == ages.end()) throw ModelError("no age for block '" + site.block.id + "'");
      MemoryReference r;
      r.index = out.size();
      r.block = site.block.id;
      r.address = site.block.address;
      r.count = delta;
      r.age = it->second;
      r.home = site.outer;
      r.scope = scope;
      out.push_back(std::move(r));
    }
  }
  return out;
}

inline RefSet build_references(const UrPath& p, Count assoc) { return build_references(p, compute_ages(p, assoc)); }

}  // namespace icca
