#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "io.hpp"
#include "model.hpp"

namespace icca {

struct GenParams {
  std::size_t local_regions = 3;     // max out-most regions of the analysed task
  std::size_t remote_regions = 3;    // max out-most regions per remote task
  std::size_t remote_cores = 1;
  std::size_t local_addresses = 4;   // address pool sizes
  std::size_t remote_addresses = 4;
  std::size_t shared_addresses = 1;  // addresses both sides may touch
  Count max_count = 3;
  Count min_assoc = 2;
  Count max_assoc = 4;
  Count max_sets = 2;
  Count max_accesses = 14;           // keep within the oracle's default limit
  bool two_level = false;            // add a private L1 in front
};

// Small, seeded generator; the same seed gives the same document.
class InstanceGenerator {
 public:
  InstanceGenerator(std::uint64_t seed, GenParams p) : rng_(seed), p_(p) {
    if (p_.local_regions == 0 || p_.remote_regions == 0 || p_.local_addresses == 0 || p_.remote_addresses == 0)
      throw ConfigError("generator sizes must be positive");
    if (p_.max_accesses < 2) throw ConfigError("generator access limit too small");
  }

  InputDocument next() {
    for (;;) {
      InputDocument d = draw();
      Count n = 0;
      for (const auto& t : d.tasks) n += total_accesses(t.paths[0]);
      if (n <= p_.max_accesses) return d;
    }
  }

 private:
  Count pick(Count lo, Count hi) { return lo + rng_() % (hi - lo + 1); }
  bool coin(unsigned percent) { return rng_() % 100 < percent; }

  Address local_addr() {
    return pick(0, p_.local_addresses - 1);
  }
  Address remote_addr() {
    // remote pool starts where the local pool's shared tail begins
    Address base = p_.local_addresses - std::min(p_.shared_addresses, p_.local_addresses);
    return base + pick(0, p_.remote_addresses - 1);
  }

  template <class A>
  Region make_region(RegionId& next_id, Count& next_block, A&& addr, int depth) {
    Region r;
    r.id = next_id++;
    if (depth == 0 && coin(45)) {
      r.count = 1;
      r.body.push_back(block("b" + std::to_string(++next_block), addr()));
      if (coin(25)) r.body.push_back(block("b" + std::to_string(++next_block), addr()));
      return r;
    }
    r.count = pick(2, p_.max_count);
    std::size_t items = pick(1, 2);
    for (std::size_t i = 0; i < items; ++i) {
      if (depth == 0 && coin(20))
        r.body.push_back(make_region(next_id, next_block, addr, depth + 1));
      else
        r.body.push_back(block("b" + std::to_string(++next_block), addr()));
    }
    return r;
  }

  InputDocument draw() {
    InputDocument d;
    Count assoc = pick(p_.min_assoc, p_.max_assoc);
    Count sets = pick(1, p_.max_sets);
    if (p_.two_level) {
      d.cache.levels = {CacheLevel{1, pick(1, 2), 1, false}, CacheLevel{sets, assoc, 5, true}};
    } else {
      d.cache.levels = {CacheLevel{sets, assoc, 5, true}};
    }
    d.cache.line_size = 16;
    d.cache.miss_latency = 100;

    auto make_task = [&](const std::string& name, std::size_t max_regions, bool local) {
      TaskCfg t;
      t.name = name;
      UrPath p;
      RegionId id = 1;
      Count nb = 0;
      std::size_t n = pick(1, max_regions);
      for (std::size_t i = 0; i < n; ++i) {
        if (local)
          p.regions.push_back(make_region(id, nb, [&] { return local_addr(); }, 0));
        else
          p.regions.push_back(make_region(id, nb, [&] { return remote_addr(); }, 0));
      }
      t.paths.push_back(std::move(p));
      return t;
    };
    d.tasks.push_back(make_task("local", p_.local_regions, true));
    d.under_analysis = "local";
    d.cores.push_back({"local"});
    for (std::size_t c = 0; c < p_.remote_cores; ++c) {
      std::string name = "remote" + std::to_string(c + 1);
      d.tasks.push_back(make_task(name, p_.remote_regions, false));
      d.cores.push_back({name});
    }
    return d;
  }

  std::mt19937_64 rng_;
  GenParams p_;
};

}  // namespace icca
