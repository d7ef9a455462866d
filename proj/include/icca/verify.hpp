#pragma once

#include <vector>

#include "oracle.hpp"
#include "system.hpp"

namespace icca {

// Shared-level contexts the analysis treats as hits in isolation.
inline HitMask predicted_hits(const AgeTable& ages, Count assoc) {
  HitMask m;
  for (const auto& [k, a] : ages)
    if (a.hits(assoc)) m.insert(k);
  return m;
}

struct CaseVerdict {
  std::size_t path = 0;
  std::vector<std::size_t> remote_choice;
  Count set = 0;
  Count bound = 0;
  Count conflict = 0;
  Count footprint = 0;
  OracleResult oracle;

  bool sound() const { return bound >= oracle.max_flagged && oracle.intra_violations == 0; }
};

struct Verification {
  std::vector<CaseVerdict> cases;
  bool sound = true;
  bool exhaustive = true;
};

// Compare the proposed bound with the exhaustive oracle for every local path,
// remote combination and set at the first shared level.
inline Verification verify_system(const SystemModel& sys, const AnalysisOptions& opt, const OracleLimits& lim) {
  Verification v;
  const auto& cache = sys.cache;
  cache.validate();
  std::size_t level = cache.shared_level();
  Count assoc = cache.levels[level].associativity;
  auto local_paths = enumerate_paths(*sys.task);
  auto cands = all_remote_candidates(sys, opt);
  for (std::size_t pi = 0; pi < local_paths.size(); ++pi) {
    auto models = level_models(local_paths[pi], cache);
    AgeTable ages = level_ages(models[level], cache, level);
    apply_overrides(ages, sys.task->age_overrides, assoc);
    HitMask mask = predicted_hits(ages, assoc);
    std::vector<std::size_t> pick(cands.size(), 0);
    while (true) {
      std::vector<UrPath> raw, lowered;
      for (std::size_t c = 0; c < cands.size(); ++c) {
        raw.push_back(cands[c][pick[c]]);
        lowered.push_back(level_models(raw.back(), cache)[level]);
      }
      auto pair = analyze_path_pair(models[level], ages, lowered, cache, level, opt);
      for (const auto& sr : pair.sets) {
        CaseVerdict cv;
        cv.path = pi;
        cv.remote_choice = pick;
        cv.set = sr.set;
        cv.bound = sr.proposed;
        cv.conflict = sr.conflict;
        cv.footprint = sr.footprint;
        cv.oracle = max_interference_misses(local_paths[pi], raw, cache, sr.set, lim, &mask);
        v.sound = v.sound && cv.sound();
        v.exhaustive = v.exhaustive && cv.oracle.exhaustive;
        v.cases.push_back(std::move(cv));
      }
      std::size_t c = 0;
      for (; c < pick.size(); ++c) {
        if (++pick[c] < cands[c].size()) break;
        pick[c] = 0;
      }
      if (c == pick.size()) break;
    }
  }
  return v;
}

}  // namespace icca
