#pragma once

#include <future>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "baselines.hpp"
#include "contention.hpp"
#include "dp.hpp"
#include "intra.hpp"
#include "model.hpp"
#include "refs.hpp"
#include "regions.hpp"

namespace icca {

enum class Method { Proposed, Conflict, Footprint };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::Proposed: return "proposed";
    case Method::Conflict: return "conflict";
    case Method::Footprint: return "footprint";
  }
  return "?";
}

enum class PenaltyModel { MissMinusHit, FullMiss };

struct AnalysisOptions {
  WindowRule window_rule = WindowRule::Sound;
  bool optimize_crs = true;
  bool coarsen_remote = false;      // each remote task becomes one region
  unsigned jobs = 1;
  PenaltyModel penalty_model = PenaltyModel::MissMinusHit;
  std::optional<Cycles> penalty;    // fixed per-miss penalty, all levels
  std::size_t max_remote_combinations = 4096;
  const PhiObserver* observer = nullptr;
};

// Remote side of the analysis: per core, the tasks it runs in order.
struct SystemModel {
  CacheConfig cache;
  const TaskCfg* task = nullptr;
  std::vector<std::vector<const TaskCfg*>> remote_cores;
};

// Cycles charged for one extra miss at `level`.
inline Cycles miss_penalty(const CacheConfig& cache, std::size_t level, const AnalysisOptions& opt) {
  if (opt.penalty) return *opt.penalty;
  Cycles below = cache.next_latency(level);
  if (opt.penalty_model == PenaltyModel::FullMiss) return below;
  Cycles hit = cache.levels[level].hit_latency;
  return below > hit ? below - hit : 0;
}

inline Cycles compose_wcet(Cycles intra, Count misses, Cycles penalty) {
  return saturating_add(intra, saturating_mul(misses, penalty));
}

namespace detail {

inline void relabel(Region& r, RegionId& next_region, const std::string& prefix) {
  r.id = next_region++;
  for (auto& item : r.body) {
    if (item.is_block())
      item.block().id = prefix + item.block().id;
    else
      relabel(item.region(), next_region, prefix);
  }
}

}  // namespace detail

// Regions of several remote task paths run back to back on one core.
// Identifiers are rewritten so they stay unique.
inline UrPath build_remote_sequence(const std::vector<const TaskCfg*>& tasks, const std::vector<std::size_t>& choice,
                                    bool coarsen) {
  UrPath out;
  RegionId next = 1;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const UrPath& p = tasks[t]->paths.at(choice.at(t));
    std::string prefix = tasks[t]->name + "/";
    if (coarsen) {
      Region merged{0, 1, {}};
      for (const auto& r : p.regions) merged.body.push_back(r);
      detail::relabel(merged, next, prefix);
      out.regions.push_back(std::move(merged));
    } else {
      for (Region r : p.regions) {
        detail::relabel(r, next, prefix);
        out.regions.push_back(std::move(r));
      }
    }
  }
  return out;
}

// Every combination of path choices of the tasks on one core.
inline std::vector<UrPath> remote_candidates(const std::vector<const TaskCfg*>& tasks, bool coarsen,
                                             std::size_t limit) {
  std::vector<std::size_t> choice(tasks.size(), 0);
  std::vector<UrPath> out;
  while (true) {
    out.push_back(build_remote_sequence(tasks, choice, coarsen));
    if (out.size() > limit) throw ConfigError("too many remote path combinations");
    std::size_t i = 0;
    for (; i < tasks.size(); ++i) {
      if (++choice[i] < tasks[i]->paths.size()) break;
      choice[i] = 0;
    }
    if (i == tasks.size()) break;
  }
  return out;
}

struct SetReport {
  Count set = 0;
  Count proposed = 0;
  Count conflict = 0;
  Count footprint = 0;
  std::size_t refs = 0;
  std::size_t crs = 0;
  bool premise_violated = false;
  RefSet references;
  std::vector<ContentionRegion> regions;
  std::vector<SegmentChoice> witness;
  std::size_t remote_len = 0;
};

struct PairReport {
  std::vector<std::size_t> remote_choice;   // candidate index per remote core
  Count proposed = 0;
  Count conflict = 0;
  Count footprint = 0;
  std::vector<SetReport> sets;
};

// One local path against one fixed remote sequence per core, at one level,
// split by cache set.
inline PairReport analyze_path_pair(const UrPath& local_model, const AgeTable& local_ages,
                                    const std::vector<UrPath>& remote_models, const CacheConfig& cache,
                                    std::size_t level, const AnalysisOptions& opt) {
  PairReport rep;
  Count assoc = cache.levels[level].associativity;
  for (Count s : sets_used(local_model, cache, level)) {
    SetReport sr;
    sr.set = s;
    UrPath sub = filter_set(local_model, cache, level, s);
    RefSet refs = build_references(sub, local_ages);
    CrSequence crs = build_contention_regions(sub, refs, assoc, opt.window_rule, opt.optimize_crs);
    sr.refs = refs.size();
    sr.crs = crs.size();
    sr.premise_violated = crs.premise_violated;

    std::vector<std::vector<RemoteRegion>> cores;
    std::set<Address> remote_addrs;
    for (const auto& rm : remote_models) {
      auto seq = summarize_remote(filter_set(rm, cache, level, s));
      for (const auto& rr : seq) remote_addrs.insert(rr.addresses.begin(), rr.addresses.end());
      if (!seq.empty()) cores.push_back(std::move(seq));
    }

    if (!cores.empty()) {
      // the first busy core is matched region by region, the rest whole
      std::vector<Interference> others;
      for (std::size_t c = 1; c < cores.size(); ++c) others.push_back(whole_path_interference(cores[c]));
      SegmentFn seg = [&](std::size_t a, std::size_t b) {
        std::vector<Interference> parts{segment_interference(cores[0], a, b)};
        parts.insert(parts.end(), others.begin(), others.end());
        return combine_cores(parts);
      };
      DpOptions dopt;
      dopt.observer = opt.observer;
      auto dp = analyze_pair(refs, crs, cores[0].size(), seg, assoc, dopt);
      sr.proposed = dp.max_misses;
      sr.witness = dp.witness;
      sr.remote_len = cores[0].size();
      sr.conflict = conflict_bound(refs, sub.size(), cores[0].size(), seg, assoc);
      sr.footprint = footprint_bound(refs, remote_addrs.size(), assoc);
    }
    sr.regions = crs.regions;
    sr.references = refs;
    rep.proposed += sr.proposed;
    rep.conflict += sr.conflict;
    rep.footprint += sr.footprint;
    rep.sets.push_back(std::move(sr));
  }
  return rep;
}

struct LevelReport {
  std::size_t level = 0;
  Cycles penalty = 0;
  Count proposed = 0;
  Count conflict = 0;
  Count footprint = 0;
  PairReport worst;    // remote combination maximising the proposed bound
};

struct PathReport {
  std::size_t path = 0;
  Cycles intra_wcet = 0;
  std::vector<LevelReport> levels;

  Count misses(Method m) const {
    Count t = 0;
    for (const auto& l : levels) t += m == Method::Proposed ? l.proposed : m == Method::Conflict ? l.conflict : l.footprint;
    return t;
  }
  Cycles cycles(Method m) const {
    Cycles t = 0;
    for (const auto& l : levels) {
      Count n = m == Method::Proposed ? l.proposed : m == Method::Conflict ? l.conflict : l.footprint;
      t = saturating_add(t, saturating_mul(n, l.penalty));
    }
    return t;
  }
};

struct MethodSummary {
  Count misses = 0;
  Cycles interference = 0;
  Cycles wcet = 0;
  std::size_t path = 0;
};

struct TaskReport {
  std::string task;
  std::vector<PathReport> paths;
  std::map<Method, MethodSummary> methods;
};

inline std::vector<std::vector<UrPath>> all_remote_candidates(const SystemModel& sys, const AnalysisOptions& opt) {
  std::vector<std::vector<UrPath>> out;
  for (const auto& core : sys.remote_cores) out.push_back(remote_candidates(core, opt.coarsen_remote, opt.max_remote_combinations));
  return out;
}

// Full analysis of the task under analysis against every remote core.
inline TaskReport analyze_system(const SystemModel& sys, const AnalysisOptions& opt = {}) {
  if (!sys.task) throw ModelError("no task under analysis");
  sys.cache.validate();
  auto local_paths = enumerate_paths(*sys.task);
  for (const auto& core : sys.remote_cores)
    for (const auto* t : core) enumerate_paths(*t);

  const auto& cache = sys.cache;
  std::vector<std::size_t> shared;
  for (std::size_t l = 0; l < cache.levels.size(); ++l)
    if (cache.levels[l].shared) shared.push_back(l);

  // remote candidates, already lowered to each level
  auto cands = all_remote_candidates(sys, opt);
  std::vector<std::vector<std::vector<UrPath>>> lowered(cands.size());   // core, candidate, level
  std::size_t combos = 1;
  for (std::size_t c = 0; c < cands.size(); ++c) {
    for (const auto& p : cands[c]) lowered[c].push_back(level_models(p, cache));
    combos *= cands[c].size();
    if (combos > opt.max_remote_combinations) throw ConfigError("too many remote path combinations");
  }

  TaskReport rep;
  rep.task = sys.task->name;
  rep.paths.resize(local_paths.size());

  auto work = [&](std::size_t pi) {
    PathReport pr;
    pr.path = pi;
    auto models = level_models(local_paths[pi], cache);
    pr.intra_wcet = sys.task->intra_wcet ? *sys.task->intra_wcet
                                         : intra_wcet(local_paths[pi], cache, &sys.task->age_overrides);
    for (std::size_t li = 0; li < shared.size(); ++li) {
      std::size_t level = shared[li];
      LevelReport lr;
      lr.level = level;
      lr.penalty = miss_penalty(cache, level, opt);
      AgeTable ages = level_ages(models[level], cache, level);
      if (li == 0) apply_overrides(ages, sys.task->age_overrides, cache.levels[level].associativity);
      std::vector<std::size_t> pick(cands.size(), 0);
      bool first = true;
      while (true) {
        std::vector<UrPath> rm;
        for (std::size_t c = 0; c < cands.size(); ++c) rm.push_back(lowered[c][pick[c]][level]);
        auto pair = analyze_path_pair(models[level], ages, rm, cache, level, opt);
        pair.remote_choice = pick;
        if (first || pair.proposed > lr.proposed) {
          lr.proposed = pair.proposed;
          lr.worst = pair;
        }
        lr.conflict = first ? pair.conflict : std::max(lr.conflict, pair.conflict);
        lr.footprint = first ? pair.footprint : std::max(lr.footprint, pair.footprint);
        first = false;
        std::size_t c = 0;
        for (; c < pick.size(); ++c) {
          if (++pick[c] < cands[c].size()) break;
          pick[c] = 0;
        }
        if (c == pick.size()) break;
      }
      pr.levels.push_back(std::move(lr));
    }
    return pr;
  };

  unsigned jobs = std::max(1u, opt.jobs);
  for (std::size_t start = 0; start < local_paths.size(); start += jobs) {
    std::vector<std::future<PathReport>> fs;
    for (std::size_t pi = start; pi < std::min(local_paths.size(), start + jobs); ++pi)
      fs.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, work, pi));
    for (std::size_t i = 0; i < fs.size(); ++i) rep.paths[start + i] = fs[i].get();
  }

  for (Method m : {Method::Proposed, Method::Conflict, Method::Footprint}) {
    MethodSummary ms;
    bool first = true;
    for (const auto& p : rep.paths) {
      Cycles w = saturating_add(p.intra_wcet, p.cycles(m));   // per-level penalties differ
      if (first || w > ms.wcet) {
        ms.wcet = w;
        ms.path = p.path;
        ms.interference = p.cycles(m);
      }
      ms.misses = first ? p.misses(m) : std::max(ms.misses, p.misses(m));
      first = false;
    }
    rep.methods[m] = ms;
  }
  return rep;
}

}  // namespace icca
