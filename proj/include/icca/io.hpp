#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "model.hpp"
#include "oracle.hpp"
#include "system.hpp"

namespace icca {

using Json = nlohmann::ordered_json;

// Unreadable or schema-violating input.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DocumentOptions {
  std::vector<Method> methods{Method::Proposed, Method::Conflict, Method::Footprint};
  PenaltyModel penalty_model = PenaltyModel::MissMinusHit;
  std::optional<Cycles> penalty;
  WindowRule window_rule = WindowRule::Sound;
  bool optimize_crs = true;
  bool coarsen_remote = false;
  std::uint64_t seed = 1;
  OracleLimits oracle;

  friend bool operator==(const DocumentOptions& a, const DocumentOptions& b) {
    return a.methods == b.methods && a.penalty_model == b.penalty_model && a.penalty == b.penalty &&
           a.window_rule == b.window_rule && a.optimize_crs == b.optimize_crs &&
           a.coarsen_remote == b.coarsen_remote && a.seed == b.seed &&
           a.oracle.max_accesses == b.oracle.max_accesses && a.oracle.max_orderings == b.oracle.max_orderings &&
           a.oracle.sample == b.oracle.sample && a.oracle.seed == b.oracle.seed;
  }
};

struct InputDocument {
  std::string description;
  CacheConfig cache;
  std::vector<TaskCfg> tasks;
  std::string under_analysis;
  std::vector<std::vector<std::string>> cores;
  DocumentOptions options;

  friend bool operator==(const InputDocument&, const InputDocument&) = default;

  const TaskCfg& task(const std::string& name) const {
    for (const auto& t : tasks)
      if (t.name == name) return t;
    throw InputError("unknown task '" + name + "'");
  }

  // Cores other than the one running the analysed task.
  SystemModel system() const {
    SystemModel sys;
    sys.cache = cache;
    sys.task = &task(under_analysis);
    for (const auto& core : cores) {
      if (std::find(core.begin(), core.end(), under_analysis) != core.end()) continue;
      std::vector<const TaskCfg*> ts;
      for (const auto& n : core) ts.push_back(&task(n));
      sys.remote_cores.push_back(std::move(ts));
    }
    return sys;
  }

  AnalysisOptions analysis_options() const {
    AnalysisOptions o;
    o.window_rule = options.window_rule;
    o.optimize_crs = options.optimize_crs;
    o.coarsen_remote = options.coarsen_remote;
    o.penalty_model = options.penalty_model;
    o.penalty = options.penalty;
    return o;
  }
};

namespace detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
  throw InputError(where + ": " + what);
}

inline const Json& need(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing '") + key + "'");
  return *it;
}

inline Count as_count(const Json& j, const std::string& where) {
  if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<std::int64_t>() < 0))
    fail(where, "expected a non-negative integer");
  return j.get<Count>();
}

inline Count count_or(const Json& j, const char* key, Count dflt, const std::string& where) {
  auto it = j.find(key);
  return it == j.end() ? dflt : as_count(*it, where + "." + key);
}

inline bool bool_or(const Json& j, const char* key, bool dflt, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return dflt;
  if (!it->is_boolean()) fail(where + "." + key, "expected a boolean");
  return it->get<bool>();
}

inline Count age_value(const Json& j, const std::string& where) {
  if (j.is_string() && j.get<std::string>() == "inf") return Age::kInf;
  return as_count(j, where);
}

struct ParseCtx {
  Count line_size = 16;
  Count next_block = 0;
};

inline Region parse_region(const Json& j, ParseCtx& ctx, const std::string& where) {
  Region r;
  const Json& id = need(j, "id", where);
  if (!id.is_number_integer()) fail(where + ".id", "expected an integer");
  r.id = id.get<RegionId>();
  r.count = count_or(j, "count", 1, where);
  const Json& body = need(j, "body", where);
  if (!body.is_array()) fail(where + ".body", "expected an array");
  for (std::size_t i = 0; i < body.size(); ++i) {
    std::string w = where + ".body[" + std::to_string(i) + "]";
    const Json& item = body[i];
    if (!item.is_object()) fail(w, "expected an object");
    if (item.contains("block") || item.contains("byte")) {
      MemoryBlock b;
      if (item.contains("block"))
        b.address = as_count(item["block"], w + ".block");
      else
        b.address = as_count(item["byte"], w + ".byte") / ctx.line_size;
      ++ctx.next_block;
      if (item.contains("id")) {
        if (!item["id"].is_string()) fail(w + ".id", "expected a string");
        b.id = item["id"].get<std::string>();
      } else {
        b.id = "b" + std::to_string(ctx.next_block);
      }
      r.body.emplace_back(std::move(b));
    } else if (item.contains("body")) {
      r.body.emplace_back(parse_region(item, ctx, w));
    } else {
      fail(w, "expected a block or a region");
    }
  }
  return r;
}

inline CacheConfig parse_cache(const Json& j) {
  const std::string w = "cache";
  if (!j.is_object()) fail(w, "expected an object");
  CacheConfig c;
  c.line_size = count_or(j, "line_size", 16, w);
  c.miss_latency = count_or(j, "miss_latency", 100, w);
  const Json& lv = need(j, "levels", w);
  if (!lv.is_array()) fail(w + ".levels", "expected an array");
  for (std::size_t i = 0; i < lv.size(); ++i) {
    std::string wl = w + ".levels[" + std::to_string(i) + "]";
    CacheLevel l;
    l.sets = as_count(need(lv[i], "sets", wl), wl + ".sets");
    l.associativity = as_count(need(lv[i], "associativity", wl), wl + ".associativity");
    l.hit_latency = count_or(lv[i], "hit_latency", 1, wl);
    l.shared = bool_or(lv[i], "shared", false, wl);
    c.levels.push_back(l);
  }
  return c;
}

inline Method parse_method(const std::string& s) {
  if (s == "proposed") return Method::Proposed;
  if (s == "conflict") return Method::Conflict;
  if (s == "footprint") return Method::Footprint;
  throw InputError("unknown method '" + s + "'");
}

inline DocumentOptions parse_options(const Json& j) {
  DocumentOptions o;
  const std::string w = "options";
  if (!j.is_object()) fail(w, "expected an object");
  if (j.contains("methods")) {
    o.methods.clear();
    for (const auto& m : j["methods"]) {
      if (!m.is_string()) fail(w + ".methods", "expected strings");
      o.methods.push_back(parse_method(m.get<std::string>()));
    }
  }
  if (j.contains("penalty_model")) {
    auto s = j["penalty_model"].get<std::string>();
    if (s == "miss_minus_hit")
      o.penalty_model = PenaltyModel::MissMinusHit;
    else if (s == "full_miss")
      o.penalty_model = PenaltyModel::FullMiss;
    else
      fail(w + ".penalty_model", "unknown value '" + s + "'");
  }
  if (j.contains("penalty")) o.penalty = as_count(j["penalty"], w + ".penalty");
  if (j.contains("window_rule")) {
    auto s = j["window_rule"].get<std::string>();
    if (s == "sound")
      o.window_rule = WindowRule::Sound;
    else if (s == "literal")
      o.window_rule = WindowRule::Literal;
    else
      fail(w + ".window_rule", "unknown value '" + s + "'");
  }
  o.optimize_crs = bool_or(j, "optimize_crs", true, w);
  o.coarsen_remote = bool_or(j, "coarsen_remote", false, w);
  o.seed = count_or(j, "seed", 1, w);
  if (j.contains("oracle")) {
    const auto& oj = j["oracle"];
    o.oracle.max_accesses = count_or(oj, "max_accesses", o.oracle.max_accesses, w + ".oracle");
    o.oracle.max_orderings = count_or(oj, "max_orderings", o.oracle.max_orderings, w + ".oracle");
    o.oracle.sample = bool_or(oj, "sample", false, w + ".oracle");
  }
  o.oracle.seed = o.seed;
  return o;
}

}  // namespace detail

inline InputDocument parse_document(const Json& j) {
  using namespace detail;
  if (!j.is_object()) throw InputError("document: expected an object");
  InputDocument doc;
  if (j.contains("description")) doc.description = j["description"].get<std::string>();
  doc.cache = parse_cache(need(j, "cache", "document"));

  const Json& tasks = need(j, "tasks", "document");
  if (!tasks.is_array() || tasks.empty()) fail("tasks", "expected a non-empty array");
  std::set<std::string> names;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    std::string w = "tasks[" + std::to_string(t) + "]";
    const Json& tj = tasks[t];
    TaskCfg task;
    const Json& name = need(tj, "name", w);
    if (!name.is_string()) fail(w + ".name", "expected a string");
    task.name = name.get<std::string>();
    if (!names.insert(task.name).second) fail(w, "duplicate task name '" + task.name + "'");
    if (bool_or(tj, "under_analysis", false, w)) {
      if (!doc.under_analysis.empty()) fail(w, "more than one task under analysis");
      doc.under_analysis = task.name;
    }
    if (tj.contains("intra_wcet")) task.intra_wcet = as_count(tj["intra_wcet"], w + ".intra_wcet");
    ParseCtx ctx{doc.cache.line_size, 0};
    const Json& paths = need(tj, "paths", w);
    if (!paths.is_array()) fail(w + ".paths", "expected an array");
    for (std::size_t p = 0; p < paths.size(); ++p) {
      std::string wp = w + ".paths[" + std::to_string(p) + "]";
      if (!paths[p].is_array()) fail(wp, "expected an array of regions");
      UrPath path;
      for (std::size_t r = 0; r < paths[p].size(); ++r)
        path.regions.push_back(parse_region(paths[p][r], ctx, wp + "[" + std::to_string(r) + "]"));
      task.paths.push_back(std::move(path));
    }
    if (tj.contains("ages")) {
      for (const auto& [bid, aj] : tj["ages"].items()) {
        std::string wa = w + ".ages." + bid;
        AgeOverride ov;
        if (aj.contains("program")) ov.program = age_value(aj["program"], wa + ".program");
        if (aj.contains("regions"))
          for (const auto& [rid, v] : aj["regions"].items()) {
            RegionId id;
            try {
              id = std::stoll(rid);
            } catch (...) {
              fail(wa + ".regions", "region keys must be integers");
            }
            ov.regions[id] = age_value(v, wa + ".regions." + rid);
          }
        task.age_overrides[bid] = std::move(ov);
      }
    }
    try {
      enumerate_paths(task);
    } catch (const ModelError& e) {
      fail(w, e.what());
    }
    doc.tasks.push_back(std::move(task));
  }
  if (doc.under_analysis.empty()) fail("tasks", "no task is marked under_analysis");

  if (j.contains("cores")) {
    const Json& cj = j["cores"];
    if (!cj.is_array()) fail("cores", "expected an array of task-name arrays");
    std::set<std::string> placed;
    for (const auto& core : cj) {
      std::vector<std::string> c;
      for (const auto& n : core) {
        auto s = n.get<std::string>();
        if (!names.count(s)) fail("cores", "unknown task '" + s + "'");
        if (!placed.insert(s).second) fail("cores", "task '" + s + "' placed twice");
        c.push_back(s);
      }
      doc.cores.push_back(std::move(c));
    }
    if (!placed.count(doc.under_analysis)) fail("cores", "task under analysis is not placed on a core");
  } else {
    // one core per task
    for (const auto& t : doc.tasks) doc.cores.push_back({t.name});
  }
  if (j.contains("options")) doc.options = parse_options(j["options"]);
  return doc;
}

inline InputDocument parse_document_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
  try {
    return parse_document(j);
  } catch (const Json::exception& e) {
    throw InputError(std::string("bad value: ") + e.what());
  }
}

inline InputDocument load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_document_text(ss.str());
}

// ---- serialisation --------------------------------------------------------

inline Json to_json(const Region& r) {
  Json body = Json::array();
  for (const auto& item : r.body) {
    if (item.is_block())
      body.push_back(Json{{"block", item.block().address}, {"id", item.block().id}});
    else
      body.push_back(to_json(item.region()));
  }
  return Json{{"id", r.id}, {"count", r.count}, {"body", std::move(body)}};
}

inline Json age_json(Count v) { return v == Age::kInf ? Json("inf") : Json(v); }

inline Json to_json(const InputDocument& d) {
  Json j;
  if (!d.description.empty()) j["description"] = d.description;
  Json levels = Json::array();
  for (const auto& l : d.cache.levels)
    levels.push_back(Json{{"sets", l.sets}, {"associativity", l.associativity}, {"hit_latency", l.hit_latency},
                          {"shared", l.shared}});
  j["cache"] = Json{{"line_size", d.cache.line_size}, {"miss_latency", d.cache.miss_latency}, {"levels", levels}};
  Json tasks = Json::array();
  for (const auto& t : d.tasks) {
    Json tj;
    tj["name"] = t.name;
    if (t.name == d.under_analysis) tj["under_analysis"] = true;
    if (t.intra_wcet) tj["intra_wcet"] = *t.intra_wcet;
    Json paths = Json::array();
    for (const auto& p : t.paths) {
      Json pj = Json::array();
      for (const auto& r : p.regions) pj.push_back(to_json(r));
      paths.push_back(std::move(pj));
    }
    tj["paths"] = std::move(paths);
    if (!t.age_overrides.empty()) {
      Json ages = Json::object();
      for (const auto& [bid, ov] : t.age_overrides) {
        Json a = Json::object();
        if (ov.program) a["program"] = age_json(*ov.program);
        if (!ov.regions.empty()) {
          Json rs = Json::object();
          for (const auto& [rid, v] : ov.regions) rs[std::to_string(rid)] = age_json(v);
          a["regions"] = std::move(rs);
        }
        ages[bid] = std::move(a);
      }
      tj["ages"] = std::move(ages);
    }
    tasks.push_back(std::move(tj));
  }
  j["tasks"] = std::move(tasks);
  j["cores"] = d.cores;
  const auto& o = d.options;
  Json oj;
  Json ms = Json::array();
  for (auto m : o.methods) ms.push_back(method_name(m));
  oj["methods"] = ms;
  oj["penalty_model"] = o.penalty_model == PenaltyModel::MissMinusHit ? "miss_minus_hit" : "full_miss";
  if (o.penalty) oj["penalty"] = *o.penalty;
  oj["window_rule"] = o.window_rule == WindowRule::Sound ? "sound" : "literal";
  oj["optimize_crs"] = o.optimize_crs;
  oj["coarsen_remote"] = o.coarsen_remote;
  oj["seed"] = o.seed;
  oj["oracle"] = Json{{"max_accesses", o.oracle.max_accesses},
                      {"max_orderings", o.oracle.max_orderings},
                      {"sample", o.oracle.sample}};
  j["options"] = std::move(oj);
  return j;
}

inline std::string ref_label(const MemoryReference& r) {
  return r.block + (r.program_scope() ? "@program" : "@U" + std::to_string(r.scope));
}

}  // namespace icca
