#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <icca/generate.hpp>
#include <icca/icca.hpp>

namespace fs = std::filesystem;
using namespace icca;

namespace {

enum Exit { kOk = 0, kInput = 2, kConfig = 3, kUnsound = 4 };

struct Flags {
  std::string methods;
  bool oracle = false;
  std::string out_dir;
  bool no_timestamp = false;
  unsigned jobs = 1;
  std::string window_rule;
  std::string penalty_model;
  long long penalty = -1;
  bool json = false;
  Count max_accesses = 0;
  Count max_orderings = 0;
  bool sample = false;
};

std::string timestamp() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::vector<Method> parse_methods(const std::string& s) {
  std::vector<Method> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto m = detail::parse_method(item);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) throw InputError("no methods selected");
  return out;
}

// Command-line flags override the document's options.
void apply_flags(InputDocument& d, const Flags& f) {
  if (!f.methods.empty()) d.options.methods = parse_methods(f.methods);
  if (f.window_rule == "sound") d.options.window_rule = WindowRule::Sound;
  else if (f.window_rule == "literal") d.options.window_rule = WindowRule::Literal;
  if (f.penalty_model == "miss_minus_hit") d.options.penalty_model = PenaltyModel::MissMinusHit;
  else if (f.penalty_model == "full_miss") d.options.penalty_model = PenaltyModel::FullMiss;
  if (f.penalty >= 0) d.options.penalty = static_cast<Cycles>(f.penalty);
  if (f.max_accesses) d.options.oracle.max_accesses = f.max_accesses;
  if (f.max_orderings) d.options.oracle.max_orderings = f.max_orderings;
  if (f.sample) d.options.oracle.sample = true;
}

AnalysisOptions options_for(const InputDocument& d, const Flags& f) {
  auto o = d.analysis_options();
  o.jobs = std::max(1u, f.jobs);
  return o;
}

bool wants(const InputDocument& d, Method m) {
  return std::find(d.options.methods.begin(), d.options.methods.end(), m) != d.options.methods.end();
}

Count method_value(const SetReport& s, Method m) {
  return m == Method::Proposed ? s.proposed : m == Method::Conflict ? s.conflict : s.footprint;
}

Count method_value(const LevelReport& l, Method m) {
  return m == Method::Proposed ? l.proposed : m == Method::Conflict ? l.conflict : l.footprint;
}

// Oracle summary over every local path and remote combination.
struct OracleSummary {
  Verification v;
  Count worst = 0;          // max over (path, combination) of the per-set sum
  bool ran = false;
  std::string skipped;
};

OracleSummary run_oracle(const InputDocument& d, const AnalysisOptions& opt) {
  OracleSummary s;
  try {
    s.v = verify_system(d.system(), opt, d.options.oracle);
    s.ran = true;
  } catch (const OracleLimitError& e) {
    s.skipped = e.what();
    return s;
  }
  std::map<std::pair<std::size_t, std::vector<std::size_t>>, Count> per;
  for (const auto& c : s.v.cases) per[{c.path, c.remote_choice}] += c.oracle.max_flagged;
  for (const auto& [k, n] : per) s.worst = std::max(s.worst, n);
  return s;
}

Json set_json(const SetReport& s, const InputDocument& d) {
  Json j;
  j["set"] = s.set;
  for (Method m : d.options.methods) j[method_name(m)] = method_value(s, m);
  j["premise_violated"] = s.premise_violated;
  Json refs = Json::array();
  for (const auto& r : s.references) {
    refs.push_back(Json{{"label", ref_label(r)},
                        {"address", r.address},
                        {"count", r.count},
                        {"age", r.age.infinite() ? Json("inf") : Json(r.age.value())},
                        {"home", r.home}});
  }
  j["references"] = std::move(refs);
  Json crs = Json::array();
  for (std::size_t i = 0; i < s.regions.size(); ++i) {
    const auto& c = s.regions[i];
    Json members = Json::array();
    for (auto k : c.refs) members.push_back(ref_label(s.references[k]));
    Json cj{{"first", c.first}, {"last", c.last}, {"refs", std::move(members)}};
    if (wants(d, Method::Proposed) && i < s.witness.size() && s.remote_len > 0)
      cj["witness"] = Json{{"remote_first", s.witness[i].first},
                           {"remote_last", s.witness[i].last},
                           {"misses", s.witness[i].misses}};
    crs.push_back(std::move(cj));
  }
  j["contention_regions"] = std::move(crs);
  j["remote_regions"] = s.remote_len;
  return j;
}

Json results_json(const InputDocument& d, const TaskReport& rep, const OracleSummary* orc, const std::string& input,
                  bool with_time) {
  Json j;
  j["tool"] = "icca";
  j["version"] = "1.0.0";
  if (with_time) j["generated"] = timestamp();
  j["input"] = input;
  j["task"] = rep.task;
  Json opts;
  opts["window_rule"] = d.options.window_rule == WindowRule::Sound ? "sound" : "literal";
  opts["penalty_model"] = d.options.penalty_model == PenaltyModel::MissMinusHit ? "miss_minus_hit" : "full_miss";
  if (d.options.penalty) opts["penalty"] = *d.options.penalty;
  opts["optimize_crs"] = d.options.optimize_crs;
  opts["coarsen_remote"] = d.options.coarsen_remote;
  j["options"] = std::move(opts);

  Json ms = Json::object();
  for (Method m : d.options.methods) {
    const auto& s = rep.methods.at(m);
    ms[method_name(m)] = Json{{"misses", s.misses}, {"interference_cycles", s.interference}, {"wcet", s.wcet},
                              {"worst_path", s.path}};
  }
  j["methods"] = std::move(ms);

  Json paths = Json::array();
  for (const auto& p : rep.paths) {
    Json pj{{"path", p.path}, {"intra_wcet", p.intra_wcet}};
    Json levels = Json::array();
    for (const auto& l : p.levels) {
      Json lj{{"level", l.level + 1}, {"penalty", l.penalty}};
      for (Method m : d.options.methods) lj[method_name(m)] = method_value(l, m);
      lj["remote_choice"] = l.worst.remote_choice;
      Json sets = Json::array();
      for (const auto& s : l.worst.sets) sets.push_back(set_json(s, d));
      lj["sets"] = std::move(sets);
      levels.push_back(std::move(lj));
    }
    pj["levels"] = std::move(levels);
    paths.push_back(std::move(pj));
  }
  j["paths"] = std::move(paths);

  if (orc) {
    Json oj;
    if (!orc->ran) {
      oj["status"] = "skipped";
      oj["reason"] = orc->skipped;
    } else {
      oj["status"] = orc->v.sound ? "sound" : "violation";
      oj["max_interference_misses"] = orc->worst;
      oj["exhaustive"] = orc->v.exhaustive;
      Json cases = Json::array();
      for (const auto& c : orc->v.cases)
        cases.push_back(Json{{"path", c.path},
                             {"remote_choice", c.remote_choice},
                             {"set", c.set},
                             {"bound", c.bound},
                             {"oracle", c.oracle.max_flagged},
                             {"oracle_unmasked", c.oracle.max_flagged_any},
                             {"intra_violations", c.oracle.intra_violations},
                             {"sound", c.sound()}});
      oj["cases"] = std::move(cases);
    }
    j["oracle"] = std::move(oj);
  }
  return j;
}

std::string text_report(const InputDocument& d, const TaskReport& rep, const OracleSummary* orc,
                        const std::string& input) {
  std::ostringstream os;
  os << "input: " << input << "\n";
  os << "task:  " << rep.task << " (" << rep.paths.size() << (rep.paths.size() == 1 ? " path" : " paths") << ")\n";
  os << "cache:";
  for (std::size_t l = 0; l < d.cache.levels.size(); ++l) {
    const auto& lv = d.cache.levels[l];
    os << " L" << l + 1 << " " << lv.sets << "x" << lv.associativity << (lv.shared ? " shared" : " private") << ",";
  }
  os << " memory " << d.cache.miss_latency << " cycles\n\n";

  os << std::left << std::setw(10) << "method" << std::right << std::setw(10) << "misses" << std::setw(14)
     << "interference" << std::setw(12) << "wcet" << std::setw(8) << "path" << "\n";
  for (Method m : d.options.methods) {
    const auto& s = rep.methods.at(m);
    os << std::left << std::setw(10) << method_name(m) << std::right << std::setw(10) << s.misses << std::setw(14)
       << s.interference << std::setw(12) << s.wcet << std::setw(8) << s.path << "\n";
  }

  for (const auto& p : rep.paths) {
    os << "\npath " << p.path << ": intra-core wcet " << p.intra_wcet << "\n";
    for (const auto& l : p.levels) {
      os << "  L" << l.level + 1 << " (penalty " << l.penalty << "):";
      for (Method m : d.options.methods) os << " " << method_name(m) << " " << method_value(l, m);
      os << "\n";
      for (const auto& s : l.worst.sets) {
        os << "    set " << s.set << ": " << s.refs << " refs, " << s.crs << " CRs";
        for (Method m : d.options.methods) os << ", " << method_name(m) << " " << method_value(s, m);
        if (s.premise_violated) os << " [more than associativity addresses in one CR]";
        os << "\n";
        if (!wants(d, Method::Proposed) || s.remote_len == 0) continue;
        for (std::size_t i = 0; i < s.regions.size(); ++i) {
          const auto& c = s.regions[i];
          os << "      C" << i + 1 << " U" << c.first;
          if (c.last != c.first) os << "-U" << c.last;
          os << " {";
          for (std::size_t k = 0; k < c.refs.size(); ++k) os << (k ? " " : "") << ref_label(s.references[c.refs[k]]);
          os << "} <- U'" << s.witness[i].first;
          if (s.witness[i].last != s.witness[i].first) os << "-U'" << s.witness[i].last;
          os << ": " << s.witness[i].misses << "\n";
        }
      }
    }
  }
  if (orc) {
    os << "\noracle: ";
    if (!orc->ran) {
      os << "skipped (" << orc->skipped << ")\n";
    } else {
      os << "max " << orc->worst << " interference misses" << (orc->v.exhaustive ? "" : " (sampled, lower bound)")
         << ", bound " << rep.methods.at(Method::Proposed).misses << ": " << (orc->v.sound ? "SOUND" : "VIOLATION")
         << "\n";
    }
  }
  return os.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write '" + p.string() + "'");
  out << text;
}

int cmd_analyze(const std::string& input, const Flags& f) {
  auto d = load_document(input);
  apply_flags(d, f);
  auto opt = options_for(d, f);
  bool need_proposed = f.oracle && !wants(d, Method::Proposed);
  if (need_proposed) d.options.methods.insert(d.options.methods.begin(), Method::Proposed);
  auto rep = analyze_system(d.system(), opt);
  OracleSummary orc;
  if (f.oracle) orc = run_oracle(d, opt);
  const OracleSummary* op = f.oracle ? &orc : nullptr;
  std::string name = fs::path(input).filename().string();
  auto j = results_json(d, rep, op, name, !f.no_timestamp);
  auto text = text_report(d, rep, op, name);
  if (!f.out_dir.empty()) {
    fs::create_directories(f.out_dir);
    auto stem = fs::path(input).stem().string();
    write_file(fs::path(f.out_dir) / (stem + ".results.json"), j.dump(2) + "\n");
    write_file(fs::path(f.out_dir) / (stem + ".report.txt"), text);
  }
  std::cout << (f.json ? j.dump(2) + "\n" : text);
  return f.oracle && orc.ran && !orc.v.sound ? kUnsound : kOk;
}

int cmd_oracle(const std::string& input, const Flags& f) {
  auto d = load_document(input);
  apply_flags(d, f);
  auto opt = options_for(d, f);
  auto v = verify_system(d.system(), opt, d.options.oracle);   // limit errors propagate as config errors
  std::cout << std::left << std::setw(6) << "path" << std::setw(10) << "remote" << std::setw(6) << "set"
            << std::right << std::setw(8) << "bound" << std::setw(8) << "oracle" << std::setw(8) << "conflict"
            << std::setw(8) << "footprint" << "  verdict\n";
  for (const auto& c : v.cases) {
    std::string rc;
    for (std::size_t i = 0; i < c.remote_choice.size(); ++i) rc += (i ? "," : "") + std::to_string(c.remote_choice[i]);
    if (rc.empty()) rc = "-";
    std::cout << std::left << std::setw(6) << c.path << std::setw(10) << rc << std::setw(6) << c.set << std::right
              << std::setw(8) << c.bound << std::setw(8) << c.oracle.max_flagged << std::setw(8) << c.conflict
              << std::setw(8) << c.footprint << "  " << (c.sound() ? "SOUND" : "VIOLATION") << "\n";
  }
  std::cout << (v.exhaustive ? "exhaustive" : "sampled") << ", " << (v.sound ? "SOUND" : "VIOLATION") << "\n";
  return v.sound ? kOk : kUnsound;
}

int cmd_ages(const std::string& input, const std::string& task_name) {
  auto d = load_document(input);
  d.cache.validate();
  const auto& t = d.task(task_name.empty() ? d.under_analysis : task_name);
  for (std::size_t pi = 0; pi < t.paths.size(); ++pi) {
    auto models = level_models(t.paths[pi], d.cache);
    for (std::size_t l = 0; l < models.size(); ++l) {
      Count assoc = d.cache.levels[l].associativity;
      auto ages = level_ages(models[l], d.cache, l);
      if (l == d.cache.shared_level()) apply_overrides(ages, t.age_overrides, assoc);
      std::cout << "path " << pi << " L" << l + 1 << ":\n";
      for (const auto& site : block_sites(models[l])) {
        for (auto [scope, delta] : block_contexts(site.chain, site.first_only)) {
          Age a = ages.at(ContextKey{site.block.id, scope});
          std::cout << "  " << std::left << std::setw(16)
                    << (site.block.id + (scope == kProgramScope ? "@program" : "@U" + std::to_string(scope)))
                    << std::right << " set " << std::setw(3) << d.cache.set_of(l, site.block.address) << "  count "
                    << std::setw(6) << delta << "  age " << std::setw(4) << a.str() << "  "
                    << (classify(a, assoc) == CacClass::AlwaysHit ? "always-hit" : "may-access") << "\n";
        }
      }
    }
  }
  return kOk;
}

struct GenFlags {
  std::size_t count = 10;
  std::uint64_t seed = 1;
  GenParams params;
};

std::vector<std::pair<std::string, InputDocument>> generate(const GenFlags& g) {
  if (g.count == 0) throw ConfigError("instance count must be positive");
  InstanceGenerator gen(g.seed, g.params);
  std::vector<std::pair<std::string, InputDocument>> out;
  for (std::size_t i = 0; i < g.count; ++i) {
    std::ostringstream name;
    name << "gen-" << g.seed << "-" << std::setw(4) << std::setfill('0') << i + 1;
    auto d = gen.next();
    d.description = "generated instance " + std::to_string(i + 1) + " of seed " + std::to_string(g.seed);
    d.options.seed = g.seed;
    out.emplace_back(name.str(), std::move(d));
  }
  return out;
}

int cmd_gen(const GenFlags& g, const std::string& out_dir) {
  auto docs = generate(g);
  if (out_dir.empty()) {
    for (const auto& [n, d] : docs) std::cout << to_json(d).dump() << "\n";
    return kOk;
  }
  fs::create_directories(out_dir);
  for (const auto& [n, d] : docs) write_file(fs::path(out_dir) / (n + ".json"), to_json(d).dump(2) + "\n");
  std::cout << "wrote " << docs.size() << " instances to " << out_dir << "\n";
  return kOk;
}

std::string ratio(Count a, Count b) {
  if (a == 0 && b == 0) return "1.0000";
  if (b == 0) return "inf";
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << static_cast<double>(a) / static_cast<double>(b);
  return os.str();
}

int cmd_compare(const std::string& dir, const GenFlags* g, const std::string& csv_path, const Flags& f) {
  std::vector<std::pair<std::string, InputDocument>> docs;
  int status = kOk;
  if (g) {
    docs = generate(*g);
    if (!dir.empty()) {
      fs::create_directories(dir);
      for (const auto& [n, d] : docs) write_file(fs::path(dir) / (n + ".json"), to_json(d).dump(2) + "\n");
    }
  } else {
    if (dir.empty() || !fs::is_directory(dir)) throw InputError("'" + dir + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
      try {
        docs.emplace_back(p.stem().string(), load_document(p.string()));
      } catch (const InputError& e) {
        std::cerr << "skipping " << p.filename().string() << ": " << e.what() << "\n";
      }
    }
  }

  std::ostringstream csv;
  csv << "instance,proposed,conflict,footprint,proposed_over_conflict,proposed_over_footprint";
  if (f.oracle) csv << ",oracle,sound";
  csv << "\n";
  double sp = 0, sz = 0, sl = 0, rz = 0, rl = 0, so = 0;
  std::size_t n = 0, nz = 0, nl = 0;
  for (auto& [name, d] : docs) {
    apply_flags(d, f);
    auto opt = options_for(d, f);
    TaskReport rep;
    try {
      rep = analyze_system(d.system(), opt);
    } catch (const std::exception& e) {
      std::cerr << "skipping " << name << ": " << e.what() << "\n";
      continue;
    }
    Count p = rep.methods.at(Method::Proposed).misses, z = rep.methods.at(Method::Conflict).misses,
          l = rep.methods.at(Method::Footprint).misses;
    auto a = ratio(p, z), b = ratio(p, l);
    csv << name << "," << p << "," << z << "," << l << "," << a << "," << b;
    if (f.oracle) {
      auto o = run_oracle(d, opt);
      if (o.ran) {
        csv << "," << o.worst << "," << (o.v.sound ? "yes" : "no");
        so += static_cast<double>(o.worst);
        if (!o.v.sound) status = kUnsound;
      } else {
        csv << ",,skipped";
      }
    }
    csv << "\n";
    ++n;
    sp += static_cast<double>(p);
    sz += static_cast<double>(z);
    sl += static_cast<double>(l);
    if (a != "inf") rz += std::stod(a), ++nz;
    if (b != "inf") rl += std::stod(b), ++nl;
  }
  auto mean = [](double s, std::size_t k) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << (k ? s / static_cast<double>(k) : 0.0);
    return os.str();
  };
  csv << "mean," << mean(sp, n) << "," << mean(sz, n) << "," << mean(sl, n) << "," << mean(rz, nz) << ","
      << mean(rl, nl);
  if (f.oracle) csv << "," << mean(so, n) << ",";
  csv << "\n";
  if (csv_path.empty())
    std::cout << csv.str();
  else
    write_file(csv_path, csv.str());
  return status;
}

void common_flags(CLI::App* c, Flags& f) {
  c->add_option("--methods", f.methods, "Comma separated: proposed,conflict,footprint");
  c->add_option("--jobs", f.jobs, "Worker threads over local paths")->check(CLI::PositiveNumber);
  c->add_option("--window-rule", f.window_rule, "Contention window rule")->check(CLI::IsMember({"sound", "literal"}));
  c->add_option("--penalty-model", f.penalty_model, "Cycles per extra miss")
      ->check(CLI::IsMember({"miss_minus_hit", "full_miss"}));
  c->add_option("--penalty", f.penalty, "Fixed cycles per extra miss")->check(CLI::NonNegativeNumber);
  c->add_option("--max-accesses", f.max_accesses, "Oracle limit on unrolled accesses");
  c->add_option("--max-orderings", f.max_orderings, "Oracle limit on intra-region orderings per task");
  c->add_flag("--sample", f.sample, "Sample orderings when over the oracle limit");
}

void gen_flags(CLI::App* c, GenFlags& g) {
  c->add_option("--seed", g.seed, "Generator seed");
  c->add_option("--local-regions", g.params.local_regions, "Max out-most regions of the analysed task");
  c->add_option("--remote-regions", g.params.remote_regions, "Max out-most regions per remote task");
  c->add_option("--remote-cores", g.params.remote_cores, "Remote cores");
  c->add_option("--max-count", g.params.max_count, "Max loop count");
  c->add_option("--max-accesses-gen", g.params.max_accesses, "Max unrolled accesses per instance");
  c->add_flag("--two-level", g.params.two_level, "Add a private first level");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inter-core shared cache interference analyzer"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "icca 1.0.0");

  Flags f;
  std::string input, dir, csv, out_dir, task;
  GenFlags g;
  std::size_t gen_n = 0;

  auto* analyze = app.add_subcommand("analyze", "Bound the interference of the task under analysis");
  analyze->add_option("input", input, "Input document")->required();
  common_flags(analyze, f);
  analyze->add_flag("--oracle", f.oracle, "Check the bound against the exhaustive oracle");
  analyze->add_option("--out-dir", f.out_dir, "Write <name>.report.txt and <name>.results.json here");
  analyze->add_flag("--no-timestamp", f.no_timestamp, "Omit the generation time from the results");
  analyze->add_flag("--json", f.json, "Print the results document instead of the text report");

  auto* compare = app.add_subcommand("compare", "Tabulate all methods over a directory of documents");
  compare->add_option("dir", dir, "Directory of input documents (output directory with --gen)");
  common_flags(compare, f);
  compare->add_flag("--oracle", f.oracle, "Add the oracle value per instance");
  compare->add_option("--gen", gen_n, "Generate this many instances instead of reading a directory");
  gen_flags(compare, g);
  compare->add_option("--csv", csv, "Write the table here instead of stdout");

  auto* gen = app.add_subcommand("gen", "Generate random small instances");
  gen->add_option("--count", g.count, "Number of instances");
  gen->add_option("--out-dir", out_dir, "Write one file per instance (default: JSON lines on stdout)");
  gen_flags(gen, g);

  auto* oracle = app.add_subcommand("oracle", "Compare the bound with the exhaustive oracle case by case");
  oracle->add_option("input", input, "Input document")->required();
  common_flags(oracle, f);

  auto* ages = app.add_subcommand("ages", "Dump computed ages and classifications per level");
  ages->add_option("input", input, "Input document")->required();
  ages->add_option("--task", task, "Task to dump (default: the task under analysis)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kInput;
  }

  try {
    if (*analyze) return cmd_analyze(input, f);
    if (*oracle) return cmd_oracle(input, f);
    if (*ages) return cmd_ages(input, task);
    if (*gen) return cmd_gen(g, out_dir);
    if (*compare) {
      if (gen_n) g.count = gen_n;
      return cmd_compare(dir, gen_n ? &g : nullptr, csv, f);
    }
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const ModelError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const OracleLimitError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}
