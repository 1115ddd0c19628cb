#include "kmelia/driver.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kmelia/behavior.hpp"
#include "kmelia/extract.hpp"
#include "kmelia/obligations.hpp"
#include "kmelia/statics.hpp"

namespace kmelia {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Static: return "static";
    case Stage::Consistency: return "consistency";
    case Stage::Compliance: return "compliance";
    case Stage::Behavior: return "behavior";
    case Stage::Functional: return "functional";
    case Stage::Extract: return "extract";
  }
  return "?";
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> all{Stage::Static,   Stage::Consistency, Stage::Compliance,
                                      Stage::Behavior, Stage::Functional,  Stage::Extract};
  return all;
}

std::optional<Stage> parse_stage(std::string_view s) {
  for (Stage st : all_stages())
    if (to_string(st) == s) return st;
  return std::nullopt;
}

std::vector<Stage> parse_stage_list(std::string_view csv) {
  std::set<Stage> picked;
  std::string item;
  std::istringstream in{std::string(csv)};
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    auto st = parse_stage(item);
    if (!st) throw UsageError("unknown phase '" + item + "'");
    picked.insert(*st);
  }
  if (picked.empty()) throw UsageError("no phase selected");
  return {picked.begin(), picked.end()};
}

const PhaseReport* Report::phase(std::string_view name) const {
  for (const auto& p : phases)
    if (p.name == name) return &p;
  return nullptr;
}

std::size_t Report::count(Severity s) const {
  std::size_t n = 0;
  for (const auto& p : phases) n += count_severity(p.diagnostics, s);
  return n;
}

std::vector<SourceUnit> load_sources(const std::vector<std::string>& paths) {
  std::vector<std::string> files;
  for (const auto& p : paths) {
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<std::string> found;
      for (const auto& e : fs::recursive_directory_iterator(p, ec))
        if (e.is_regular_file() && e.path().extension() == ".kmelia") found.push_back(e.path().generic_string());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(p, ec)) {
      files.push_back(p);
    } else {
      throw UsageError("no such file or directory: " + p);
    }
  }
  std::vector<SourceUnit> out;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw UsageError("cannot read " + f);
    std::stringstream ss;
    ss << in.rdbuf();
    out.push_back({f, classify_unit(ss.str()), ss.str()});
  }
  return out;
}

namespace {

void write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw UsageError("cannot write " + (dir / name).string());
  out << text;
}

// File names unique within one output directory.
class NameSet {
 public:
  std::string unique(const std::string& stem, const std::string& ext) {
    std::string name = stem + ext;
    for (int k = 1; !used_.insert(name).second; ++k) name = stem + "_" + std::to_string(k) + ext;
    return name;
  }

 private:
  std::set<std::string> used_;
};

void finish(std::vector<Diagnostic>& d) {
  sort_diagnostics(d);
  d.erase(std::unique(d.begin(), d.end()), d.end());
}

Diagnostic skipped(Phase phase, const std::string& why) {
  return make_diag(Severity::Info, phase, why == "parse" ? "skipped-parse-errors" : "skipped-static-errors", {}, {},
                   "phase skipped: " + why + " errors present");
}

Phase phase_of(Stage s) {
  switch (s) {
    case Stage::Static: return Phase::Static;
    case Stage::Consistency: return Phase::Consistency;
    case Stage::Compliance: return Phase::Compliance;
    case Stage::Behavior: return Phase::Behavior;
    case Stage::Functional: return Phase::Functional;
    case Stage::Extract: return Phase::Extract;
  }
  return Phase::Parse;
}

std::vector<Diagnostic> run_consistency(const ResolvedModel& m, const RunConfig& cfg, const Bounds& b,
                                        NameSet& smt_names) {
  std::vector<Diagnostic> out;
  std::vector<ProofObligation> pos;
  for (const auto& [name, c] : m.components()) {
    pos.push_back(gen_init_po(c, &out));
    for (auto& po : gen_service_pos(c)) pos.push_back(std::move(po));
  }
  auto res = check_obligations(pos, b);
  out.insert(out.end(), res.begin(), res.end());
  if (!cfg.emit_smt_dir.empty())
    for (const auto& po : pos) write_file(cfg.emit_smt_dir, smt_names.unique(po.id, ".smt2"), export_smtlib(po));
  return out;
}

std::vector<Diagnostic> run_compliance(const ResolvedModel& m, const RunConfig& cfg, const Bounds& b,
                                       NameSet& smt_names) {
  std::vector<Diagnostic> out;
  std::vector<ProofObligation> pos;
  for (const auto& [name, a] : m.assemblies())
    for (const auto& l : a.links)
      for (auto& po : gen_compliance_pos(m, a, l, &out)) pos.push_back(std::move(po));
  auto res = check_obligations(pos, b);
  out.insert(out.end(), res.begin(), res.end());
  if (!cfg.emit_smt_dir.empty())
    for (const auto& po : pos) write_file(cfg.emit_smt_dir, smt_names.unique(po.id, ".smt2"), export_smtlib(po));
  return out;
}

std::vector<Diagnostic> run_behavior(const ResolvedModel& m, const RunConfig& cfg) {
  std::vector<Diagnostic> out;
  NameSet names;
  for (const auto& [name, a] : m.assemblies()) {
    std::vector<ProductLts> products;
    auto d = check_assembly_behavior(m, a, &products);
    out.insert(out.end(), d.begin(), d.end());
    if (cfg.emit_dot_dir.empty()) continue;
    for (const auto& p : products)
      write_file(cfg.emit_dot_dir, names.unique(a.name + "_" + p.link, ".dot"), to_dot(p));
  }
  if (!cfg.emit_dot_dir.empty()) {
    for (const auto& [name, c] : m.components())
      for (const auto& s : c.services)
        if (s.behavior)
          write_file(cfg.emit_dot_dir, names.unique(c.name + "_" + s.name, ".dot"),
                     to_dot(*s.behavior, c.name + "." + s.name));
  }
  return out;
}

std::vector<Diagnostic> run_functional(const ResolvedModel& m, const RunConfig& cfg) {
  std::vector<Diagnostic> out;
  FunctionalOptions o;
  o.in_bound = cfg.int_bound;
  o.set_bound = cfg.set_bound;
  o.depth = cfg.depth;
  for (const auto& [name, c] : m.components())
    for (const auto& s : c.services) {
      if (s.kind != ServiceKind::Provided || !s.behavior) continue;
      auto r = check_functional(c, s, o);
      out.insert(out.end(), r.diagnostics.begin(), r.diagnostics.end());
    }
  return out;
}

std::vector<Diagnostic> run_extract(const ResolvedModel& m, const RunConfig& cfg) {
  std::vector<Diagnostic> out;
  NameSet names;
  for (const auto& [name, c] : m.components())
    for (const auto& s : c.services) {
      if (s.kind != ServiceKind::Provided || !s.behavior) continue;
      std::vector<Diagnostic> warnings;
      SyntaxTree tree = lts_to_regex(*s.behavior, &warnings);
      for (auto& w : warnings) {
        w.location.file = c.unit;
        w.message = "service " + c.name + "." + s.name + ": " + w.message;
        out.push_back(std::move(w));
      }
      try {
        auto block = tree_to_structured(tree);
        if (!cfg.extract_dir.empty())
          write_file(cfg.extract_dir, names.unique(c.name + "." + s.name, ".structured.txt"),
                     render_structured(block, s));
      } catch (const ExtractError& e) {
        out.push_back(make_diag(Severity::Error, Phase::Extract, e.code(), c.unit, s.loc,
                                "service " + c.name + "." + s.name + ": " + e.what()));
      }
    }
  return out;
}

}  // namespace

Report run(const RunConfig& cfg) {
  if (cfg.int_bound < 1 || cfg.set_bound < 1) throw UsageError("bounds must be at least 1");
  if (cfg.depth < 1) throw UsageError("depth must be at least 1");
  if (cfg.phases.empty()) throw UsageError("no phase selected");
  if (cfg.inputs.empty() && cfg.sources.empty()) throw UsageError("no input given");

  auto units = load_sources(cfg.inputs);
  units.insert(units.end(), cfg.sources.begin(), cfg.sources.end());

  Report rep;
  PhaseReport parse{"parse", {}};
  auto parsed = parse_units(units, parse.diagnostics);
  auto resolved = resolve(parsed);
  parse.diagnostics.insert(parse.diagnostics.end(), resolved.diagnostics.begin(), resolved.diagnostics.end());
  finish(parse.diagnostics);
  const bool parse_errors = has_errors(parse.diagnostics);
  rep.phases.push_back(std::move(parse));

  const ResolvedModel& m = resolved.model;
  std::vector<Diagnostic> statics;
  if (!parse_errors) statics = run_statics(m);
  const bool static_errors = has_errors(statics);

  Bounds b;
  b.int_bound = cfg.int_bound;
  b.set_bound = cfg.set_bound;
  NameSet smt_names;
  std::set<Stage> selected(cfg.phases.begin(), cfg.phases.end());
  for (Stage st : all_stages()) {
    if (!selected.contains(st)) continue;
    PhaseReport pr{std::string(to_string(st)), {}};
    const Phase ph = phase_of(st);
    if (parse_errors) {
      pr.diagnostics.push_back(skipped(ph, "parse"));
    } else if (st == Stage::Static) {
      pr.diagnostics = statics;
    } else if (static_errors && st != Stage::Extract) {
      pr.diagnostics.push_back(skipped(ph, "static"));
    } else {
      switch (st) {
        case Stage::Consistency: pr.diagnostics = run_consistency(m, cfg, b, smt_names); break;
        case Stage::Compliance: pr.diagnostics = run_compliance(m, cfg, b, smt_names); break;
        case Stage::Behavior: pr.diagnostics = run_behavior(m, cfg); break;
        case Stage::Functional: pr.diagnostics = run_functional(m, cfg); break;
        case Stage::Extract: pr.diagnostics = run_extract(m, cfg); break;
        case Stage::Static: break;
      }
    }
    finish(pr.diagnostics);
    rep.phases.push_back(std::move(pr));
  }
  rep.exit_code = rep.count(Severity::Error) > 0 ? 1 : 0;
  return rep;
}

// ---------------------------------------------------------------------------
// serialization

namespace {

std::string_view type_tag(TypeKind k) {
  switch (k) {
    case TypeKind::Integer: return "integer";
    case TypeKind::Boolean: return "boolean";
    case TypeKind::String: return "string";
    case TypeKind::Set: return "set";
    case TypeKind::Named: return "opaque";
  }
  return "integer";
}

Json value_json(const Value& v) {
  Json j;
  j["type"] = type_tag(v.type);
  switch (v.type) {
    case TypeKind::Boolean: j["value"] = v.as_bool(); break;
    case TypeKind::String: j["value"] = v.text; break;
    case TypeKind::Named:
      j["library_type"] = v.type_name;
      j["value"] = v.number;
      break;
    default: j["value"] = v.number; break;
  }
  return j;
}

Value value_from(const Json& j) {
  const auto tag = j.at("type").get<std::string>();
  if (tag == "boolean") return Value::boolean(j.at("value").get<bool>());
  if (tag == "string") return Value::string(j.at("value").get<std::string>());
  if (tag == "set") return Value::set(j.at("value").get<std::int64_t>());
  if (tag == "opaque") return Value::opaque(j.at("library_type").get<std::string>(), j.at("value").get<std::int64_t>());
  if (tag == "integer") return Value::integer(j.at("value").get<std::int64_t>());
  throw std::runtime_error("unknown value type '" + tag + "'");
}

Json witness_json(const Witness& w) {
  Json j;
  if (const auto* v = std::get_if<Valuation>(&w)) {
    j["kind"] = "valuation";
    Json vals = Json::array();
    for (const auto& [key, val] : v->values()) {
      Json e;
      e["name"] = key.name;
      e["frame"] = key.frame == Frame::Old ? "old" : "current";
      e["value"] = value_json(val);
      vals.push_back(std::move(e));
    }
    j["values"] = std::move(vals);
  } else {
    const auto& t = std::get<TraceWitness>(w);
    j["kind"] = "trace";
    j["states"] = t.states;
    j["labels"] = t.labels;
  }
  return j;
}

Witness witness_from(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "trace") {
    TraceWitness t;
    t.states = j.at("states").get<std::vector<std::string>>();
    t.labels = j.at("labels").get<std::vector<std::string>>();
    return t;
  }
  if (kind != "valuation") throw std::runtime_error("unknown counterexample kind '" + kind + "'");
  Valuation v;
  for (const auto& e : j.at("values")) {
    Frame f = e.at("frame").get<std::string>() == "old" ? Frame::Old : Frame::Current;
    v.set(VarKey{e.at("name").get<std::string>(), f}, value_from(e.at("value")));
  }
  return v;
}

}  // namespace

std::string to_json(const Report& r) {
  Json j;
  j["version"] = r.version;
  Json phases = Json::object();
  for (const auto& p : r.phases) {
    Json diags = Json::array();
    for (const auto& d : p.diagnostics) {
      Json e;
      e["severity"] = to_string(d.severity);
      e["code"] = d.code;
      e["phase"] = to_string(d.phase);
      e["location"] = {{"file", d.location.file}, {"line", d.location.line}, {"col", d.location.col}};
      e["message"] = d.message;
      if (d.counterexample) e["counterexample"] = witness_json(*d.counterexample);
      diags.push_back(std::move(e));
    }
    Json pj;
    pj["diagnostics"] = std::move(diags);
    pj["errors"] = count_severity(p.diagnostics, Severity::Error);
    pj["warnings"] = count_severity(p.diagnostics, Severity::Warning);
    phases[p.name] = std::move(pj);
  }
  j["phases"] = std::move(phases);
  j["exit"] = r.exit_code;
  return j.dump(2) + "\n";
}

Report report_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw std::runtime_error(std::string("malformed report: ") + e.what());
  }
  try {
    Report r;
    r.version = j.at("version").get<std::string>();
    for (const auto& [name, pj] : j.at("phases").items()) {
      PhaseReport p{name, {}};
      for (const auto& e : pj.at("diagnostics")) {
        Diagnostic d;
        auto sev = parse_severity(e.at("severity").get<std::string>());
        auto ph = parse_phase(e.at("phase").get<std::string>());
        if (!sev || !ph) throw std::runtime_error("bad severity or phase");
        d.severity = *sev;
        d.phase = *ph;
        d.code = e.at("code").get<std::string>();
        const auto& loc = e.at("location");
        d.location = {loc.at("file").get<std::string>(), loc.at("line").get<int>(), loc.at("col").get<int>()};
        d.message = e.at("message").get<std::string>();
        if (e.contains("counterexample")) d.counterexample = witness_from(e.at("counterexample"));
        p.diagnostics.push_back(std::move(d));
      }
      r.phases.push_back(std::move(p));
    }
    r.exit_code = j.at("exit").get<int>();
    return r;
  } catch (const Json::exception& e) {
    throw std::runtime_error(std::string("malformed report: ") + e.what());
  }
}

std::string to_text(const Report& r, bool color) {
  auto paint = [&](const char* code, std::string_view s) {
    return color ? std::string("\033[") + code + "m" + std::string(s) + "\033[0m" : std::string(s);
  };
  std::ostringstream os;
  for (const auto& p : r.phases) {
    for (const auto& d : p.diagnostics) {
      if (!d.location.file.empty()) {
        os << d.location.file;
        if (d.location.line > 0) os << ":" << d.location.line << ":" << d.location.col;
        os << ": ";
      }
      const char* tint = d.severity == Severity::Error ? "1;31" : d.severity == Severity::Warning ? "1;33" : "36";
      os << paint(tint, to_string(d.severity)) << " [" << p.name << "/" << d.code << "] " << d.message << "\n";
      if (!d.counterexample) continue;
      if (const auto* v = std::get_if<Valuation>(&*d.counterexample)) {
        os << "    counterexample: " << to_string(*v) << "\n";
      } else {
        const auto& t = std::get<TraceWitness>(*d.counterexample);
        os << "    trace:\n";
        for (std::size_t i = 0; i < t.states.size(); ++i) {
          os << "      " << t.states[i] << "\n";
          if (i < t.labels.size()) os << "        -- " << t.labels[i] << " -->\n";
        }
      }
    }
  }
  os << r.count(Severity::Error) << " error(s), " << r.count(Severity::Warning) << " warning(s)\n";
  return os.str();
}

}  // namespace kmelia
