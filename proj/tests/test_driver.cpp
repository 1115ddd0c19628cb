#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "kmelia/driver.hpp"
#include "support.hpp"

using namespace kmelia;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("kmelia_test_" + name);
  fs::remove_all(p);
  return p;
}

std::size_t files_in(const fs::path& dir, const std::string& ext) {
  if (!fs::exists(dir)) return 0;
  return static_cast<std::size_t>(std::count_if(fs::directory_iterator(dir), fs::directory_iterator{},
                                                [&](const auto& e) { return e.path().extension() == ext; }));
}

std::vector<Diagnostic> sorted(std::vector<Diagnostic> ds) {
  sort_diagnostics(ds);
  return ds;
}

}  // namespace

TEST_CASE("stage names") {
  CHECK(parse_stage_list("static,behavior") == std::vector<Stage>{Stage::Static, Stage::Behavior});
  CHECK(parse_stage_list("extract, static") == std::vector<Stage>{Stage::Static, Stage::Extract});
  CHECK_THROWS_AS(parse_stage_list(""), UsageError);
  CHECK_THROWS_AS(parse_stage_list("static,proof"), UsageError);
  for (Stage s : all_stages()) CHECK(parse_stage(to_string(s)) == s);
}

TEST_CASE("pristine corpus: all phases, exit 0") {
  Report r = support::run_variant("pristine");
  CHECK(r.exit_code == 0);
  CHECK(r.count(Severity::Error) == 0);
  std::vector<std::string> names;
  for (const auto& p : r.phases) names.push_back(p.name);
  CHECK(names == std::vector<std::string>{"parse", "static", "consistency", "compliance", "behavior", "functional",
                                          "extract"});
}

TEST_CASE("weakened post, consistency only: exit 1 with one error") {
  Report r = support::run_variant("mut-post-leq", {Stage::Consistency});
  CHECK(r.exit_code == 1);
  const PhaseReport* p = r.phase("consistency");
  REQUIRE(p);
  CHECK(count_severity(p->diagnostics, Severity::Error) == 1);
  CHECK_FALSE(r.phase("static"));
}

TEST_CASE("extract only: files written, no checking diagnostics") {
  fs::path out = scratch("extract");
  RunConfig cfg;
  cfg.inputs = {support::corpus("pristine")};
  cfg.phases = {Stage::Extract};
  cfg.extract_dir = out.string();
  Report r = run(cfg);
  CHECK(r.exit_code == 0);
  CHECK(files_in(out, ".txt") == 3);
  CHECK(fs::exists(out / "ATM_CORE.withdrawal.structured.txt"));
  for (const auto& p : r.phases)
    for (const auto& d : p.diagnostics) CHECK(d.severity != Severity::Error);
}

TEST_CASE("static errors gate the later phases") {
  Report r = support::run_variant("mut-typing");
  CHECK(r.exit_code == 1);
  for (const char* name : {"consistency", "compliance", "behavior", "functional"}) {
    const PhaseReport* p = r.phase(name);
    REQUIRE(p);
    REQUIRE(p->diagnostics.size() == 1);
    CHECK(p->diagnostics[0].code == "skipped-static-errors");
    CHECK(p->diagnostics[0].severity == Severity::Info);
  }
}

TEST_CASE("parse errors gate every phase") {
  RunConfig cfg;
  cfg.sources = {support::unit("broken.kmelia", "COMPONENT X\nINTERFACE provides : {\n")};
  Report r = run(cfg);
  CHECK(r.exit_code == 1);
  CHECK(has_errors(r.phase("parse")->diagnostics));
  CHECK(r.phase("static")->diagnostics[0].code == "skipped-parse-errors");
}

TEST_CASE("missing inputs are usage errors") {
  RunConfig cfg;
  cfg.inputs = {"/nonexistent/path.kmelia"};
  CHECK_THROWS_AS(run(cfg), UsageError);
  RunConfig bad;
  bad.inputs = {support::corpus("pristine")};
  bad.depth = 0;
  CHECK_THROWS_AS(run(bad), UsageError);
}

TEST_CASE("JSON reports round-trip byte for byte") {
  for (const char* variant : {"pristine", "mut-post-leq", "mut-loop-recv", "mut-compliance-post", "mut-typing"}) {
    Report r = support::run_variant(variant);
    std::string text = to_json(r);
    Report back = report_from_json(text);
    CHECK(back == r);
    CHECK(to_json(back) == text);
  }
  CHECK_THROWS(report_from_json("{\"version\": 1}"));
}

TEST_CASE("unselected phases never report") {
  const auto& stages = all_stages();
  for (unsigned mask = 1; mask < (1u << stages.size()); ++mask) {
    std::vector<Stage> sel;
    std::set<std::string> allowed{"parse"};
    for (std::size_t i = 0; i < stages.size(); ++i)
      if (mask >> i & 1) {
        sel.push_back(stages[i]);
        allowed.insert(std::string(to_string(stages[i])));
      }
    RunConfig cfg;
    cfg.inputs = {support::corpus("mut-loop-recv")};
    cfg.phases = sel;
    cfg.int_bound = 8;
    Report r = run(cfg);
    for (const auto& p : r.phases) {
      CHECK(allowed.contains(p.name));
      for (const auto& d : p.diagnostics) CHECK(to_string(d.phase) == p.name);
    }
    CHECK(r.phases.size() == sel.size() + 1);
  }
}

TEST_CASE("phases run one at a time union to the all-phase run") {
  for (const char* variant : {"pristine", "mut-loop-recv", "mut-add-amount"}) {
    CAPTURE(variant);
    Report all = support::run_variant(variant, all_stages(), 16);
    std::vector<Diagnostic> pieces;
    for (Stage s : all_stages()) {
      Report one = support::run_variant(variant, {s}, 16);
      const PhaseReport* p = one.phase(to_string(s));
      REQUIRE(p);
      pieces.insert(pieces.end(), p->diagnostics.begin(), p->diagnostics.end());
    }
    std::vector<Diagnostic> whole;
    for (const auto& p : all.phases)
      if (p.name != "parse") whole.insert(whole.end(), p.diagnostics.begin(), p.diagnostics.end());
    CHECK(sorted(pieces) == sorted(whole));
  }
}

TEST_CASE("SMT and DOT emission") {
  fs::path smt = scratch("smt");
  fs::path dot = scratch("dot");
  RunConfig cfg;
  cfg.inputs = {support::corpus("pristine")};
  cfg.phases = {Stage::Consistency, Stage::Compliance, Stage::Behavior};
  cfg.emit_smt_dir = smt.string();
  cfg.emit_dot_dir = dot.string();
  Report r = run(cfg);
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(smt / "consistency_ATM_CORE_init_0.smt2"));
  CHECK(files_in(smt, ".smt2") > 15);
  CHECK(fs::exists(dot / "ATM_SYSTEM_lwith.dot"));
  CHECK(fs::exists(dot / "ATM_CORE_withdrawal.dot"));
}

TEST_CASE("text rendering") {
  Report r = support::run_variant("mut-loop-recv", {Stage::Behavior});
  std::string text = to_text(r, false);
  CHECK(text.find("atm_system.kmelia:5:3: error [behavior/deadlock]") != std::string::npos);
  CHECK(text.find("-- lamount.get_amount -->") != std::string::npos);
  CHECK(text.ends_with("1 error(s), 2 warning(s)\n"));
  CHECK(text.find("\x1b[") == std::string::npos);
  CHECK(to_text(r, true).find("\x1b[") != std::string::npos);
}

TEST_CASE("in-memory sources") {
  RunConfig cfg;
  cfg.sources = {support::unit("k.kmelia", "COMPONENT K\nINTERFACE provides : {} requires : {}\n"
                                           "VARIABLES n : Integer\nINVARIANT @pos : n > 0\nINITIALIZATION n := 0;\n")};
  cfg.phases = {Stage::Consistency};
  Report r = run(cfg);
  CHECK(r.exit_code == 1);
  const auto& d = r.phase("consistency")->diagnostics;
  REQUIRE(d.size() == 1);
  CHECK(d[0].location.file == "k.kmelia");
}
