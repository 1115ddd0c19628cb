// kmelia-check: command-line front end over the C interface.

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kmelia/kmelia.h"

namespace {

constexpr int kUsage = 2;

bool want_color() {
  const char* env = std::getenv("KMELIA_COLOR");
  if (env && std::strcmp(env, "0") == 0) return false;
  if (env && std::strcmp(env, "1") == 0) return true;
  return isatty(STDOUT_FILENO) != 0;
}

int report_failure(const char* what) {
  std::fprintf(stderr, "kmelia-check: %s: %s\n", what, kmelia_last_error());
  return kUsage;
}

struct Options {
  std::vector<std::string> paths;
  std::string phases;
  int int_bound = 32;
  int set_bound = 8;
  int depth = 40;
  bool json = false;
  std::string smt_dir;
  std::string dot_dir;
  std::string extract_dir;
};

int execute(const Options& o) {
  kmelia_session* s = nullptr;
  if (kmelia_session_create(&s) != KMELIA_OK) return report_failure("session");
  struct Guard {
    kmelia_session* s;
    ~Guard() { kmelia_session_destroy(s); }
  } guard{s};

  for (const auto& p : o.paths)
    if (kmelia_session_add_path(s, p.c_str()) != KMELIA_OK) return report_failure("input");
  if (!o.phases.empty() && kmelia_session_set_phases(s, o.phases.c_str()) != KMELIA_OK)
    return report_failure("--phases");
  if (kmelia_session_set_bounds(s, o.int_bound, o.set_bound, o.depth) != KMELIA_OK) return report_failure("bounds");
  if (kmelia_session_set_output_dirs(s, o.smt_dir.c_str(), o.dot_dir.c_str(), o.extract_dir.c_str()) != KMELIA_OK)
    return report_failure("output");

  kmelia_report* r = nullptr;
  if (kmelia_session_run(s, &r) != KMELIA_OK) return report_failure("run");
  char* text = nullptr;
  kmelia_status st = o.json ? kmelia_report_json(r, &text) : kmelia_report_text(r, want_color() ? 1 : 0, &text);
  int code = kmelia_report_exit_code(r);
  kmelia_report_destroy(r);
  if (st != KMELIA_OK) return report_failure("report");
  std::fputs(text, stdout);
  kmelia_string_free(text);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contract checker for multi-service component models", "kmelia-check"};
  app.set_version_flag("--version", std::string(kmelia_version()));
  app.require_subcommand(1);

  Options check;
  auto* c = app.add_subcommand("check", "run the verification phases");
  c->add_option("--phases", check.phases, "comma-separated: static,consistency,compliance,behavior,functional,extract");
  c->add_option("--int-bound", check.int_bound, "integer search bound")->check(CLI::PositiveNumber);
  c->add_option("--set-bound", check.set_bound, "set cardinality bound")->check(CLI::PositiveNumber);
  c->add_option("--depth", check.depth, "functional exploration depth")->check(CLI::PositiveNumber);
  c->add_flag("--json", check.json, "machine-readable report");
  c->add_option("--emit-smt", check.smt_dir, "write proof obligations as SMT-LIB files");
  c->add_option("--emit-dot", check.dot_dir, "write behaviors and products as DOT graphs");
  c->add_option("--extract-dir", check.extract_dir, "write structured extractions when the extract phase runs");
  c->add_option("paths", check.paths, "files or directories")->required();

  Options extract;
  extract.phases = "extract";
  extract.extract_dir = ".";
  auto* e = app.add_subcommand("extract", "write structured code for every provided service");
  e->add_option("--out", extract.extract_dir, "output directory");
  e->add_flag("--json", extract.json, "machine-readable report");
  e->add_option("paths", extract.paths, "files or directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& ok) {
    return app.exit(ok);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kUsage;
  }
  return execute(c->parsed() ? check : extract);
}
