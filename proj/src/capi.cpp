#include "kmelia/kmelia.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "kmelia/driver.hpp"

struct kmelia_session {
  kmelia::RunConfig cfg;
};

struct kmelia_report {
  kmelia::Report report;
};

namespace {

thread_local std::string last_error;

kmelia_status fail(kmelia_status st, std::string msg) {
  last_error = std::move(msg);
  return st;
}

template <typename F>
kmelia_status guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const kmelia::UsageError& e) {
    return fail(KMELIA_USAGE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(KMELIA_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(KMELIA_INTERNAL, e.what());
  } catch (...) {
    return fail(KMELIA_INTERNAL, "unknown failure");
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

}  // namespace

extern "C" {

const char* kmelia_version(void) { return kmelia::kVersion; }

const char* kmelia_last_error(void) { return last_error.c_str(); }

kmelia_status kmelia_session_create(kmelia_session** out) {
  if (!out) return fail(KMELIA_INVALID_ARGUMENT, "null output pointer");
  return guarded([&] {
    *out = new kmelia_session();
    return KMELIA_OK;
  });
}

void kmelia_session_destroy(kmelia_session* s) { delete s; }

kmelia_status kmelia_session_add_path(kmelia_session* s, const char* path) {
  if (!s || !path) return fail(KMELIA_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    try {
      kmelia::load_sources({path});  // fail early on missing inputs
    } catch (const kmelia::UsageError& e) {
      return fail(KMELIA_IO, e.what());
    }
    s->cfg.inputs.emplace_back(path);
    return KMELIA_OK;
  });
}

kmelia_status kmelia_session_add_source(kmelia_session* s, const char* unit_name, const char* text) {
  if (!s || !unit_name || !text) return fail(KMELIA_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    s->cfg.sources.push_back({unit_name, kmelia::classify_unit(text), text});
    return KMELIA_OK;
  });
}

kmelia_status kmelia_session_set_phases(kmelia_session* s, const char* csv) {
  if (!s || !csv) return fail(KMELIA_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    s->cfg.phases = kmelia::parse_stage_list(csv);
    return KMELIA_OK;
  });
}

kmelia_status kmelia_session_set_bounds(kmelia_session* s, int int_bound, int set_bound, int depth) {
  if (!s) return fail(KMELIA_INVALID_ARGUMENT, "null session");
  if (int_bound < 1 || set_bound < 1 || depth < 1) return fail(KMELIA_INVALID_ARGUMENT, "bounds must be at least 1");
  s->cfg.int_bound = int_bound;
  s->cfg.set_bound = set_bound;
  s->cfg.depth = depth;
  return KMELIA_OK;
}

kmelia_status kmelia_session_set_output_dirs(kmelia_session* s, const char* smt_dir, const char* dot_dir,
                                             const char* extract_dir) {
  if (!s) return fail(KMELIA_INVALID_ARGUMENT, "null session");
  return guarded([&] {
    s->cfg.emit_smt_dir = smt_dir ? smt_dir : "";
    s->cfg.emit_dot_dir = dot_dir ? dot_dir : "";
    s->cfg.extract_dir = extract_dir ? extract_dir : "";
    return KMELIA_OK;
  });
}

kmelia_status kmelia_session_run(kmelia_session* s, kmelia_report** out) {
  if (!s || !out) return fail(KMELIA_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto r = std::make_unique<kmelia_report>();
    r->report = kmelia::run(s->cfg);
    *out = r.release();
    return KMELIA_OK;
  });
}

int kmelia_report_exit_code(const kmelia_report* r) { return r ? r->report.exit_code : 2; }

size_t kmelia_report_count(const kmelia_report* r, kmelia_severity severity) {
  if (!r) return 0;
  switch (severity) {
    case KMELIA_SEVERITY_ERROR: return r->report.count(kmelia::Severity::Error);
    case KMELIA_SEVERITY_WARNING: return r->report.count(kmelia::Severity::Warning);
    case KMELIA_SEVERITY_INFO: return r->report.count(kmelia::Severity::Info);
  }
  return 0;
}

kmelia_status kmelia_report_json(const kmelia_report* r, char** out) {
  if (!r || !out) return fail(KMELIA_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = dup(kmelia::to_json(r->report));
    return KMELIA_OK;
  });
}

kmelia_status kmelia_report_text(const kmelia_report* r, int color, char** out) {
  if (!r || !out) return fail(KMELIA_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = dup(kmelia::to_text(r->report, color != 0));
    return KMELIA_OK;
  });
}

void kmelia_report_destroy(kmelia_report* r) { delete r; }

void kmelia_string_free(char* s) { std::free(s); }

}  // extern "C"
