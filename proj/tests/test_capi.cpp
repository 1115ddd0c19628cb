#include <doctest.h>

#include <string>

#include "kmelia/kmelia.h"
#include "support.hpp"

namespace {

struct Session {
  kmelia_session* s = nullptr;
  Session() { REQUIRE(kmelia_session_create(&s) == KMELIA_OK); }
  ~Session() { kmelia_session_destroy(s); }
};

std::string take(char* p) {
  std::string out = p ? p : "";
  kmelia_string_free(p);
  return out;
}

}  // namespace

TEST_CASE("C API: clean run") {
  Session ses;
  REQUIRE(kmelia_session_add_path(ses.s, support::corpus("pristine").c_str()) == KMELIA_OK);
  kmelia_report* r = nullptr;
  REQUIRE(kmelia_session_run(ses.s, &r) == KMELIA_OK);
  CHECK(kmelia_report_exit_code(r) == 0);
  CHECK(kmelia_report_count(r, KMELIA_SEVERITY_ERROR) == 0);
  CHECK(kmelia_report_count(r, KMELIA_SEVERITY_WARNING) == 2);
  char* json = nullptr;
  REQUIRE(kmelia_report_json(r, &json) == KMELIA_OK);
  CHECK(take(json).starts_with("{\n  \"version\": \"0.1.0\""));
  char* text = nullptr;
  REQUIRE(kmelia_report_text(r, 0, &text) == KMELIA_OK);
  CHECK(take(text).ends_with("0 error(s), 2 warning(s)\n"));
  kmelia_report_destroy(r);
}

TEST_CASE("C API: failing mutant, phases, and bounds") {
  Session ses;
  REQUIRE(kmelia_session_add_path(ses.s, support::corpus("mut-add-amount").c_str()) == KMELIA_OK);
  REQUIRE(kmelia_session_set_phases(ses.s, "functional") == KMELIA_OK);
  REQUIRE(kmelia_session_set_bounds(ses.s, 16, 8, 40) == KMELIA_OK);
  kmelia_report* r = nullptr;
  REQUIRE(kmelia_session_run(ses.s, &r) == KMELIA_OK);
  CHECK(kmelia_report_exit_code(r) == 1);
  CHECK(kmelia_report_count(r, KMELIA_SEVERITY_ERROR) >= 1);
  kmelia_report_destroy(r);
}

TEST_CASE("C API: in-memory source") {
  Session ses;
  const char* text = "COMPONENT K\nINTERFACE provides : {} requires : {}\nVARIABLES n : Integer\n"
                     "INVARIANT @pos : n > 0\nINITIALIZATION n := 0;\n";
  REQUIRE(kmelia_session_add_source(ses.s, "k.kmelia", text) == KMELIA_OK);
  kmelia_report* r = nullptr;
  REQUIRE(kmelia_session_run(ses.s, &r) == KMELIA_OK);
  CHECK(kmelia_report_exit_code(r) == 1);
  kmelia_report_destroy(r);
}

TEST_CASE("C API: errors are status codes with messages") {
  CHECK(kmelia_session_create(nullptr) == KMELIA_INVALID_ARGUMENT);
  CHECK(std::string(kmelia_last_error()) == "null output pointer");
  Session ses;
  CHECK(kmelia_session_add_path(ses.s, "/nonexistent/x.kmelia") == KMELIA_IO);
  CHECK(std::string(kmelia_last_error()).size() > 0);
  CHECK(kmelia_session_set_phases(ses.s, "static,bogus") == KMELIA_USAGE);
  CHECK(std::string(kmelia_last_error()).find("bogus") != std::string::npos);
  CHECK(kmelia_session_set_bounds(ses.s, 0, 8, 40) == KMELIA_INVALID_ARGUMENT);
  CHECK(kmelia_session_set_phases(ses.s, "static") == KMELIA_OK);
  CHECK(std::string(kmelia_last_error()).empty());
  CHECK(kmelia_report_exit_code(nullptr) == 2);
  CHECK(kmelia_report_count(nullptr, KMELIA_SEVERITY_INFO) == 0);
  char* out = nullptr;
  CHECK(kmelia_report_json(nullptr, &out) == KMELIA_INVALID_ARGUMENT);
  CHECK(std::string(kmelia_version()) == "0.1.0");
}
