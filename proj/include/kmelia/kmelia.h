/* C interface to the kmelia checker. Opaque handles, status codes, no
 * exceptions across the boundary. Strings returned through char** are
 * owned by the caller and released with kmelia_string_free. */
#ifndef KMELIA_KMELIA_H
#define KMELIA_KMELIA_H

#include <stddef.h>

#if defined(_WIN32)
#if defined(KMELIA_BUILDING)
#define KMELIA_API __declspec(dllexport)
#else
#define KMELIA_API __declspec(dllimport)
#endif
#else
#define KMELIA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kmelia_status {
  KMELIA_OK = 0,
  KMELIA_INVALID_ARGUMENT = 1,
  KMELIA_IO = 2,
  KMELIA_USAGE = 3,
  KMELIA_INTERNAL = 4
} kmelia_status;

typedef enum kmelia_severity {
  KMELIA_SEVERITY_ERROR = 0,
  KMELIA_SEVERITY_WARNING = 1,
  KMELIA_SEVERITY_INFO = 2
} kmelia_severity;

typedef struct kmelia_session kmelia_session;
typedef struct kmelia_report kmelia_report;

KMELIA_API const char* kmelia_version(void);

/* Message of the last failing call on this thread, or "". */
KMELIA_API const char* kmelia_last_error(void);

KMELIA_API kmelia_status kmelia_session_create(kmelia_session** out);
KMELIA_API void kmelia_session_destroy(kmelia_session* s);

/* A file, or a directory scanned recursively for *.kmelia. */
KMELIA_API kmelia_status kmelia_session_add_path(kmelia_session* s, const char* path);
KMELIA_API kmelia_status kmelia_session_add_source(kmelia_session* s, const char* unit_name, const char* text);

/* Comma-separated subset of static,consistency,compliance,behavior,functional,extract. */
KMELIA_API kmelia_status kmelia_session_set_phases(kmelia_session* s, const char* csv);
KMELIA_API kmelia_status kmelia_session_set_bounds(kmelia_session* s, int int_bound, int set_bound, int depth);

/* NULL or "" leaves an output disabled. */
KMELIA_API kmelia_status kmelia_session_set_output_dirs(kmelia_session* s, const char* smt_dir, const char* dot_dir,
                                                        const char* extract_dir);

KMELIA_API kmelia_status kmelia_session_run(kmelia_session* s, kmelia_report** out);

KMELIA_API int kmelia_report_exit_code(const kmelia_report* r);
KMELIA_API size_t kmelia_report_count(const kmelia_report* r, kmelia_severity severity);
KMELIA_API kmelia_status kmelia_report_json(const kmelia_report* r, char** out);
KMELIA_API kmelia_status kmelia_report_text(const kmelia_report* r, int color, char** out);
KMELIA_API void kmelia_report_destroy(kmelia_report* r);

KMELIA_API void kmelia_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
