#ifndef OFH_CONFORMANCE_H
#define OFH_CONFORMANCE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  OFH_STATUS_OK = 0,
  OFH_STATUS_NULL_ARGUMENT = 1,
  OFH_STATUS_INVALID_UTF8 = 2,
  OFH_STATUS_PROFILE = 3,
  OFH_STATUS_SELECTION = 4,
  OFH_STATUS_IO = 5,
  OFH_STATUS_NOT_FOUND = 6,
  OFH_STATUS_PANIC = 7,
} OfhStatus;

typedef enum {
  OFH_VERDICT_PASS = 0,
  OFH_VERDICT_FAIL = 1,
  OFH_VERDICT_BLOCKED = 2,
} OfhVerdict;

typedef enum {
  OFH_FORMAT_STRUCTURED = 0,
  OFH_FORMAT_HUMAN = 1,
} OfhFormat;

/**
 * Opaque lab profile.
 */
typedef struct OfhProfile OfhProfile;

/**
 * Opaque finished campaign with its evidence.
 */
typedef struct OfhReport OfhReport;

typedef struct {
  size_t total;
  size_t pass;
  size_t fail;
  size_t blocked;
} OfhSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *ofh_last_error(void);

/**
 * Harness version as a static string.
 */
const char *ofh_version(void);

size_t ofh_catalog_len(void);

/**
 * Case id at `index` in catalog order as a static string, or NULL when out
 * of range.
 */
const char *ofh_catalog_id(size_t index);

/**
 * # Safety
 * `out` must be valid for a pointer write.
 */
OfhStatus ofh_profile_default(OfhProfile **out);

/**
 * # Safety
 * `toml` must be a NUL-terminated string; `out` valid for a pointer write.
 */
OfhStatus ofh_profile_from_toml(const char *toml, OfhProfile **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` valid for a pointer write.
 */
OfhStatus ofh_profile_load(const char *path, OfhProfile **out);

/**
 * # Safety
 * `profile` must come from an `ofh_profile_*` constructor.
 */
OfhStatus ofh_profile_set_seed(OfhProfile *profile, uint64_t seed);

/**
 * # Safety
 * `profile` is NULL or an unreleased handle.
 */
void ofh_profile_free(OfhProfile *profile);

/**
 * Runs the cases named by `ids[0..n_ids]`, or the whole catalog when
 * `n_ids` is 0.
 *
 * # Safety
 * `profile` must be a live handle, `ids` valid for `n_ids` NUL-terminated
 * strings (may be NULL when `n_ids` is 0), `out` valid for a pointer write.
 */
OfhStatus ofh_run(const OfhProfile *profile, const char *const *ids, size_t n_ids, OfhReport **out);

/**
 * # Safety
 * `report` must be a live handle; `out` valid for an `OfhSummary` write.
 */
OfhStatus ofh_report_summary(const OfhReport *report, OfhSummary *out);

/**
 * # Safety
 * `report` must be a live handle, `id` NUL-terminated, `out` writable.
 */
OfhStatus ofh_report_verdict(const OfhReport *report, const char *id, OfhVerdict *out);

/**
 * Renders the report; release the string with `ofh_string_free`.
 *
 * # Safety
 * `report` must be a live handle; `out` valid for a pointer write.
 */
OfhStatus ofh_report_render(const OfhReport *report, OfhFormat format, char **out);

/**
 * Writes the run directory under `root`.
 *
 * # Safety
 * `report` must be a live handle; `root` NUL-terminated.
 */
OfhStatus ofh_report_write(const OfhReport *report, const char *root);

/**
 * # Safety
 * `report` is NULL or an unreleased handle.
 */
void ofh_report_free(OfhReport *report);

/**
 * # Safety
 * `s` is NULL or a string returned by this library and not yet released.
 */
void ofh_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OFH_CONFORMANCE_H */
