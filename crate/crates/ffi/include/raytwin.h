#ifndef RAYTWIN_H
#define RAYTWIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RtStatus {
  RT_STATUS_OK = 0,
  RT_STATUS_NULL_POINTER = 1,
  RT_STATUS_INVALID_UTF8 = 2,
  RT_STATUS_INVALID_ARGUMENT = 3,
  RT_STATUS_VALIDATION = 4,
  RT_STATUS_RUNTIME = 5,
  RT_STATUS_OUT_OF_RANGE = 6,
  RT_STATUS_PANIC = 7,
} RtStatus;

// Opaque list of traced paths for one receiver.
typedef struct RtPathSet RtPathSet;

// Opaque validated scenario loaded from a JSON config.
typedef struct RtScenario RtScenario;

// Opaque parsed scene with its acceleration structure.
typedef struct RtScene RtScene;

// One propagation path. Angles in radians, delay in seconds.
typedef struct RtPath {
  double gain_re;
  double gain_im;
  double delay_s;
  double length_m;
  double aod_az;
  double aod_el;
  double aoa_az;
  double aoa_el;
  double doppler_hz;
  double path_loss_db;
  uint32_t interaction_count;
} RtPath;

typedef struct RtFresnel {
  double perp_re;
  double perp_im;
  double par_re;
  double par_im;
} RtFresnel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *rt_version(void);

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *rt_last_error_message(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must be null or a pointer obtained from this library that has not
// been freed.
void rt_string_free(char *s);

// Parses a scene XML document and builds its acceleration structure.
//
// # Safety
// `xml` must be a NUL-terminated string; `out` must point to writable
// storage for one pointer.
enum RtStatus rt_scene_parse(const char *xml, struct RtScene **out);

// # Safety
// `scene` must be null or a handle from [`rt_scene_parse`] not yet freed.
void rt_scene_free(struct RtScene *scene);

// # Safety
// `scene` must be a live scene handle; `out` writable.
enum RtStatus rt_scene_triangle_count(const struct RtScene *scene, size_t *out);

// # Safety
// `scene` must be a live scene handle; `out` writable.
enum RtStatus rt_scene_wavelength(const struct RtScene *scene, double *out);

// Traces all paths from `tx` to `rx` (each three doubles, metres) with
// `launch_count` Fibonacci launch directions and unit transmit power.
//
// # Safety
// `scene` must be a live handle, `tx`/`rx` point to three doubles and
// `out` is writable.
enum RtStatus rt_trace(const struct RtScene *scene,
                       const double *tx,
                       const double *rx,
                       uint32_t max_interactions,
                       double min_power_w,
                       size_t launch_count,
                       struct RtPathSet **out);

// # Safety
// `set` must be a live path-set handle; `out` writable.
enum RtStatus rt_pathset_len(const struct RtPathSet *set, size_t *out);

// # Safety
// `set` must be a live path-set handle; `out` writable.
enum RtStatus rt_pathset_get(const struct RtPathSet *set, size_t index, struct RtPath *out);

// # Safety
// `set` must be null or a handle from [`rt_trace`] not yet freed.
void rt_pathset_free(struct RtPathSet *set);

// Fresnel reflection coefficients (⊥, ∥) for complex refractive indices.
//
// # Safety
// `out` must be writable.
enum RtStatus rt_fresnel(double incident_angle,
                         double n1_re,
                         double n1_im,
                         double n2_re,
                         double n2_im,
                         double wavelength,
                         struct RtFresnel *out);

// Checks a config file. Writes the JSON validation report to `report_json`
// (free with [`rt_string_free`]) and returns `RT_STATUS_VALIDATION` when
// it lists problems.
//
// # Safety
// `config_path` must be a NUL-terminated string; `report_json` null or writable.
enum RtStatus rt_validate(const char *config_path, char **report_json);

// Loads and validates a scenario config.
//
// # Safety
// `config_path` must be a NUL-terminated string; `out` writable.
enum RtStatus rt_scenario_load(const char *config_path, struct RtScenario **out);

// Runs the scenario and writes its package under `output_dir`, which must
// be absent or empty.
//
// # Safety
// `scenario` must be a live handle; `output_dir` a NUL-terminated string.
enum RtStatus rt_scenario_run(const struct RtScenario *scenario, const char *output_dir);

// # Safety
// `scenario` must be null or a handle from [`rt_scenario_load`] not yet freed.
void rt_scenario_free(struct RtScenario *scenario);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RAYTWIN_H */
