#ifndef PROXILINK_PROXILINK_H
#define PROXILINK_PROXILINK_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PROXILINK_BUILDING)
#    define PL_API __declspec(dllexport)
#  else
#    define PL_API __declspec(dllimport)
#  endif
#else
#  define PL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/*
 * Error handling
 *
 * Every fallible call returns a pl_status. On failure, pl_last_error() holds a
 * human-readable message for the calling thread until its next failing call.
 * Strings returned through char** out-parameters are owned by the caller and
 * must be released with pl_string_free().
 */
typedef enum pl_status {
  PL_OK = 0,
  PL_ERR_DOMAIN,
  PL_ERR_CONFIGURATION,
  PL_ERR_NOT_FOUND,
  PL_ERR_DEGENERATE,
  PL_ERR_POINT_AT_INFINITY,
  PL_ERR_VALIDATION,
  PL_ERR_FORMAT,
  PL_ERR_STREAM,
  PL_ERR_INVALID_SAMPLE,
  PL_ERR_EMPTY_INPUT,
  PL_ERR_IO,
  PL_ERR_PROTOCOL,
  PL_ERR_INVALID_ARGUMENT,
  PL_ERR_INTERNAL
} pl_status;

PL_API const char* pl_status_name(pl_status status);
PL_API const char* pl_last_error(void);
PL_API void pl_string_free(char* s);
PL_API const char* pl_version(void);

/* Proxemic zones. Boundary distances belong to the nearer zone. */
typedef enum pl_zone {
  PL_ZONE_INTIMATE = 0,
  PL_ZONE_PERSONAL,
  PL_ZONE_SOCIAL,
  PL_ZONE_PUBLIC
} pl_zone;

PL_API pl_status pl_classify_zone(double distance_m, pl_zone* out);
PL_API const char* pl_zone_name(pl_zone zone);

/* Layout: slots ordered by distance, a participant -> slot assignment and a
 * gain policy. */
typedef struct pl_layout pl_layout;

typedef struct pl_slot {
  const char* id;
  const char* label;
  double distance_m;
} pl_slot;

typedef enum pl_direction { PL_FORWARD = 0, PL_BACKWARD } pl_direction;

PL_API pl_status pl_layout_create(const pl_slot* slots, size_t count, pl_layout** out);
PL_API void pl_layout_destroy(pl_layout* layout);
/* table[0] must be 1.0, non-increasing, every entry in [0,1]. */
PL_API pl_status pl_layout_use_rank_table(pl_layout* layout, const double* table, size_t count);
PL_API pl_status pl_layout_use_inverse_square(pl_layout* layout);
/* Seats a new participant on a free slot. */
PL_API pl_status pl_layout_place(pl_layout* layout, const char* participant, const char* slot);
PL_API pl_status pl_layout_unassign(pl_layout* layout, const char* participant);
/* Moves an assigned participant, swapping with the slot's occupant. */
PL_API pl_status pl_layout_set(pl_layout* layout, const char* participant, const char* slot);
/* *changed is 0 when the rotation left the assignment as it was. */
PL_API pl_status pl_layout_rotate(pl_layout* layout, pl_direction direction, int* changed);
PL_API pl_status pl_layout_version(const pl_layout* layout, uint64_t* out);
PL_API pl_status pl_layout_slot_of(const pl_layout* layout, const char* participant, char** out);
PL_API pl_status pl_layout_gain(const pl_layout* layout, const char* participant, double* out);
/* {"participant": gain, ...} */
PL_API pl_status pl_layout_gains_json(const pl_layout* layout, char** out);

/* Calibration geometry. Quad corners run TL, TR, BR, BL. Homographies are
 * row-major 3x3 with m[8] == 1. */
typedef struct pl_point {
  double x;
  double y;
} pl_point;

typedef struct pl_quad {
  pl_point corners[4];
} pl_quad;

typedef struct pl_homography {
  double m[9];
} pl_homography;

/* *reason is NULL for a usable quad, otherwise a caller-owned message. */
PL_API pl_status pl_quad_defect(const pl_quad* quad, char** reason);
PL_API pl_status pl_homography_solve(const pl_quad* source, const pl_quad* target, pl_homography* out);
PL_API pl_status pl_homography_apply(const pl_homography* h, pl_point p, pl_point* out);
PL_API pl_status pl_homography_invert(const pl_homography* h, pl_homography* out);
/* apply(out, p) == apply(a, apply(b, p)) */
PL_API pl_status pl_homography_compose(const pl_homography* a, const pl_homography* b, pl_homography* out);

/* Calibration profiles. The report is JSON:
 *   {"ok":bool,"slots":[{"id","label","distance_m","zone"}],
 *    "issues":[{"slot","message"}]}
 * Returns PL_OK for a valid profile and PL_ERR_VALIDATION otherwise; the
 * report is filled in both cases. */
PL_API pl_status pl_profile_check(const char* text, char** report);
PL_API pl_status pl_profile_check_file(const char* path, char** report);
/* Canonical serialization of a valid profile. */
PL_API pl_status pl_profile_canonical(const char* text, char** out);

/* Wave gesture detection on the lateral hand axis (millimeters, seconds). */
typedef struct pl_detector pl_detector;

typedef struct pl_detector_config {
  double window_s;
  double min_amplitude_mm;
  int min_reversals;
  double cooldown_s;
  double jitter_mm;
} pl_detector_config;

typedef struct pl_hand_sample {
  double t;
  double x;
  double y;
  double z;
} pl_hand_sample;

typedef enum pl_wave_direction { PL_WAVE_LEFT = 0, PL_WAVE_RIGHT } pl_wave_direction;

typedef struct pl_gesture_event {
  pl_wave_direction direction;
  double t_detect;
  double t_start;
  double t_end;
} pl_gesture_event;

PL_API void pl_detector_config_default(pl_detector_config* out);
/* config may be NULL for the defaults. */
PL_API pl_status pl_detector_create(const pl_detector_config* config, pl_detector** out);
PL_API void pl_detector_destroy(pl_detector* detector);
/* *fired is set to 1 and *event filled when the sample completes a wave. */
PL_API pl_status pl_detector_feed(pl_detector* detector, const pl_hand_sample* sample, int* fired,
                                  pl_gesture_event* event);
PL_API pl_status pl_detector_reset(pl_detector* detector);

/* Audio. Samples are normalized to [-1,1]; outputs are clamped. */
PL_API pl_status pl_audio_apply_gain(const double* in, size_t n, double gain, double* out);
/* out[i] = clamp(sum_k gains[k] * frames[k][i]) */
PL_API pl_status pl_audio_mix(const double* const* frames, const double* gains, size_t frame_count, size_t n,
                              double* out);
PL_API pl_status pl_audio_rms(const double* samples, size_t n, double* out);

/* Session server. */
typedef struct pl_server pl_server;

/* Loads a server config file; failures are PL_ERR_CONFIGURATION and name the
 * field. */
PL_API pl_status pl_server_create(const char* config_path, pl_server** out);
PL_API void pl_server_destroy(pl_server* server);
/* PL_ERR_IO when the address cannot be bound. */
PL_API pl_status pl_server_listen(pl_server* server);
PL_API pl_status pl_server_address(const pl_server* server, char** out);
/* Blocks until pl_server_stop(). */
PL_API pl_status pl_server_run(pl_server* server);
/* Thread-safe. */
PL_API pl_status pl_server_stop(pl_server* server);

/* Gesture trace replay against a running server. Each JSON line of output is
 * passed to `on_line`. */
typedef void (*pl_line_callback)(const char* line, void* user);

typedef struct pl_replay_options {
  const char* trace_path;
  const char* address;
  const char* room;
  const char* participant; /* NULL for the default */
  double timeout_s;        /* <= 0 for the default */
} pl_replay_options;

PL_API pl_status pl_replay(const pl_replay_options* options, pl_line_callback on_line, void* user);

/* Distance/intimacy cross-tabulation over a session event log. Either output
 * may be NULL. */
PL_API pl_status pl_analyze(const char* log_path, const char* declarations_path, char** report_json,
                            char** matrix_csv);

#ifdef __cplusplus
}
#endif

#endif
