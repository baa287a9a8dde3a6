#ifndef UAVNAV_H
#define UAVNAV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UavnavAgentMode {
  UAVNAV_AGENT_MODE_TEN_STATE = 0,
  UAVNAV_AGENT_MODE_SINGLE_STATE = 1,
} UavnavAgentMode;

typedef enum UavnavAveraging {
  UAVNAV_AVERAGING_LINEAR = 0,
  UAVNAV_AVERAGING_DB = 1,
} UavnavAveraging;

typedef enum UavnavMotion {
  UAVNAV_MOTION_STRICT = 0,
  UAVNAV_MOTION_STOP_AT_WALL = 1,
} UavnavMotion;

typedef enum UavnavScheduleKind {
  UAVNAV_SCHEDULE_KIND_FIXED = 0,
  UAVNAV_SCHEDULE_KIND_VARYING = 1,
} UavnavScheduleKind;

// Result code of every fallible call.
typedef enum UavnavStatus {
  UAVNAV_STATUS_OK = 0,
  // A required pointer argument was `NULL`.
  UAVNAV_STATUS_NULL_POINTER = 1,
  // A numeric argument or config field is out of its domain.
  UAVNAV_STATUS_INVALID_ARGUMENT = 2,
  // A string argument is not valid UTF-8.
  UAVNAV_STATUS_INVALID_UTF8 = 3,
  // Map text could not be parsed or failed validation.
  UAVNAV_STATUS_MAP_INVALID = 4,
  // The output buffer is too small; the required size was reported.
  UAVNAV_STATUS_BUFFER_TOO_SMALL = 5,
  // An internal panic was caught.
  UAVNAV_STATUS_PANIC = 6,
} UavnavStatus;

// Opaque result of one episode.
typedef struct UavnavEpisode UavnavEpisode;

// Opaque validated occupancy map.
typedef struct UavnavMap UavnavMap;

// Plain-data episode configuration. Fill it with
// [`uavnav_episode_config_default`] and override fields as needed.
// `alpha_fixed` is used for the fixed schedule, `alpha_min`/`alpha_max`
// for the varying one.
typedef struct UavnavEpisodeConfig {
  double velocity_mps;
  double epoch_s;
  double rss_sample_interval_s;
  uint32_t smoothing_epochs;
  double epsilon;
  double gamma;
  enum UavnavScheduleKind schedule;
  double alpha_fixed;
  double alpha_min;
  double alpha_max;
  enum UavnavAgentMode mode;
  double tx_power_dbm;
  double carrier_hz;
  uint64_t seed;
  double timeout_s;
  // Nonzero enables Rayleigh fading.
  uint8_t fading;
  enum UavnavAveraging averaging;
  enum UavnavMotion motion;
} UavnavEpisodeConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread, or `NULL` if
// there was none. The pointer stays valid until the next failing call on
// the same thread.
const char *uavnav_last_error(void);

// Library version as a static NUL-terminated string.
const char *uavnav_version(void);

// Path loss in dB at `distance_m` meters.
//
// # Safety
// `out_db` must be `NULL` or valid for a write of one `double`.
enum UavnavStatus uavnav_path_loss_db(double distance_m, double *out_db);

// RSS state (1 = strongest .. 10 = weakest) for an RSS value in dBm.
//
// # Safety
// `out_state` must be `NULL` or valid for a write of one `uint8_t`.
enum UavnavStatus uavnav_quantize_state(double rss_dbm, uint8_t *out_state);

// Parses NUL-terminated map text into a new handle.
//
// # Safety
// `text` must be `NULL` or a valid NUL-terminated string; `out_map` must be
// `NULL` or valid for a write of one pointer.
enum UavnavStatus uavnav_map_parse(const char *text, struct UavnavMap **out_map);

// Creates a handle for the bundled default map.
//
// # Safety
// `out_map` must be `NULL` or valid for a write of one pointer.
enum UavnavStatus uavnav_map_default(struct UavnavMap **out_map);

// Grid extent in cells and cell size in meters. Any out-pointer may be
// `NULL` to skip that value.
//
// # Safety
// `map` must be `NULL` or a live handle; non-NULL out-pointers must be
// valid for one write.
enum UavnavStatus uavnav_map_dimensions(const struct UavnavMap *map,
                                        uint32_t *out_width,
                                        uint32_t *out_height,
                                        double *out_cell_size_m);

// Releases a map handle.
//
// # Safety
// `map` must be `NULL` or a handle from this library not yet freed.
void uavnav_map_free(struct UavnavMap *map);

// Writes the library's default episode configuration.
//
// # Safety
// `out_config` must be `NULL` or valid for one write.
enum UavnavStatus uavnav_episode_config_default(struct UavnavEpisodeConfig *out_config);

// Runs one episode on `map` and returns a new episode handle.
//
// # Safety
// `map` must be `NULL` or a live handle, `config` `NULL` or a valid
// pointer, and `out_episode` `NULL` or valid for one write.
enum UavnavStatus uavnav_run_episode(const struct UavnavMap *map,
                                     const struct UavnavEpisodeConfig *config,
                                     struct UavnavEpisode **out_episode);

// Episode outcome. `out_converged` receives 1 or 0; `out_time_s` the
// convergence time, or the elapsed time of a timed-out run. Any
// out-pointer may be `NULL`.
//
// # Safety
// `episode` must be `NULL` or a live handle; non-NULL out-pointers must be
// valid for one write.
enum UavnavStatus uavnav_episode_outcome(const struct UavnavEpisode *episode,
                                         uint8_t *out_converged,
                                         double *out_time_s,
                                         double *out_final_distance_m);

// Number of decision epochs recorded.
//
// # Safety
// `episode` must be `NULL` or a live handle; `out_count` `NULL` or valid
// for one write.
enum UavnavStatus uavnav_episode_step_count(const struct UavnavEpisode *episode, size_t *out_count);

// Copies the episode log as JSON lines into `buf`, NUL-terminated.
//
// `out_needed` (required) receives the buffer size including the NUL.
// Pass `buf = NULL` and `capacity = 0` to query it; a too-small buffer
// returns [`UavnavStatus::BufferTooSmall`] and is left untouched.
//
// # Safety
// `episode` must be `NULL` or a live handle; `buf` must be `NULL` or valid
// for `capacity` bytes; `out_needed` `NULL` or valid for one write.
enum UavnavStatus uavnav_episode_jsonl(const struct UavnavEpisode *episode,
                                       char *buf,
                                       size_t capacity,
                                       size_t *out_needed);

// Releases an episode handle.
//
// # Safety
// `episode` must be `NULL` or a handle from this library not yet freed.
void uavnav_episode_free(struct UavnavEpisode *episode);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UAVNAV_H */
