#ifndef RIS_FFI_H
#define RIS_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RisStatus {
  RIS_STATUS_OK = 0,
  RIS_STATUS_NULL_POINTER = 1,
  RIS_STATUS_VALIDATION = 2,
  RIS_STATUS_NUMERICAL = 3,
  RIS_STATUS_RANK_DEFICIENT = 4,
  RIS_STATUS_CONFIG = 5,
  RIS_STATUS_IO = 6,
  RIS_STATUS_BUFFER_TOO_SMALL = 7,
  RIS_STATUS_PANIC = 8,
} RisStatus;

typedef enum RisMetric {
  RIS_METRIC_SUM_RATE = 0,
  RIS_METRIC_ZF_RATE = 1,
  RIS_METRIC_MMSE_RATE = 2,
  RIS_METRIC_MSE_TOT = 3,
} RisMetric;

/**
 * One channel realization together with its noise power.
 */
typedef struct RisChannel RisChannel;

/**
 * System parameters.
 */
typedef struct RisConfig RisConfig;

/**
 * A separated channel.
 */
typedef struct RisSeparated RisSeparated;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ris_version(void);

/**
 * Message of the last failed call on this thread (empty after a success).
 * The pointer stays valid until the next `ris_*` call on the thread.
 */
const char *ris_last_error_message(void);

/**
 * New configuration with default parameters.
 */
struct RisConfig *ris_config_default(void);

/**
 * Loads system parameters from a TOML file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum RisStatus ris_config_load(const char *path, struct RisConfig **out);

/**
 * Sets the BS array (`m_y x m_z`), RIS (`n_y x n_z`) and user count.
 *
 * # Safety
 * `cfg` must come from `ris_config_default` or `ris_config_load`.
 */
enum RisStatus ris_config_set_geometry(struct RisConfig *cfg,
                                       size_t m_y,
                                       size_t m_z,
                                       size_t n_y,
                                       size_t n_z,
                                       size_t k);

/**
 * Sets the RIS-BS Ricean factor; pass `INFINITY` for pure LOS.
 *
 * # Safety
 * `cfg` must come from `ris_config_default` or `ris_config_load`.
 */
enum RisStatus ris_config_set_kappa_br(struct RisConfig *cfg, double kappa_br);

/**
 * # Safety
 * `cfg` must be null or a handle not yet freed.
 */
void ris_config_free(struct RisConfig *cfg);

/**
 * Draws the channel of trial `trial` for `seed`; the same pair always
 * yields the same realization (and matches the first cell of a sweep).
 *
 * # Safety
 * `cfg` must be a live handle and `out` a writable pointer.
 */
enum RisStatus ris_channel_generate(const struct RisConfig *cfg,
                                    uint64_t seed,
                                    size_t trial,
                                    struct RisChannel **out);

/**
 * Writes BS antennas, RIS elements and users of a channel.
 *
 * # Safety
 * `ch` must be a live handle; output pointers may be null to skip them.
 */
enum RisStatus ris_channel_dims(const struct RisChannel *ch, size_t *m, size_t *n, size_t *k);

/**
 * # Safety
 * `ch` must be null or a handle not yet freed.
 */
void ris_channel_free(struct RisChannel *ch);

/**
 * Separates a channel. With `force` a scattered RIS-BS channel is
 * separated through its LOS part; without it such channels are rejected.
 *
 * # Safety
 * `ch` must be a live handle and `out` a writable pointer.
 */
enum RisStatus ris_separate(const struct RisChannel *ch, bool force, struct RisSeparated **out);

/**
 * # Safety
 * `sep` must be null or a handle not yet freed.
 */
void ris_separated_free(struct RisSeparated *sep);

/**
 * Continuous sum-rate design; writes `N` phases and the objective.
 *
 * # Safety
 * `sep` must be a live handle, `out_phases` must hold `len` doubles and
 * `out_objective` may be null.
 */
enum RisStatus ris_closed_form_sum_rate(const struct RisSeparated *sep,
                                        double *out_phases,
                                        size_t len,
                                        double *out_objective);

/**
 * Continuous total-MSE design; writes `N` phases and the objective.
 *
 * # Safety
 * As for `ris_closed_form_sum_rate`.
 */
enum RisStatus ris_closed_form_mse_tot(const struct RisSeparated *sep,
                                       double *out_phases,
                                       size_t len,
                                       double *out_objective);

/**
 * Discrete `bits`-bit design for a `RisMetric` code with `repeats` sweeps; writes the physical
 * phases and the objective.
 *
 * # Safety
 * As for `ris_closed_form_sum_rate`.
 */
enum RisStatus ris_muiq(const struct RisSeparated *sep,
                        uint32_t metric,
                        uint32_t bits,
                        size_t repeats,
                        double *out_phases,
                        size_t len,
                        double *out_objective);

/**
 * `RisMetric` value on the full channel at the given phases.
 *
 * # Safety
 * `ch` must be a live handle, `phases` must hold `len` doubles and
 * `out_value` must be writable.
 */
enum RisStatus ris_metric_direct(const struct RisChannel *ch,
                                 uint32_t metric,
                                 const double *phases,
                                 size_t len,
                                 double *out_value);

/**
 * `RisMetric` value through the separated form at the given phases.
 *
 * # Safety
 * As for `ris_metric_direct`, with a separated-channel handle.
 */
enum RisStatus ris_metric_separated(const struct RisSeparated *sep,
                                    uint32_t metric,
                                    const double *phases,
                                    size_t len,
                                    double *out_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RIS_FFI_H */
