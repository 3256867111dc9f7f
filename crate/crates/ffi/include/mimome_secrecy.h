#ifndef MIMOME_SECRECY_H
#define MIMOME_SECRECY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MsStatus {
  MS_STATUS_OK = 0,
  MS_STATUS_NULL_POINTER = 1,
  MS_STATUS_CONFIG = 2,
  MS_STATUS_DOMAIN = 3,
  MS_STATUS_IO = 4,
  MS_STATUS_UNSUPPORTED_SIZE = 5,
  MS_STATUS_OUTAGE_CERTAIN = 6,
  MS_STATUS_PANIC = 7,
} MsStatus;

typedef enum MsModulation {
  MS_MODULATION_BPSK = 0,
  MS_MODULATION_QPSK = 1,
} MsModulation;

typedef enum MsMiModel {
  MS_MI_MODEL_EXACT_BPSK = 0,
  MS_MI_MODEL_APPROX_BPSK = 1,
  MS_MI_MODEL_EXACT_QPSK = 2,
  MS_MI_MODEL_APPROX_QPSK = 3,
} MsMiModel;

// Opaque system configuration.
typedef struct MsConfig MsConfig;

// Simulation settings. `workers` does not change results, only speed.
typedef struct MsEstimatorConfig {
  uint64_t trials;
  uint64_t seed;
  uint32_t workers;
  enum MsMiModel mi_model;
} MsEstimatorConfig;

typedef struct MsEstimate {
  double mean;
  double std_error;
  uint64_t trials;
  uint64_t seed;
} MsEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *ms_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ms_version(void);

// Validates and allocates a configuration. SNRs are in dB.
enum MsStatus ms_config_new(uint32_t n_tx,
                            uint32_t n_rx,
                            uint32_t n_eve,
                            double snr_b_db,
                            double snr_e_db,
                            enum MsModulation modulation,
                            struct MsConfig **out);

// Releases a configuration; NULL is ignored.
void ms_config_free(struct MsConfig *cfg);

// Replaces both average SNRs (dB), keeping the handle unchanged on error.
enum MsStatus ms_config_set_snr(struct MsConfig *cfg, double snr_b_db, double snr_e_db);

enum MsStatus ms_mi(enum MsMiModel model, double gamma, double *out);

enum MsStatus ms_mi_inverse(enum MsMiModel model, double target, double *out);

// `∫_rs^1 t^(u−1) (t − rs)^v dt`.
enum MsStatus ms_h_term(double v, double u, double rs, double *out);

enum MsStatus ms_ergodic_rate_approx(const struct MsConfig *cfg, double *out);

enum MsStatus ms_ergodic_rate_quadrature(const struct MsConfig *cfg,
                                         enum MsMiModel model,
                                         double *out);

enum MsStatus ms_prob_nonzero(const struct MsConfig *cfg, double *out);

enum MsStatus ms_sop_approx(const struct MsConfig *cfg, double rs, double *out);

enum MsStatus ms_sop_semianalytic(const struct MsConfig *cfg,
                                  double rs,
                                  enum MsMiModel model,
                                  double *out);

enum MsStatus ms_sop_asymptotic(const struct MsConfig *cfg, double rs, bool exact, double *out);

enum MsStatus ms_estimate_ergodic_rate(const struct MsConfig *cfg,
                                       const struct MsEstimatorConfig *est,
                                       struct MsEstimate *out);

enum MsStatus ms_estimate_prob_nonzero(const struct MsConfig *cfg,
                                       const struct MsEstimatorConfig *est,
                                       struct MsEstimate *out);

enum MsStatus ms_estimate_sop(const struct MsConfig *cfg,
                              const struct MsEstimatorConfig *est,
                              double rs,
                              struct MsEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MIMOME_SECRECY_H */
