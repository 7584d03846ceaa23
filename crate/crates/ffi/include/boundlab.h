#ifndef BOUNDLAB_H
#define BOUNDLAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum BlStatus {
  BL_STATUS_OK = 0,
  BL_STATUS_DOMAIN = 1,
  BL_STATUS_LENGTH_MISMATCH = 2,
  BL_STATUS_PARSE = 3,
  BL_STATUS_NULL_POINTER = 4,
  BL_STATUS_IO = 5,
  BL_STATUS_CONFIG = 6,
  BL_STATUS_PANIC = 7,
} BlStatus;

/**
 * Opaque policy handle.
 */
typedef struct BlPolicy BlPolicy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy of the last error message on this thread, or NULL if none.
 * Release it with [`bl_string_free`].
 */
char *bl_last_error_message(void);

/**
 * # Safety
 * `s` must be NULL or a pointer returned by this library that has not been
 * freed yet.
 */
void bl_string_free(char *s);

/**
 * kl(p‖q) in nats.
 *
 * # Safety
 * `out_value` must be a valid pointer to a double.
 */
enum BlStatus bl_binary_kl(double p, double q, double *out_value);

/**
 * Upper (upper != 0) or lower kl inverse of `p_hat` at level `eps`.
 *
 * # Safety
 * `out_value` must be a valid pointer to a double.
 */
enum BlStatus bl_kl_inverse(double p_hat, double eps, int upper, double *out_value);

/**
 * Hoeffding radius for n samples in [0, 1].
 *
 * # Safety
 * `out_value` must be a valid pointer to a double.
 */
enum BlStatus bl_hoeffding_radius(uint64_t n, double delta, int two_sided, double *out_value);

/**
 * kl bound on the mean; `via_lemma` selects the ln(2√n/δ) budget and
 * `upper` the direction.
 *
 * # Safety
 * `out_value` must be a valid pointer to a double.
 */
enum BlStatus bl_kl_mean_bound(double p_hat,
                               uint64_t n,
                               double delta,
                               int via_lemma,
                               int upper,
                               double *out_value);

/**
 * Empirical Bernstein upper bound for a [0, 1]-valued sample.
 *
 * # Safety
 * `values` must point to `len` doubles and `out_value` to a double.
 */
enum BlStatus bl_empirical_bernstein(const double *values,
                                     uintptr_t len,
                                     double delta,
                                     double *out_value);

/**
 * Split-kl upper bound with segment points `grid` (strictly increasing,
 * covering the sample).
 *
 * # Safety
 * `values` must point to `len` doubles, `grid` to `grid_len` doubles and
 * `out_value` to a double.
 */
enum BlStatus bl_split_kl(const double *values,
                          uintptr_t len,
                          const double *grid,
                          uintptr_t grid_len,
                          double delta,
                          double *out_value);

/**
 * Unexpected Bernstein upper bound for a sample bounded above by `b`, with
 * the default λ grid.
 *
 * # Safety
 * `values` must point to `len` doubles and `out_value` to a double.
 */
enum BlStatus bl_unexpected_bernstein(const double *values,
                                      uintptr_t len,
                                      double b,
                                      double delta,
                                      double *out_value);

/**
 * PAC-Bayes-kl bound for posterior `rho` and prior `pi` over `m`
 * hypotheses, empirical Gibbs loss `emp_loss` on `n` samples.
 *
 * # Safety
 * `rho` and `pi` must point to `m` doubles and `out_value` to a double.
 */
enum BlStatus bl_pb_kl_bound(const double *rho,
                             const double *pi,
                             uintptr_t m,
                             uintptr_t n,
                             double emp_loss,
                             double delta,
                             double *out_value);

/**
 * Parses one log record. `features` receives 10 bytes.
 *
 * # Safety
 * `line` must be a NUL-terminated string; the out pointers must be valid.
 */
enum BlStatus bl_parse_log_line(const char *line,
                                uintptr_t k,
                                uintptr_t *action,
                                uint8_t *reward,
                                uint8_t *features);

/**
 * UCB1 on K arms; `improved != 0` selects the improved parametrization.
 *
 * # Safety
 * `handle` must be a valid pointer; free the result with [`bl_policy_free`].
 */
enum BlStatus bl_policy_new_ucb1(uintptr_t k,
                                 int improved,
                                 uint64_t seed,
                                 struct BlPolicy **handle);

/**
 * EXP3 on losses with the anytime rate.
 *
 * # Safety
 * `handle` must be a valid pointer; free the result with [`bl_policy_free`].
 */
enum BlStatus bl_policy_new_exp3(uintptr_t k, uint64_t seed, struct BlPolicy **handle);

/**
 * Anytime Hedge with η_t = 2√(ln K / t); needs full-information feedback.
 *
 * # Safety
 * `handle` must be a valid pointer; free the result with [`bl_policy_free`].
 */
enum BlStatus bl_policy_new_hedge(uintptr_t k, uint64_t seed, struct BlPolicy **handle);

/**
 * Picks the arm for the next round. Calling it again before an observe
 * call returns the same arm.
 *
 * # Safety
 * `policy` must come from a `bl_policy_new_*` call; `arm` must be valid.
 */
enum BlStatus bl_policy_select(struct BlPolicy *policy, uintptr_t *arm);

/**
 * Reports the loss of the selected arm.
 *
 * # Safety
 * `policy` must come from a `bl_policy_new_*` call.
 */
enum BlStatus bl_policy_observe_bandit(struct BlPolicy *policy, uintptr_t arm, double loss);

/**
 * Reports the whole loss vector of the round.
 *
 * # Safety
 * `policy` must come from a `bl_policy_new_*` call and `losses` must point
 * to `k` doubles.
 */
enum BlStatus bl_policy_observe_full(struct BlPolicy *policy, const double *losses, uintptr_t k);

/**
 * # Safety
 * `policy` must be NULL or come from a `bl_policy_new_*` call, and must not
 * be used afterwards.
 */
void bl_policy_free(struct BlPolicy *policy);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOUNDLAB_H */
