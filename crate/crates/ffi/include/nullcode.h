#ifndef NULLCODE_H
#define NULLCODE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum NcStatus {
  NcStatus_Ok = 0,
  NcStatus_NullPointer = 1,
  NcStatus_InvalidArgument = 2,
  NcStatus_BudgetExceeded = 3,
  NcStatus_LengthMismatch = 4,
  NcStatus_DomainMismatch = 5,
  NcStatus_EmptySupport = 6,
  NcStatus_Parse = 7,
  NcStatus_Io = 8,
  NcStatus_Panic = 9,
} NcStatus;

/**
 * Linear code folded over `Σ = F_q^m`.
 */
typedef struct NcCode NcCode;

/**
 * Finite field `GF(2^s)`.
 */
typedef struct NcField NcField;

/**
 * Polynomial hash family.
 */
typedef struct NcHashFamily NcHashFamily;

/**
 * Biased oracle instance for a code.
 */
typedef struct NcInstance NcInstance;

typedef struct NcCodeInfo {
  /**
   * Unfolded length `N`.
   */
  size_t len;
  /**
   * Folded length `n`.
   */
  size_t n;
  size_t m;
  uint64_t q;
  size_t dimension;
} NcCodeInfo;

typedef struct NcAlg1Summary {
  double success_probability;
  double epsilon;
  double delta;
  double l2_distance;
  bool bound_holds;
} NcAlg1Summary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *nc_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *nc_version(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void nc_string_free(char *s);

/**
 * # Safety
 * `out_field` must be a valid pointer.
 */
enum NcStatus nc_field_new(uint32_t s, struct NcField **out_field);

/**
 * # Safety
 * `field` must be null or a handle from [`nc_field_new`].
 */
void nc_field_free(struct NcField *field);

/**
 * # Safety
 * `field` must be a live handle and `out_value` a valid pointer.
 */
enum NcStatus nc_field_mul(const struct NcField *field,
                           uint32_t a,
                           uint32_t b,
                           uint32_t *out_value);

/**
 * # Safety
 * `field` must be a live handle and `out_value` a valid pointer.
 */
enum NcStatus nc_field_inv(const struct NcField *field, uint32_t a, uint32_t *out_value);

/**
 * # Safety
 * `field` must be a live handle and `out_value` a valid pointer.
 */
enum NcStatus nc_field_trace(const struct NcField *field, uint32_t a, uint32_t *out_value);

/**
 * Preset folded Reed-Solomon code for parameter `t`.
 *
 * # Safety
 * `out_code` must be a valid pointer.
 */
enum NcStatus nc_code_preset(uint32_t t, struct NcCode **out_code);

/**
 * Self-dual `[8,4]` toy code folded into `Σ = F_2^2`.
 *
 * # Safety
 * `out_code` must be a valid pointer.
 */
enum NcStatus nc_code_toy(struct NcCode **out_code);

/**
 * Code from its JSON description.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out_code` a valid pointer.
 */
enum NcStatus nc_code_from_json(const char *json, struct NcCode **out_code);

/**
 * JSON description of a code; release with [`nc_string_free`].
 *
 * # Safety
 * `code` must be a live handle and `out_json` a valid pointer.
 */
enum NcStatus nc_code_to_json(const struct NcCode *code, char **out_json);

/**
 * # Safety
 * `code` must be null or a handle from this library.
 */
void nc_code_free(struct NcCode *code);

/**
 * # Safety
 * `code` must be a live handle and `out_info` a valid pointer.
 */
enum NcStatus nc_code_info(const struct NcCode *code, struct NcCodeInfo *out_info);

/**
 * Whether the unfolded word of length `len` is a codeword.
 *
 * # Safety
 * `word` must point to `len` values, `code` must be a live handle.
 */
enum NcStatus nc_code_contains(const struct NcCode *code,
                               const uint32_t *word,
                               size_t len,
                               bool *out_result);

/**
 * Samples a `num/den`-biased instance.
 *
 * # Safety
 * `code` must be a live handle and `out_instance` a valid pointer.
 */
enum NcStatus nc_instance_sample(const struct NcCode *code,
                                 uint64_t num,
                                 uint64_t den,
                                 uint64_t seed,
                                 struct NcInstance **out_instance);

/**
 * Instance whose tables are identically `value`.
 *
 * # Safety
 * `code` must be a live handle and `out_instance` a valid pointer.
 */
enum NcStatus nc_instance_constant(const struct NcCode *code,
                                   bool value,
                                   struct NcInstance **out_instance);

/**
 * # Safety
 * `instance` must be null or a handle from this library.
 */
void nc_instance_free(struct NcInstance *instance);

/**
 * Whether the word is a codeword on which every oracle bit is zero.
 *
 * # Safety
 * `word` must point to `len` values, `instance` must be a live handle.
 */
enum NcStatus nc_instance_verify(const struct NcInstance *instance,
                                 const uint32_t *word,
                                 size_t len,
                                 bool *out_result);

/**
 * # Safety
 * `instance` must be a live handle and `out_count` a valid pointer.
 */
enum NcStatus nc_instance_count_solutions(const struct NcInstance *instance, uint64_t *out_count);

/**
 * Exact simulation of the quantum protocol on `instance`.
 *
 * # Safety
 * `instance` must be a live handle and `out_summary` a valid pointer.
 */
enum NcStatus nc_alg1_run(const struct NcInstance *instance, struct NcAlg1Summary *out_summary);

/**
 * # Safety
 * `out_family` must be a valid pointer.
 */
enum NcStatus nc_hash_family_new(uint32_t r,
                                 size_t lambda,
                                 size_t n,
                                 uint64_t sigma,
                                 struct NcHashFamily **out_family);

/**
 * # Safety
 * `family` must be null or a handle from this library.
 */
void nc_hash_family_free(struct NcHashFamily *family);

/**
 * Output bits of `h_key(e, i)` for the symbol of rank `rank`.
 *
 * # Safety
 * `key` must point to `key_len` coefficients.
 */
enum NcStatus nc_hash_eval(const struct NcHashFamily *family,
                           const uint32_t *key,
                           size_t key_len,
                           uint64_t rank,
                           size_t i,
                           uint32_t *out_value);

/**
 * `2^r · suc^t`.
 */
double nc_union_bound(uint32_t r, uint64_t t, double suc);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NULLCODE_H */
