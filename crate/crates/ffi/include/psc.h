#ifndef PSC_H
#define PSC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes.
 */
typedef enum PscStatus {
  PSC_STATUS_OK = 0,
  PSC_STATUS_NULL_ARGUMENT = 1,
  PSC_STATUS_INVALID_UTF8 = 2,
  PSC_STATUS_ODD_PRIME_REQUIRED = 3,
  PSC_STATUS_INVALID_INPUT = 4,
  PSC_STATUS_PARSE_ERROR = 5,
  PSC_STATUS_NOT_A_CYCLE = 6,
  PSC_STATUS_PRECONDITION_FAILED = 7,
  PSC_STATUS_DEGREE_CAP = 8,
  PSC_STATUS_INTERNAL = 9,
} PscStatus;

/**
 * Chain over a group with integral or `Z/p^l` coefficients.
 */
typedef struct PscChain PscChain;

/**
 * Finite abelian p-group `Z/p^a_1 x ... x Z/p^a_n`.
 */
typedef struct PscGroup PscGroup;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; valid until the next call.
 */
const char *psc_last_error(void);

/**
 * Library version as a static string.
 */
const char *psc_version(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void psc_string_free(char *s);

/**
 * Create a group from an odd prime and `n` ascending exponents.
 *
 * # Safety
 * `alphas` must point to `n` values and `out` must be writable.
 */
enum PscStatus psc_group_new(uint64_t p, const uint32_t *alphas, size_t n, struct PscGroup **out);

/**
 * # Safety
 * `g` must come from [`psc_group_new`] or be null.
 */
void psc_group_free(struct PscGroup *g);

/**
 * Parse a chain such as `"T(c1,c5)"`; `ring_exponent` 0 means integers.
 *
 * # Safety
 * `g` must be a live group, `text` a nul-terminated string, `out` writable.
 */
enum PscStatus psc_chain_parse(const struct PscGroup *g,
                               uint32_t ring_exponent,
                               const char *text,
                               struct PscChain **out);

/**
 * # Safety
 * `c` must come from this library or be null.
 */
void psc_chain_free(struct PscChain *c);

/**
 * Canonical text of a chain.
 *
 * # Safety
 * `c` must be a live chain and `out` writable.
 */
enum PscStatus psc_chain_to_string(const struct PscChain *c, char **out);

/**
 * Degree of a chain.
 *
 * # Safety
 * `c` must be a live chain and `out` writable.
 */
enum PscStatus psc_chain_degree(const struct PscChain *c, uint32_t *out);

/**
 * Homology in degree `d` as JSON: invariant factors (0 for `Z`) and
 * representatives in canonical text.
 *
 * # Safety
 * `g` must be a live group and `out` writable.
 */
enum PscStatus psc_homology_json(const struct PscGroup *g,
                                 uint32_t d,
                                 uint32_t ring_exponent,
                                 char **out);

/**
 * Bockstein of a chain read mod `p^ell`; the result is a new chain mod `p`.
 *
 * # Safety
 * `c` must be a live chain and `out` writable.
 */
enum PscStatus psc_bockstein(const struct PscChain *c, uint32_t ell, struct PscChain **out);

/**
 * Derivation of order `kappa` on a chain read mod `p^ell`.
 *
 * # Safety
 * `c` must be a live chain and `out` writable.
 */
enum PscStatus psc_milnor(const struct PscChain *c,
                          uint32_t kappa,
                          uint32_t ell,
                          struct PscChain **out);

/**
 * Torality of an integral cycle: writes 1 if toral, 0 if atoral.
 *
 * # Safety
 * `c` must be a live chain and `out` writable.
 */
enum PscStatus psc_is_p_toral(const struct PscChain *c, int32_t *out);

/**
 * Certify an integral cycle. Writes 1 to `certified` and the certificate
 * JSON to `out`, or 0 and the failure reason JSON.
 *
 * # Safety
 * `c` must be a live chain; `certified` and `out` writable.
 */
enum PscStatus psc_certify(const struct PscChain *c,
                           int32_t assume_bordism,
                           int32_t *certified,
                           char **out);

/**
 * Verify a certificate given as JSON: writes 1 if every node checks.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` writable.
 */
enum PscStatus psc_verify_certificate(const char *json, int32_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PSC_H */
