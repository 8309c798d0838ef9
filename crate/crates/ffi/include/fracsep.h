#ifndef FRACSEP_H
#define FRACSEP_H

/* Generated by cbindgen from the fracsep-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum {
  FRACSEP_STATUS_OK = 0,
  FRACSEP_STATUS_NULL_POINTER = 1,
  FRACSEP_STATUS_INVALID_ARGUMENT = 2,
  FRACSEP_STATUS_INTERNAL_ERROR = 3,
} FracsepStatus;

/**
 * Opaque jump-law handle (single-jump probabilities and tail tables).
 */
typedef struct FracsepLaw FracsepLaw;

/**
 * Opaque stationary-profile handle.
 */
typedef struct FracsepProfile FracsepProfile;

/**
 * Build a jump law for `gamma` in (1, 2) with a tail table of `k_max`
 * entries (pass 0 for the default table size). The handle must be
 * released with `fracsep_law_free`.
 *
 * # Safety
 * `out_law` must be a valid pointer.
 */
FracsepStatus fracsep_law_new(double gamma, uintptr_t k_max, FracsepLaw **out_law);

/**
 * Release a law handle. A null pointer is a no-op.
 *
 * # Safety
 * `law` must have come from `fracsep_law_new` and not been freed.
 */
void fracsep_law_free(FracsepLaw *law);

/**
 * Normalizing constant `c_gamma = 1 / (2 zeta(1 + gamma))`.
 *
 * # Safety
 * `law` and `out` must be valid pointers.
 */
FracsepStatus fracsep_law_c_gamma(const FracsepLaw *law, double *out);

/**
 * Single-jump probability `p(z)`.
 *
 * # Safety
 * `law` and `out` must be valid pointers.
 */
FracsepStatus fracsep_law_p(const FracsepLaw *law, int64_t z, double *out);

/**
 * Tail `T(k) = sum_{j >= k} p(j)`, `k >= 1`.
 *
 * # Safety
 * `law` and `out` must be valid pointers.
 */
FracsepStatus fracsep_law_tail(const FracsepLaw *law, uintptr_t k, double *out);

/**
 * Hydrostatic limit of `N^{gamma-1} theta_N`.
 *
 * # Safety
 * `law` and `out` must be valid pointers.
 */
FracsepStatus fracsep_law_theta_limit(const FracsepLaw *law,
                                      double alpha,
                                      double beta,
                                      double *out);

/**
 * Build the stationary profile `rho_bar` for reservoir densities
 * `alpha`, `beta` in [0, 1]. Release with `fracsep_profile_free`.
 *
 * # Safety
 * `out_profile` must be a valid pointer.
 */
FracsepStatus fracsep_profile_new(double gamma,
                                  double alpha,
                                  double beta,
                                  FracsepProfile **out_profile);

/**
 * Release a profile handle. A null pointer is a no-op.
 *
 * # Safety
 * `profile` must have come from `fracsep_profile_new` and not been freed.
 */
void fracsep_profile_free(FracsepProfile *profile);

/**
 * Evaluate `rho_bar(q)` (exterior data for q outside (0, 1)).
 *
 * # Safety
 * `profile` and `out` must be valid pointers.
 */
FracsepStatus fracsep_profile_eval(const FracsepProfile *profile, double q, double *out);

/**
 * Right-exit probability `Psi(q)` of the gamma-stable process.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
FracsepStatus fracsep_psi(double gamma, double q, double *out);

/**
 * Poisson kernel `P(q, y)` of the interval (0 for y inside [0, 1]).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
FracsepStatus fracsep_poisson_kernel(double gamma, double q, double y, double *out);

/**
 * Fractional Fick constant from the direct double-integral route at cut
 * point `x`, with quadrature tolerance `tol`.
 *
 * # Safety
 * `profile` and `out` must be valid pointers.
 */
FracsepStatus fracsep_fick_rhs(const FracsepProfile *profile, double x, double tol, double *out);

/**
 * Fractional Fick constant through the independent phi route.
 *
 * # Safety
 * `law`, `profile`, and `out` must be valid pointers.
 */
FracsepStatus fracsep_fick_via_phi(const FracsepLaw *law,
                                   const FracsepProfile *profile,
                                   double tol,
                                   double *out);

/**
 * Monte Carlo estimate of `Psi(q)` by simulating stable-process exits;
 * writes the point estimate and its standard error.
 *
 * # Safety
 * `out_p` and `out_stderr` must be valid pointers.
 */
FracsepStatus fracsep_exit_right_probability(double gamma,
                                             double q,
                                             uint64_t walkers,
                                             double step_ratio,
                                             uint64_t seed,
                                             double *out_p,
                                             double *out_stderr);

/**
 * NUL-terminated version string of the underlying library; static
 * storage, do not free.
 */
const char *fracsep_version(void);

#endif  /* FRACSEP_H */
