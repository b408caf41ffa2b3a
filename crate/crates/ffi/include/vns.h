#ifndef VNS_H
#define VNS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
typedef enum VnsStatus {
  VNS_STATUS_OK = 0,
  VNS_STATUS_NULL_POINTER = 1,
  VNS_STATUS_INVALID_ARGUMENT = 2,
  VNS_STATUS_BOUNDS_VIOLATION = 3,
  VNS_STATUS_NOT_CONVERGED = 4,
  VNS_STATUS_IO = 5,
  VNS_STATUS_PANIC = 6,
} VnsStatus;

// Opaque `n × n` real field on a periodic grid.
typedef struct VnsField VnsField;

// Opaque simulation: solver configuration plus current state.
typedef struct VnsSim VnsSim;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent failure on this thread; empty if none.
// The pointer stays valid until the next failing call on the same thread.
const char *vns_last_error_message(void);

// Copies `n*n` values (index `j*n + i`) into a new field on `[0, l)²`
// with two-thirds dealiasing.
//
// # Safety
// `values` must point to `n*n` readable doubles; `out` must be writable.
enum VnsStatus vns_field_new(uint32_t n, double l, const double *values, struct VnsField **out);

// # Safety
// `field` must come from this library and not have been freed; null is ignored.
void vns_field_free(struct VnsField *field);

// Grid size of a field, 0 for null.
//
// # Safety
// `field` must be null or a live handle.
uint32_t vns_field_n(const struct VnsField *field);

// Copies the field's `n*n` values into `dst`, which holds `len` doubles.
//
// # Safety
// `field` must be a live handle and `dst` must hold `len` writable doubles.
enum VnsStatus vns_field_values(const struct VnsField *field, double *dst, uintptr_t len);

// `a = R_μ ω` with `μ` checked against `[mu_lo, mu_hi]`.
//
// # Safety
// `mu` and `omega` must be live handles; `out` must be writable.
enum VnsStatus vns_apply_rmu(const struct VnsField *mu,
                             double mu_lo,
                             double mu_hi,
                             const struct VnsField *omega,
                             struct VnsField **out);

// Solves `R_μ ω = a` to relative tolerance `tol`; writes the iteration count
// to `iterations` when it is not null.
//
// # Safety
// `mu` and `a` must be live handles; `out` must be writable.
enum VnsStatus vns_invert_rmu(const struct VnsField *mu,
                              double mu_lo,
                              double mu_hi,
                              const struct VnsField *a,
                              double tol,
                              struct VnsField **out,
                              uint32_t *iterations);

// Velocity `u = ∇⊥Δ⁻¹ω` as two new fields.
//
// # Safety
// `omega` must be a live handle; `ux` and `uy` must be writable.
enum VnsStatus vns_biot_savart(const struct VnsField *omega,
                               struct VnsField **ux,
                               struct VnsField **uy);

// Builds a simulation from a configuration file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum VnsStatus vns_sim_new_from_config(const char *path, struct VnsSim **out);

// Advances by one step. `dt <= 0` selects the CFL step; a positive `dt`
// is capped by it.
//
// # Safety
// `sim` must be a live handle.
enum VnsStatus vns_sim_step(struct VnsSim *sim, double dt);

// Current time, NaN for null.
//
// # Safety
// `sim` must be null or a live handle.
double vns_sim_time(const struct VnsSim *sim);

// Copy of the current vorticity.
//
// # Safety
// `sim` must be a live handle; `out` must be writable.
enum VnsStatus vns_sim_omega(const struct VnsSim *sim, struct VnsField **out);

// # Safety
// `sim` must come from this library and not have been freed; null is ignored.
void vns_sim_free(struct VnsSim *sim);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VNS_H */
