#ifndef TCLKRAUS_H
#define TCLKRAUS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes shared by every function of the C API.
typedef enum TkStatus {
  TK_STATUS_OK = 0,
  TK_STATUS_NULL_POINTER = 1,
  TK_STATUS_INVALID_ARGUMENT = 2,
  TK_STATUS_DIMENSION_MISMATCH = 3,
  TK_STATUS_NOT_HERMITIAN = 4,
  // Quadrature or integrator failure, non-finite values, trace drift.
  TK_STATUS_NUMERICAL = 5,
  TK_STATUS_NOT_COMPLETELY_POSITIVE = 6,
  TK_STATUS_OUTSIDE_VALIDITY = 7,
  TK_STATUS_TRUNCATION_INSUFFICIENT = 8,
  // Malformed or inconsistent scenario file.
  TK_STATUS_SCENARIO = 9,
  TK_STATUS_IO = 10,
  TK_STATUS_BUFFER_TOO_SMALL = 11,
  TK_STATUS_PANIC = 12,
} TkStatus;

// Bath correlation model (discrete modes, Ohmic or Markovian).
typedef struct TkBath TkBath;

// Second-order TCL generator: system Hamiltonian, error generators and bath.
typedef struct TkGenerator TkGenerator;

// Canonical Kraus set of the second-order channel at one time.
typedef struct TkKrausSet TkKrausSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the calling thread's last error message into `buf` (NUL-terminated,
// truncated to `len` bytes). Returns the full message length in bytes
// excluding the terminator, or 0 when there is no error.
//
// # Safety
// `buf` must be NULL or point to `len` writable bytes.
size_t tk_last_error_message(char *buf, size_t len);

// Forget the calling thread's last error.
void tk_clear_error(void);

// Discrete bath of `n_modes` modes coupled to a single generator.
// `g` holds `n_modes` interleaved complex couplings.
//
// # Safety
// `omegas` must point to `n_modes` doubles, `g` to `2·n_modes` doubles and
// `out` to writable storage for one pointer.
enum TkStatus tk_bath_discrete(size_t n_modes,
                               const double *omegas,
                               const double *g,
                               double temperature,
                               struct TkBath **out);

// Ohmic bath with exponential cutoff, identical and independent for each of
// `n_generators` generators.
//
// # Safety
// `out` must point to writable storage for one pointer.
enum TkStatus tk_bath_ohmic(double eta,
                            double cutoff,
                            double temperature,
                            size_t n_generators,
                            struct TkBath **out);

// Delta-correlated bath `χ(t) = ½γ δ(t)` with an `n×n` Hermitian PSD `γ`
// given as interleaved complex entries.
//
// # Safety
// `gamma` must point to `2·n·n` doubles and `out` to writable storage for one pointer.
enum TkStatus tk_bath_markovian(size_t n_generators, const double *gamma, struct TkBath **out);

// Number of error generators the bath couples to.
//
// # Safety
// `bath` must be NULL or a live handle.
size_t tk_bath_generators(const struct TkBath *bath);

// `χ_{αβ}(t)` written to `out[0..2]` as `re, im`.
//
// # Safety
// `bath` must be a live handle and `out` must point to 2 writable doubles.
enum TkStatus tk_bath_chi(const struct TkBath *bath,
                          size_t alpha,
                          size_t beta,
                          double t,
                          double *out);

// # Safety
// `bath` must be NULL or a handle not yet freed.
void tk_bath_free(struct TkBath *bath);

// Build a TCL2 generator for a `d`-level system. `h` is the `d×d` system
// Hamiltonian, `generators` holds `n_generators` stacked `d×d` Hermitian
// operators. The bath is copied; it may be freed afterwards.
//
// # Safety
// `h` must point to `2·d·d` doubles, `generators` to `2·n·d·d` doubles,
// `bath` must be a live handle and `out` writable storage for one pointer.
enum TkStatus tk_generator_new(size_t d,
                               const double *h,
                               size_t n_generators,
                               const double *generators,
                               const struct TkBath *bath,
                               struct TkGenerator **out);

// System dimension `d`.
//
// # Safety
// `gen` must be NULL or a live handle.
size_t tk_generator_dim(const struct TkGenerator *gen);

// Dissipative part `C(t)ρ` of the TCL2 generator.
//
// # Safety
// `gen` must be a live handle; `rho` and `out` must point to `2·d·d` doubles.
enum TkStatus tk_generator_collision(const struct TkGenerator *gen,
                                     double t,
                                     const double *rho,
                                     double *out);

// Integrate the TCL2 master equation from `rho0` on a uniform grid of
// `n_points` times in `[0, t_max]`, writing the `n_points` states to `out`.
//
// # Safety
// `gen` must be a live handle, `rho0` must point to `2·d·d` doubles and
// `out` to `2·n_points·d·d` writable doubles.
enum TkStatus tk_generator_evolve(const struct TkGenerator *gen,
                                  const double *rho0,
                                  double t_max,
                                  size_t n_points,
                                  double *out);

// # Safety
// `gen` must be NULL or a handle not yet freed.
void tk_generator_free(struct TkGenerator *gen);

// Canonical (interaction-picture) Kraus set of the second-order channel at
// time `t`. `cp_tolerance <= 0` selects the default clipping threshold;
// `normalize != 0` applies the `S^{-1/2}` completeness correction.
//
// # Safety
// `gen` must be a live handle and `out` writable storage for one pointer.
enum TkStatus tk_kraus_born(const struct TkGenerator *gen,
                            double t,
                            double cp_tolerance,
                            int normalize,
                            struct TkKrausSet **out);

// Number of Kraus operators.
//
// # Safety
// `set` must be NULL or a live handle.
size_t tk_kraus_count(const struct TkKrausSet *set);

// Operator dimension `d`.
//
// # Safety
// `set` must be NULL or a live handle.
size_t tk_kraus_dim(const struct TkKrausSet *set);

// Copy the operators (stacked, `2·count·d·d` doubles) into `out`.
// `len` is the capacity of `out` in doubles.
//
// # Safety
// `set` must be a live handle and `out` must point to `len` writable doubles.
enum TkStatus tk_kraus_operators(const struct TkKrausSet *set, double *out, size_t len);

// Copy the eigenvalues `d_α` (descending, one per operator) into `out`.
//
// # Safety
// `set` must be a live handle and `out` must point to `len` writable doubles.
enum TkStatus tk_kraus_eigenvalues(const struct TkKrausSet *set, double *out, size_t len);

// `‖Σ K†K − I‖_max`, or NaN for a NULL handle.
//
// # Safety
// `set` must be NULL or a live handle.
double tk_kraus_completeness(const struct TkKrausSet *set);

// `Σ K ρ K†` in the interaction picture.
//
// # Safety
// `set` must be a live handle; `rho` and `out` must point to `2·d·d` doubles.
enum TkStatus tk_kraus_apply(const struct TkKrausSet *set, const double *rho, double *out);

// # Safety
// `set` must be NULL or a handle not yet freed.
void tk_kraus_free(struct TkKrausSet *set);

// Trace distance `½‖ρ₁ − ρ₂‖₁` of two `d×d` Hermitian matrices.
//
// # Safety
// `rho1` and `rho2` must point to `2·d·d` doubles and `out` to one writable double.
enum TkStatus tk_trace_distance(size_t d, const double *rho1, const double *rho2, double *out);

// Run a scenario file and write its artifacts to `out_dir` (or the
// scenario's `output_dir`, or `out/<name>` when both are NULL/absent).
// `*gates_passed` is set to 1 when every declared gate passes, else 0.
//
// # Safety
// `path` must be a NUL-terminated string, `out_dir` NULL or a NUL-terminated
// string, and `gates_passed` must point to one writable `int`.
enum TkStatus tk_run_scenario(const char *path, const char *out_dir, int *gates_passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TCLKRAUS_H */
