#ifndef MCJULIA_H
#define MCJULIA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Escape code of a bounded point, in grids and from [`mc_escape_time`].
#define MC_BOUNDED_CODE 65535

typedef enum {
  MC_FORMAT_MCVOX = 0,
  MC_FORMAT_PLY = 1,
  MC_FORMAT_PGM_STACK = 2,
} McFormat;

typedef enum {
  MC_SLICE_CASE_EVEN = 0,
  MC_SLICE_CASE_ODD_C_ZERO = 1,
  MC_SLICE_CASE_ODD_C_CONTAINS_ONE = 2,
  MC_SLICE_CASE_ODD_C_CLOSED = 3,
  MC_SLICE_CASE_ODD_C_OPEN = 4,
} McSliceCase;

typedef enum {
  MC_STATUS_OK = 0,
  MC_STATUS_NULL_POINTER = 1,
  MC_STATUS_INVALID_ARGUMENT = 2,
  MC_STATUS_ORDER_OUT_OF_RANGE = 3,
  MC_STATUS_NON_REAL_PARAMETER = 4,
  MC_STATUS_CLASS_MISMATCH = 5,
  MC_STATUS_MEMORY_BUDGET = 6,
  MC_STATUS_IO = 7,
  MC_STATUS_FORMAT = 8,
  MC_STATUS_BUFFER_TOO_SMALL = 9,
  MC_STATUS_PANIC = 10,
} McStatus;

// Opaque rendered voxel grid.
typedef struct McGrid McGrid;

// Opaque multicomplex number.
typedef struct McMulticomplex McMulticomplex;

// Opaque iteration parameters.
typedef struct McParams McParams;

// Class descriptor filled by [`mc_classify`].
typedef struct {
  McSliceCase slice_case;
  // Sorted squares, each -1 or +1.
  int8_t squares[3];
  uint32_t representative_order;
  uint32_t representative_masks[3];
} McSliceClass;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// Valid until the next call into the library on this thread.
const char *mc_last_error(void);

// Library version as a static NUL-terminated string.
const char *mc_version(void);

// Creates an order-`order` number from `2^order` coefficients indexed by unit mask.
//
// # Safety
// `coeffs` must point to `len` readable doubles; `out` must be writable.
McStatus mc_multicomplex_new(uint32_t order,
                             const double *coeffs,
                             size_t len,
                             McMulticomplex **out);

// # Safety
// `z` must be null or a handle from this library, not yet freed.
void mc_multicomplex_free(McMulticomplex *z);

// # Safety
// `z` must be a live handle; `out` must be writable.
McStatus mc_multicomplex_order(const McMulticomplex *z, uint32_t *out);

// Copies the coefficients into `out`, which must hold `2^order` doubles.
//
// # Safety
// `z` must be a live handle; `out` must point to `len` writable doubles.
McStatus mc_multicomplex_coeffs(const McMulticomplex *z, double *out, size_t len);

// # Safety
// `a` and `b` must be live handles; `out` must be writable.
McStatus mc_multicomplex_mul(const McMulticomplex *a,
                             const McMulticomplex *b,
                             McMulticomplex **out);

// # Safety
// `a` must be a live handle; `out` must be writable.
McStatus mc_multicomplex_pow(const McMulticomplex *a, uint32_t m, McMulticomplex **out);

// # Safety
// `z` must be a live handle; `out` must be writable.
McStatus mc_multicomplex_norm(const McMulticomplex *z, double *out);

// Parameters for `z^power + c`; `c` is copied.
//
// # Safety
// `c` must be a live handle; `out` must be writable.
McStatus mc_params_new(uint32_t power, const McMulticomplex *c, uint32_t max_iter, McParams **out);

// Parameters with a real `c` at the given order.
//
// # Safety
// `out` must be writable.
McStatus mc_params_new_real(uint32_t order,
                            uint32_t power,
                            double c,
                            uint32_t max_iter,
                            McParams **out);

// # Safety
// `p` must be null or a handle from this library, not yet freed.
void mc_params_free(McParams *p);

// # Safety
// `p` must be a live handle; `out` must be writable.
McStatus mc_params_escape_radius(const McParams *p, double *out);

// Escape iteration of `z`, or [`MC_BOUNDED_CODE`].
//
// # Safety
// `z` and `params` must be live handles; `out` must be writable.
McStatus mc_escape_time(const McMulticomplex *z, const McParams *params, uint32_t *out);

// Class of the slice spanned by the units `masks[0..3]` of `I(order)`.
//
// # Safety
// `masks` must point to 3 readable values; `out` must be writable.
McStatus mc_classify(uint32_t order,
                     const uint32_t *masks,
                     uint32_t power,
                     double c,
                     McSliceClass *out);

// Number of slice classes among all triples of `I(n)`.
//
// # Safety
// `out` must be writable.
McStatus mc_class_count(uint32_t n, uint32_t power, double c, size_t *out);

// Renders the slice with units `masks[0..3]` on a `dims[0] x dims[1] x dims[2]`
// grid over `bounds = {xmin, xmax, ymin, ymax, zmin, zmax}`. `workers = 0`
// uses `MCJULIA_WORKERS` or all cores.
//
// # Safety
// `params` must be a live handle; `masks` and `dims` must point to 3
// readable values, `bounds` to 6; `out` must be writable.
McStatus mc_render(const McParams *params,
                   const uint32_t *masks,
                   const uint32_t *dims,
                   const double *bounds,
                   uint32_t workers,
                   McGrid **out);

// # Safety
// `g` must be null or a handle from this library, not yet freed.
void mc_grid_free(McGrid *g);

// # Safety
// `g` must be a live handle; `out` must point to 3 writable values.
McStatus mc_grid_dims(const McGrid *g, uint32_t *out);

// Borrowed pointer to the `nx * ny * nz` escape codes (x fastest), valid
// while the grid lives. Null if `g` is null.
//
// # Safety
// `g` must be null or a live handle.
const uint16_t *mc_grid_codes(const McGrid *g, size_t *len);

// # Safety
// `g` must be a live handle; `out` must be writable.
McStatus mc_grid_bounded_count(const McGrid *g, size_t *out);

// Writes the grid; PGM stacks write one `<stem>_z####.pgm` per plane.
//
// # Safety
// `g` must be a live handle; `path` a NUL-terminated string.
McStatus mc_grid_export(const McGrid *g, McFormat format, const char *path);

// Loads an MCVOX file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
McStatus mc_grid_read_mcvox(const char *path, McGrid **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MCJULIA_H */
