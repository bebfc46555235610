/* mpf.h - C interface to the multi-pose fusion CT reconstruction engine.
 *
 * All functions return mpf_status; MPF_OK is 0.  On failure,
 * mpf_last_error() returns a human-readable message for the calling thread.
 * Objects are opaque handles owned by the caller and released with the
 * matching *_free function.
 *
 * Volume payloads are row-major with x fastest: values[(z*ny + y)*nx + x].
 * Sinogram payloads are indexed ((view*rows) + row)*cols + col.
 */
#ifndef MPF_MPF_H
#define MPF_MPF_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MPF_API __declspec(dllexport)
#else
#define MPF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mpf_status {
    MPF_OK = 0,
    MPF_ERR_CONFIG = 1,
    MPF_ERR_USAGE = 2,
    MPF_ERR_DIMENSION = 3,
    MPF_ERR_INVALID_TRANSFORM = 4,
    MPF_ERR_INVALID_WEIGHTS = 5,
    MPF_ERR_SOLVER = 6,
    MPF_ERR_IO = 7,
    MPF_ERR_NUMERIC = 8,
} mpf_status;

MPF_API const char* mpf_version(void);
/* Message of the most recent failure on this thread ("" if none). */
MPF_API const char* mpf_last_error(void);

/* ---- volumes (MPFVOL1) ---- */

typedef struct mpf_volume mpf_volume;

MPF_API mpf_status mpf_volume_create(const int64_t dims[3], const double spacing_mm[3],
                                     mpf_volume** out);
MPF_API mpf_status mpf_volume_read(const char* path, mpf_volume** out);
MPF_API mpf_status mpf_volume_write(const mpf_volume* v, const char* path);
MPF_API void mpf_volume_free(mpf_volume* v);

MPF_API mpf_status mpf_volume_dims(const mpf_volume* v, int64_t out[3]);
MPF_API mpf_status mpf_volume_spacing(const mpf_volume* v, double out_mm[3]);
MPF_API mpf_status mpf_volume_value_count(const mpf_volume* v, size_t* out);
/* Borrowed pointers, valid until the handle is freed or mutated. */
MPF_API const double* mpf_volume_values(const mpf_volume* v);
MPF_API double* mpf_volume_values_mut(mpf_volume* v);

/* ---- sinograms (MPFSIN1) ---- */

typedef struct mpf_sinogram mpf_sinogram;

MPF_API mpf_status mpf_sinogram_read(const char* path, mpf_sinogram** out);
MPF_API mpf_status mpf_sinogram_write(const mpf_sinogram* s, const char* path);
MPF_API void mpf_sinogram_free(mpf_sinogram* s);

/* out: views, rows, cols */
MPF_API mpf_status mpf_sinogram_shape(const mpf_sinogram* s, int64_t out[3]);
MPF_API mpf_status mpf_sinogram_pitch(const mpf_sinogram* s, double* out_mm);
MPF_API mpf_status mpf_sinogram_angles(const mpf_sinogram* s, const double** out,
                                       size_t* count);
MPF_API const double* mpf_sinogram_values(const mpf_sinogram* s);
MPF_API const double* mpf_sinogram_weights(const mpf_sinogram* s);

/* ---- pipeline commands ----
 *
 * seed_override may be NULL to use the config's seed.  out_dir may be NULL
 * or "" to use the config's output directory.  pose < 0 selects the default
 * (pose 0 for single-pose methods).
 */

MPF_API mpf_status mpf_simulate(const char* config_path, const char* out_dir,
                                const uint64_t* seed_override);

/* method: wls-single | pnp-single | avg | pw-avg | mpf-baseline |
 * mpf-pixelweighted */
MPF_API mpf_status mpf_reconstruct(const char* config_path, const char* method,
                                   int pose, const char* out_dir,
                                   const uint64_t* seed_override);

/* Writes `report_path` (key=value lines) when non-NULL; when report_out is
 * non-NULL it receives a malloc'd human-readable table to release with
 * mpf_string_free. */
MPF_API mpf_status mpf_metrics(const char* truth_path, const char* labels_path,
                               const char* const* recon_paths, size_t n_recons,
                               const char* report_path, char** report_out);

/* axis: "x" | "y" | "z"; linear window [window_min, window_max) to 8-bit. */
MPF_API mpf_status mpf_export_png(const char* volume_path, const char* axis,
                                  int64_t slice_index, double window_min,
                                  double window_max, const char* png_path);

MPF_API void mpf_string_free(char* s);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MPF_MPF_H */
