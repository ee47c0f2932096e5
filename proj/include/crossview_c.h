/* C interface to the crossview library. All pipeline functionality is
 * reachable through these calls; the CLI is built purely on this header.
 *
 * Conventions:
 *   - every function returns a cvx_status; on failure cvx_last_error() holds
 *     a single-line message for the calling thread.
 *   - char** out parameters receive malloc'd NUL-terminated text (JSON run
 *     reports unless noted); release with cvx_string_free.
 *   - threads <= 0 means "use the hardware default"; results never depend on
 *     the thread count.
 */
#ifndef CROSSVIEW_C_H
#define CROSSVIEW_C_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cvx_status {
    CVX_OK = 0,
    CVX_E_VALIDATION = 1, /* bad inputs, broken invariants, malformed config */
    CVX_E_IO = 2          /* filesystem and file-format failures */
} cvx_status;

/* Message from the most recent failing call on this thread ("" if none). The
 * pointer stays valid until the next failing call on the same thread. */
const char* cvx_last_error(void);

const char* cvx_version(void);

void cvx_string_free(char* text);

/* ------------------------------------------------------------------ config */

typedef struct cvx_config cvx_config; /* opaque */

/* Built-in defaults. */
cvx_status cvx_config_create(cvx_config** out);

/* defaults -> JSON file at `path` (may be NULL/"" for none) -> `overrides`
 * ("key.path=value" strings, may be NULL when count is 0), then validate. */
cvx_status cvx_config_resolve(cvx_config** out, const char* path, const char* const* overrides,
                              int override_count);

/* Resolved config echoed as JSON; reloading that text yields an equal
 * config. */
cvx_status cvx_config_json(const cvx_config* cfg, char** out_text);

void cvx_config_free(cvx_config* cfg);

/* ---------------------------------------------------------------- commands */
/* Each command writes its declared files and returns a JSON run report
 * listing the resolved config and the SHA-256 of every output. */

/* Occupancy grid -> CVGX file at out_path. */
cvx_status cvx_run_voxelize(const cvx_config* cfg, const char* out_path, int threads,
                            char** report);

/* Visible-point extraction -> out_dir/{points.ply, map.cvpm}. */
cvx_status cvx_run_extract(const cvx_config* cfg, const char* out_dir, int threads,
                           char** report);

/* Stylized trajectory video from an extraction directory ->
 * out_dir/{rgb,semantics,depth}/frame_NNNN.*. */
cvx_status cvx_run_render(const cvx_config* cfg, const char* extract_dir, const char* out_dir,
                          int threads, char** report);

/* Ground-truth video from center_dir/{depth.pfm, rgb.png, semantics.png} ->
 * out_dir/{rgb,semantics}/..., points.ply, map.cvpm. */
cvx_status cvx_run_gt_video(const cvx_config* cfg, const char* center_dir, const char* out_dir,
                            int threads, char** report);

/* Satellite-image warp through an extraction -> out_dir/{rgb,validity}/... */
cvx_status cvx_run_warp(const cvx_config* cfg, const char* extract_dir, const char* out_dir,
                        int threads, char** report);

/* Frame metrics between two directories of RGB PNGs; weights_dir ("" / NULL
 * for none) supplies per-frame mask PNGs; report_path ("" / NULL to skip)
 * also writes the report JSON to disk. */
cvx_status cvx_run_metrics(const char* dir_a, const char* dir_b, const char* weights_dir,
                           const char* report_path, char** report);

/* U-turn self-consistency protocol; frames_override > 0 replaces the frame
 * count (otherwise 60 unless the config itself is a u-turn). */
cvx_status cvx_run_uturn(const cvx_config* cfg, const char* out_dir, int frames_override,
                         int threads, char** report);

/* Procedural sample scene -> out_dir (rasters, center data, config.json). */
cvx_status cvx_run_sample_scene(const char* out_dir, uint64_t seed, char** report);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CROSSVIEW_C_H */
