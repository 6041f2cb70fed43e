/* C interface to the boundary mapping pipeline.
 *
 * Usage: create a session, load a JSON config, optionally override single
 * options, then run. All functions return a bm_status; on error a message is
 * available via bm_last_error until the next call on the same session.
 */
#ifndef BOUNDARY_MAP_H
#define BOUNDARY_MAP_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bm_status {
  BM_OK = 0,
  BM_CONFIG_ERROR = 2,
  BM_STAGE_ERROR = 3,
  BM_INVALID_ARGUMENT = 4
} bm_status;

typedef struct bm_session bm_session;

bm_session* bm_session_create(void);
void bm_session_destroy(bm_session* s);

/* Loads a pipeline config JSON file into the session. */
bm_status bm_load_config(bm_session* s, const char* path);

/* Overrides a single option. Keys: "mode" (sim|detect|optimize|learn|eval|full),
 * "seed" (integer), "out_dir", "baseline" (original|adjusted), "input",
 * "map" (bundled map name). */
bm_status bm_set_option(bm_session* s, const char* key, const char* value);

/* Runs the configured mode; artifacts are written to the output directory. */
bm_status bm_run(bm_session* s);

/* Message of the most recent error on this session ("" if none). */
const char* bm_last_error(const bm_session* s);

const char* bm_version(void);

#ifdef __cplusplus
}
#endif

#endif /* BOUNDARY_MAP_H */
