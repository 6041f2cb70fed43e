#include "boundary_map.h"

#include "boundarymap/pipeline.hpp"

#include <cstdint>
#include <string>

struct bm_session {
  bmap::PipelineConfig cfg;
  std::string last_error;
};

namespace {

bm_status guard(bm_session* s, const auto& fn) {
  if (!s) return BM_INVALID_ARGUMENT;
  s->last_error.clear();
  try {
    fn();
    return BM_OK;
  } catch (const bmap::ConfigError& e) {
    s->last_error = e.what();
    return BM_CONFIG_ERROR;
  } catch (const bmap::StageError& e) {
    s->last_error = e.what();
    return BM_STAGE_ERROR;
  } catch (const std::exception& e) {
    s->last_error = e.what();
    return BM_STAGE_ERROR;
  }
}

}  // namespace

extern "C" {

bm_session* bm_session_create(void) { return new bm_session(); }

void bm_session_destroy(bm_session* s) { delete s; }

bm_status bm_load_config(bm_session* s, const char* path) {
  if (!path) return BM_INVALID_ARGUMENT;
  return guard(s, [&] {
    const auto mode = s->cfg.mode;  // mode is set separately, keep it
    s->cfg = bmap::load_config(path);
    s->cfg.mode = mode;
  });
}

bm_status bm_set_option(bm_session* s, const char* key, const char* value) {
  if (!key || !value) return BM_INVALID_ARGUMENT;
  const bm_status st = guard(s, [&] {
    const std::string k = key, v = value;
    if (k == "mode") {
      s->cfg.mode = bmap::parse_mode(v);
    } else if (k == "seed") {
      try {
        s->cfg.seed = static_cast<std::uint64_t>(std::stoull(v));
      } catch (const std::exception&) {
        throw bmap::ConfigError("seed must be an integer");
      }
    } else if (k == "out_dir") {
      s->cfg.out_dir = v;
    } else if (k == "input") {
      s->cfg.input = v;
    } else if (k == "map") {
      bmap::bundled_map(v);  // validate
      s->cfg.map_name = v;
      s->cfg.map_vertices.vertices.clear();
    } else if (k == "baseline") {
      if (v != "original" && v != "adjusted")
        throw bmap::ConfigError("baseline must be \"original\" or \"adjusted\"");
      s->cfg.original_baseline = (v == "original");
    } else {
      throw bmap::ConfigError("unknown option: " + k);
    }
  });
  // a rejected option is the caller's mistake, whatever exception it raised
  return st == BM_OK ? BM_OK : BM_INVALID_ARGUMENT;
}

bm_status bm_run(bm_session* s) {
  return guard(s, [&] { bmap::run_pipeline(s->cfg); });
}

const char* bm_last_error(const bm_session* s) {
  return s ? s->last_error.c_str() : "";
}

const char* bm_version(void) { return "0.1.0"; }

}  // extern "C"
