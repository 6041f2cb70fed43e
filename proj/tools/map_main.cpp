// Command-line front end; talks to the core only through the C API.
#include "boundary_map.h"

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"Boundary mapping from odometry: simulation, loop closure "
               "detection, pose graph optimization and meta-parameter learning"};
  app.require_subcommand(1);

  std::string config_path, out_dir, baseline, input, seed_str;

  const char* modes[] = {"sim", "detect", "optimize", "learn", "eval", "full"};
  const char* descs[] = {"simulate a boundary-following trajectory",
                         "detect loop closures on a recorded trajectory",
                         "optimize the pose graph",
                         "learn the mapping meta-parameters",
                         "evaluate against ground truth",
                         "run the whole pipeline"};
  for (int m = 0; m < 6; ++m) {
    auto* sub = app.add_subcommand(modes[m], descs[m]);
    sub->add_option("--config", config_path, "pipeline config JSON")->required();
    sub->add_option("--seed", seed_str, "override the seed");
    sub->add_option("--out", out_dir, "override the output directory");
    sub->add_option("--baseline", baseline, "original|adjusted");
    sub->add_option("--input", input, "recorded trajectory CSV");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string mode = app.get_subcommands().front()->get_name();

  std::unique_ptr<bm_session, decltype(&bm_session_destroy)> session(
      bm_session_create(), &bm_session_destroy);
  auto fail = [&](bm_status st) {
    std::fprintf(stderr, "error: %s\n", bm_last_error(session.get()));
    return st == BM_CONFIG_ERROR ? 2 : 3;
  };

  bm_status st = bm_load_config(session.get(), config_path.c_str());
  if (st != BM_OK) return fail(st);
  st = bm_set_option(session.get(), "mode", mode.c_str());
  if (st != BM_OK) return fail(st);
  // flags win over config keys
  if (!seed_str.empty()) {
    st = bm_set_option(session.get(), "seed", seed_str.c_str());
    if (st != BM_OK) return fail(st);
  }
  if (!out_dir.empty()) {
    st = bm_set_option(session.get(), "out_dir", out_dir.c_str());
    if (st != BM_OK) return fail(st);
  }
  if (!baseline.empty()) {
    st = bm_set_option(session.get(), "baseline", baseline.c_str());
    if (st != BM_OK) return fail(st);
  }
  if (!input.empty()) {
    st = bm_set_option(session.get(), "input", input.c_str());
    if (st != BM_OK) return fail(st);
  }

  st = bm_run(session.get());
  if (st != BM_OK) return fail(st);
  return 0;
}
