#pragma once

#include "boundarymap/bayes_opt.hpp"
#include "boundarymap/evaluation.hpp"
#include "boundarymap/maps.hpp"
#include "boundarymap/sim.hpp"

#include <string>

namespace bmap {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StageError : std::runtime_error {
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error("[" + stage + "] " + what) {}
};

enum class Mode { Simulate, Detect, Optimize, Learn, Evaluate, Full };

Mode parse_mode(const std::string& s);  // throws ConfigError

struct ReduceConfig {
  double min_spacing = 0.5;  // meters
  double min_turn = 0.1;     // radians
};

struct PipelineConfig {
  Mode mode = Mode::Full;
  std::string map_name;           // bundled map, or empty when map_vertices set
  MapPolygon map_vertices;        // explicit polygon (wins over map_name if set)
  std::string input;              // recorded trajectory CSV; empty -> simulate
  std::string out_dir = "out";
  SimConfig sim;
  ReduceConfig reduce;
  bool learn_params = false;      // loop config given as "learn"
  LoopClosureConfig loop;
  IcpConfig icp;
  SolverConfig solver;
  Stage2Params gamma;             // gamma1, gamma2
  bool original_baseline = false;
  int bo_budget = 30;
  std::uint64_t seed = 0;

  MapPolygon resolve_map() const;  // throws ConfigError when absent
  bool has_map() const { return !map_name.empty() || map_vertices.vertices.size() >= 3; }
};

// Parses the JSON config file. Unknown keys are rejected.
PipelineConfig load_config(const std::string& path);

// Dominant-point reduction: a pose is kept when the arc length since the
// last kept pose reaches min_spacing, or the net heading change reaches
// min_turn (the turn rule fires after a tenth of min_spacing, which bounds
// the vertex count on heading-noisy data). First and last are always kept.
std::vector<size_t> reduce_path(const std::vector<Pose>& poses, double min_spacing,
                                double min_turn);

// Trajectory CSV round trip. Files may omit the *_true columns.
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const std::string& provenance);
Trajectory ingest_recorded(const std::string& csv_path);

// Runs one mode (Full chains them); writes artifacts into cfg.out_dir.
// Throws ConfigError / StageError.
void run_pipeline(const PipelineConfig& cfg);

// Compact JSON of the effective configuration, used as provenance header.
std::string config_provenance(const PipelineConfig& cfg);

}  // namespace bmap
