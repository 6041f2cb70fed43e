#include "boundarymap/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace bmap {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StageError("io", "cannot write " + path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StageError("io", "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json pose_list_json(const std::vector<Pose>& poses) {
  json arr = json::array();
  for (const auto& p : poses) arr.push_back({p.x, p.y, p.phi});
  return arr;
}

std::vector<Pose> pose_list_from_json(const json& arr) {
  std::vector<Pose> poses;
  for (const auto& v : arr)
    poses.emplace_back(v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>());
  return poses;
}

}  // namespace

Mode parse_mode(const std::string& s) {
  if (s == "sim" || s == "simulate") return Mode::Simulate;
  if (s == "detect") return Mode::Detect;
  if (s == "optimize") return Mode::Optimize;
  if (s == "learn") return Mode::Learn;
  if (s == "eval" || s == "evaluate") return Mode::Evaluate;
  if (s == "full") return Mode::Full;
  throw ConfigError("unknown mode: " + s);
}

MapPolygon PipelineConfig::resolve_map() const {
  if (map_vertices.vertices.size() >= 3) return map_vertices;
  if (!map_name.empty()) return bundled_map(map_name);
  throw ConfigError("no map configured");
}

PipelineConfig load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const StageError& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  PipelineConfig cfg;
  const std::set<std::string> known = {"map",   "input",  "out_dir", "sim",  "reduce",
                                       "loop",  "icp",    "solver",  "gamma1",
                                       "gamma2", "baseline", "seed", "bo_budget"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError("unknown config key: " + key);

  try {
    if (j.contains("map")) {
      if (j["map"].is_string()) {
        cfg.map_name = j["map"].get<std::string>();
        bundled_map(cfg.map_name);  // validate the name early
      } else {
        for (const auto& v : j["map"].at("vertices"))
          cfg.map_vertices.vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
      }
    }
    if (j.contains("input")) cfg.input = j["input"].get<std::string>();
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("bo_budget")) cfg.bo_budget = j["bo_budget"].get<int>();
    if (j.contains("sim")) {
      const auto& s = j["sim"];
      if (s.contains("speed")) cfg.sim.speed = s["speed"].get<double>();
      if (s.contains("sample_rate")) cfg.sim.sample_rate = s["sample_rate"].get<double>();
      if (s.contains("duration")) cfg.sim.duration = s["duration"].get<double>();
      if (s.contains("alphas")) {
        const auto& a = s["alphas"];
        cfg.sim.noise = {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>(),
                         a.at(3).get<double>()};
      }
    }
    if (j.contains("reduce")) {
      const auto& r = j["reduce"];
      if (r.contains("min_spacing")) cfg.reduce.min_spacing = r["min_spacing"].get<double>();
      if (r.contains("min_turn")) cfg.reduce.min_turn = r["min_turn"].get<double>();
    }
    if (j.contains("loop")) {
      if (j["loop"].is_string()) {
        if (j["loop"].get<std::string>() != "learn")
          throw ConfigError("loop must be an object or the string \"learn\"");
        cfg.learn_params = true;
      } else {
        const auto& l = j["loop"];
        if (l.contains("L_NH")) cfg.loop.L_NH = l["L_NH"].get<double>();
        if (l.contains("c_min")) cfg.loop.c_min = l["c_min"].get<double>();
        if (l.contains("phi_cycle")) cfg.loop.phi_cycle = l["phi_cycle"].get<double>();
        if (l.contains("m_eval")) cfg.loop.m_eval = l["m_eval"].get<int>();
      }
    }
    if (j.contains("icp")) {
      const auto& i = j["icp"];
      if (i.contains("spacing")) cfg.icp.spacing = i["spacing"].get<double>();
      if (i.contains("max_iters")) cfg.icp.max_iters = i["max_iters"].get<int>();
      if (i.contains("tol")) cfg.icp.tol = i["tol"].get<double>();
    }
    if (j.contains("solver")) {
      const auto& s = j["solver"];
      if (s.contains("max_iters")) cfg.solver.max_iters = s["max_iters"].get<int>();
      if (s.contains("step_tol")) cfg.solver.step_tol = s["step_tol"].get<double>();
      if (s.contains("damping_init")) cfg.solver.damping_init = s["damping_init"].get<double>();
      if (s.contains("damping_scale"))
        cfg.solver.damping_scale = s["damping_scale"].get<double>();
    }
    if (j.contains("gamma1")) cfg.gamma.gamma1 = j["gamma1"].get<double>();
    if (j.contains("gamma2")) cfg.gamma.gamma2 = j["gamma2"].get<double>();
    if (j.contains("baseline")) {
      const auto b = j["baseline"].get<std::string>();
      if (b != "original" && b != "adjusted")
        throw ConfigError("baseline must be \"original\" or \"adjusted\"");
      cfg.original_baseline = (b == "original");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config value error: ") + e.what());
  }
  if (!cfg.input.empty() && !fs::exists(cfg.input))
    throw ConfigError("input file does not exist: " + cfg.input);
  return cfg;
}

std::string config_provenance(const PipelineConfig& cfg) {
  json j;
  if (!cfg.map_name.empty()) j["map"] = cfg.map_name;
  if (!cfg.input.empty()) j["input"] = cfg.input;
  j["seed"] = cfg.seed;
  j["sim"] = {{"speed", cfg.sim.speed},
              {"sample_rate", cfg.sim.sample_rate},
              {"duration", cfg.sim.duration},
              {"alphas", {cfg.sim.noise.alpha1, cfg.sim.noise.alpha2, cfg.sim.noise.alpha3,
                          cfg.sim.noise.alpha4}}};
  j["reduce"] = {{"min_spacing", cfg.reduce.min_spacing}, {"min_turn", cfg.reduce.min_turn}};
  if (cfg.learn_params)
    j["loop"] = "learn";
  else
    j["loop"] = {{"L_NH", cfg.loop.L_NH},
                 {"c_min", cfg.loop.c_min},
                 {"phi_cycle", cfg.loop.phi_cycle},
                 {"m_eval", cfg.loop.m_eval}};
  j["gamma1"] = cfg.gamma.gamma1;
  j["gamma2"] = cfg.gamma.gamma2;
  j["baseline"] = cfg.original_baseline ? "original" : "adjusted";
  j["prng"] = "mt19937_64";
  return j.dump();
}

std::vector<size_t> reduce_path(const std::vector<Pose>& poses, double min_spacing,
                                double min_turn) {
  if (poses.empty()) throw std::invalid_argument("reduce_path needs poses");
  std::vector<size_t> kept;
  kept.push_back(0);
  double arc = 0.0, turn = 0.0;
  for (size_t k = 1; k < poses.size(); ++k) {
    arc += (poses[k].position() - poses[k - 1].position()).norm();
    turn += wrap_angle(poses[k].phi - poses[k - 1].phi);
    const bool spacing_hit = arc >= min_spacing;
    // The small arc gate stops heading jitter from spamming keepers without
    // cutting corners that land right after a kept sample.
    const bool turn_hit = std::abs(turn) >= min_turn && arc >= 0.1 * min_spacing;
    if (spacing_hit || turn_hit) {
      kept.push_back(k);
      arc = 0.0;
      turn = 0.0;
    }
  }
  if (kept.back() != poses.size() - 1) kept.push_back(poses.size() - 1);
  return kept;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const std::string& provenance) {
  std::ostringstream out;
  out << "# " << provenance << "\n";
  const bool has_truth = !traj.true_poses.empty();
  if (has_truth) {
    out << "t,x_true,y_true,phi_true,x_meas,y_meas,phi_meas\n";
    for (size_t k = 0; k < traj.timestamps.size(); ++k) {
      const auto& tp = traj.true_poses[k];
      const auto& mp = traj.measured_poses[k];
      out << fmt(traj.timestamps[k]) << ',' << fmt(tp.x) << ',' << fmt(tp.y) << ','
          << fmt(tp.phi) << ',' << fmt(mp.x) << ',' << fmt(mp.y) << ',' << fmt(mp.phi)
          << '\n';
    }
  } else {
    out << "t,x_meas,y_meas,phi_meas\n";
    for (size_t k = 0; k < traj.timestamps.size(); ++k) {
      const auto& mp = traj.measured_poses[k];
      out << fmt(traj.timestamps[k]) << ',' << fmt(mp.x) << ',' << fmt(mp.y) << ','
          << fmt(mp.phi) << '\n';
    }
  }
  write_file(path, out.str());
}

Trajectory ingest_recorded(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw StageError("ingest", "cannot open " + csv_path);
  Trajectory traj;
  std::string line;
  int line_no = 0;
  bool has_truth = false;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!header_seen) {
      header_seen = true;
      if (cells.size() == 7 && cells[1] == "x_true")
        has_truth = true;
      else if (cells.size() == 4 && cells[1] == "x_meas")
        has_truth = false;
      else
        throw StageError("ingest", "unrecognized header at line " + std::to_string(line_no));
      continue;
    }
    const size_t expected = has_truth ? 7 : 4;
    if (cells.size() != expected)
      throw StageError("ingest", "malformed row at line " + std::to_string(line_no));
    std::vector<double> v;
    try {
      for (const auto& c : cells) v.push_back(std::stod(c));
    } catch (const std::exception&) {
      throw StageError("ingest", "malformed number at line " + std::to_string(line_no));
    }
    if (!traj.timestamps.empty() && v[0] <= traj.timestamps.back())
      throw StageError("ingest",
                       "non-monotone timestamp at line " + std::to_string(line_no));
    traj.timestamps.push_back(v[0]);
    if (has_truth) {
      traj.true_poses.emplace_back(v[1], v[2], v[3]);
      traj.measured_poses.emplace_back(v[4], v[5], v[6]);
    } else {
      traj.measured_poses.emplace_back(v[1], v[2], v[3]);
    }
  }
  if (traj.timestamps.empty()) throw StageError("ingest", "empty trajectory file");
  return traj;
}

namespace {

struct Workspace {
  PipelineConfig cfg;
  std::string provenance;
  std::string dir;

  std::string path(const std::string& name) const { return dir + "/" + name; }
};

Trajectory load_input_trajectory(const Workspace& ws) {
  const std::string src =
      !ws.cfg.input.empty() ? ws.cfg.input : ws.path("trajectory.csv");
  if (!fs::exists(src))
    throw StageError("detect", "no trajectory available; run sim first or set input");
  return ingest_recorded(src);
}

void stage_simulate(const Workspace& ws) {
  SimConfig sim = ws.cfg.sim;
  sim.map = ws.cfg.resolve_map();
  sim.seed = ws.cfg.seed;
  Trajectory traj;
  try {
    traj = simulate(sim);
  } catch (const std::exception& e) {
    throw StageError("sim", e.what());
  }
  write_trajectory_csv(ws.path("trajectory.csv"), traj, ws.provenance);
}

Stage1Params effective_stage1(const Workspace& ws, Stage2Params* gamma_out) {
  if (!ws.cfg.learn_params) {
    if (gamma_out) *gamma_out = ws.cfg.gamma;
    return {ws.cfg.loop.L_NH, ws.cfg.loop.c_min, ws.cfg.loop.phi_cycle};
  }
  const std::string lp = ws.path("learned_params.json");
  if (!fs::exists(lp))
    throw StageError("detect", "loop is \"learn\" but learned_params.json is missing; "
                               "run learn first");
  const json j = json::parse(read_file(lp));
  if (gamma_out) *gamma_out = {j.at("gamma1").get<double>(), j.at("gamma2").get<double>()};
  return {j.at("L_NH").get<double>(), j.at("c_min").get<double>(),
          j.at("phi_cycle").get<double>()};
}

void stage_detect(const Workspace& ws) {
  const Trajectory traj = load_input_trajectory(ws);
  const auto indices =
      reduce_path(traj.measured_poses, ws.cfg.reduce.min_spacing, ws.cfg.reduce.min_turn);
  std::vector<Pose> path;
  path.reserve(indices.size());
  for (size_t k : indices) path.push_back(traj.measured_poses[k]);

  Stage2Params gamma;
  const Stage1Params params = effective_stage1(ws, &gamma);

  OrientationProfile profile;
  LoopClosureConfig lc_cfg;
  lc_cfg.L_NH = params.L_NH;
  lc_cfg.c_min = params.c_min;
  lc_cfg.phi_cycle = params.phi_cycle;
  lc_cfg.m_eval = ws.cfg.loop.m_eval;
  ComparisonMatrix C;
  std::vector<LoopClosure> closures;
  try {
    profile = build_profile(path);
    C = comparison_matrix(profile, lc_cfg);
    closures = detect_closures(C, profile, lc_cfg);
    std::erase_if(closures, [&](const LoopClosure& lc) {
      return !feasibility_check(lc, params.phi_cycle);
    });
    fill_closure_constraints(closures, path, profile, params.L_NH, gamma.gamma1,
                             gamma.gamma2, ws.cfg.icp, ws.cfg.original_baseline);
  } catch (const std::exception& e) {
    throw StageError("detect", e.what());
  }

  // reduced path with source indices
  {
    json j;
    j["provenance"] = json::parse(ws.provenance);
    j["indices"] = indices;
    j["poses"] = pose_list_json(path);
    write_file(ws.path("reduced_path.json"), j.dump(2));
  }

  // closure list, GMM fit and circumference estimate
  std::vector<double> u;
  for (const auto& lc : closures) u.push_back(lc.u_ij);
  double U = 0.0;
  std::vector<double> nll_history;
  if (u.size() >= static_cast<size_t>(kMinClosures)) {
    const GmmModel model = select_model(u, ws.cfg.seed, GmmFitConfig{}, &nll_history);
    U = estimate_circumference(model);
    write_file(ws.path("gmm_u.json"), gmm_to_json(model));
  }
  {
    json j;
    j["provenance"] = json::parse(ws.provenance);
    j["params"] = {{"L_NH", params.L_NH},
                   {"c_min", params.c_min},
                   {"phi_cycle", params.phi_cycle},
                   {"gamma1", gamma.gamma1},
                   {"gamma2", gamma.gamma2}};
    j["U_estimate"] = U;
    j["closures"] = json::array();
    for (const auto& lc : closures) {
      json e;
      e["i"] = lc.i;
      e["j"] = lc.j;
      e["c"] = lc.c_ij;
      e["u"] = lc.u_ij;
      e["dphi"] = lc.dphi_ij;
      e["mean"] = {lc.constraint.dx, lc.constraint.dy, lc.constraint.dphi};
      std::vector<double> cov(9);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) cov[static_cast<size_t>(r * 3 + c)] = lc.constraint.covariance(r, c);
      e["cov"] = cov;
      j["closures"].push_back(e);
    }
    write_file(ws.path("closures.json"), j.dump(2));
  }

  // plot data: decimated comparison matrix, u histogram, NLL vs K
  {
    std::ostringstream out;
    out << "# " << ws.provenance << "\nl_i,l_j,C\n";
    if (!C.all_invalid) {
      const int nv = C.last_valid - C.first_valid + 1;
      const int stride = std::max(1, nv / 400);
      for (int i = C.first_valid; i <= C.last_valid; i += stride)
        for (int jdx = C.first_valid; jdx <= C.last_valid; jdx += stride)
          out << fmt(profile.breakpoints[static_cast<size_t>(i)]) << ','
              << fmt(profile.breakpoints[static_cast<size_t>(jdx)]) << ','
              << fmt(static_cast<double>(C.values(i, jdx))) << '\n';
    }
    write_file(ws.path("cmatrix.csv"), out.str());
  }
  {
    std::ostringstream out;
    out << "# " << ws.provenance << "\nbin_center,count\n";
    if (!u.empty()) {
      const double lo = std::floor(*std::min_element(u.begin(), u.end()));
      const double hi = std::ceil(*std::max_element(u.begin(), u.end()));
      const int bins = std::max(1, static_cast<int>(hi - lo));
      std::vector<int> counts(static_cast<size_t>(bins), 0);
      for (double v : u) {
        int b = static_cast<int>((v - lo));
        b = std::clamp(b, 0, bins - 1);
        ++counts[static_cast<size_t>(b)];
      }
      for (int b = 0; b < bins; ++b)
        out << fmt(lo + b + 0.5) << ',' << counts[static_cast<size_t>(b)] << '\n';
    }
    write_file(ws.path("u_hist.csv"), out.str());
  }
  {
    std::ostringstream out;
    out << "# " << ws.provenance << "\nK,nll\n";
    for (size_t k = 0; k < nll_history.size(); ++k)
      out << (k + 1) << ',' << fmt(nll_history[k]) << '\n';
    write_file(ws.path("nll_vs_k.csv"), out.str());
  }
}

std::vector<LoopClosure> load_closures(const Workspace& ws, double* U = nullptr) {
  const std::string path = ws.path("closures.json");
  if (!fs::exists(path)) throw StageError("optimize", "closures.json missing; run detect first");
  const json j = json::parse(read_file(path));
  if (U) *U = j.at("U_estimate").get<double>();
  std::vector<LoopClosure> closures;
  for (const auto& e : j.at("closures")) {
    LoopClosure lc;
    lc.i = e.at("i").get<int>();
    lc.j = e.at("j").get<int>();
    lc.c_ij = e.at("c").get<double>();
    lc.u_ij = e.at("u").get<double>();
    lc.dphi_ij = e.at("dphi").get<double>();
    lc.constraint.dx = e.at("mean").at(0).get<double>();
    lc.constraint.dy = e.at("mean").at(1).get<double>();
    lc.constraint.dphi = e.at("mean").at(2).get<double>();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        lc.constraint.covariance(r, c) = e.at("cov").at(static_cast<size_t>(r * 3 + c)).get<double>();
    closures.push_back(lc);
  }
  return closures;
}

std::vector<Pose> load_reduced_path(const Workspace& ws, std::vector<size_t>* indices) {
  const std::string path = ws.path("reduced_path.json");
  if (!fs::exists(path))
    throw StageError("optimize", "reduced_path.json missing; run detect first");
  const json j = json::parse(read_file(path));
  if (indices) *indices = j.at("indices").get<std::vector<size_t>>();
  return pose_list_from_json(j.at("poses"));
}

void stage_optimize(const Workspace& ws) {
  const auto closures = load_closures(ws);
  const auto path = load_reduced_path(ws, nullptr);
  SolveResult solved;
  try {
    PoseGraph g = add_loop_closures(build_graph(path, ws.cfg.sim.noise), closures);
    write_file(ws.path("graph.json"), graph_to_json(g));
    solved = optimize(g, ws.cfg.solver);
  } catch (const std::exception& e) {
    throw StageError("optimize", e.what());
  }
  write_file(ws.path("optimized_graph.json"), graph_to_json(solved.graph));
  std::ostringstream out;
  out << "# " << ws.provenance << "\niter,objective\n";
  for (size_t k = 0; k < solved.objective_history.size(); ++k)
    out << k << ',' << fmt(solved.objective_history[k]) << '\n';
  write_file(ws.path("iteration_log.csv"), out.str());
}

void stage_learn(const Workspace& ws) {
  const Trajectory traj = load_input_trajectory(ws);
  const auto indices =
      reduce_path(traj.measured_poses, ws.cfg.reduce.min_spacing, ws.cfg.reduce.min_turn);
  std::vector<Pose> path;
  for (size_t k : indices) path.push_back(traj.measured_poses[k]);

  LearnConfig lcfg;
  lcfg.budget = ws.cfg.bo_budget;
  lcfg.m_eval = ws.cfg.loop.m_eval;
  lcfg.icp = ws.cfg.icp;
  lcfg.solver = ws.cfg.solver;
  lcfg.noise = ws.cfg.sim.noise;
  lcfg.seed = ws.cfg.seed;
  LearnResult res;
  try {
    res = learn(path, lcfg);
  } catch (const std::exception& e) {
    throw StageError("learn", e.what());
  }

  json j;
  j["provenance"] = json::parse(ws.provenance);
  j["L_NH"] = res.params.stage1.L_NH;
  j["c_min"] = res.params.stage1.c_min;
  j["phi_cycle"] = res.params.stage1.phi_cycle;
  j["gamma1"] = res.params.stage2.gamma1;
  j["gamma2"] = res.params.stage2.gamma2;
  j["U"] = res.U;
  j["short_dataset"] = res.short_dataset;
  write_file(ws.path("learned_params.json"), j.dump(2));

  auto write_trace = [&](const std::string& name, const BoResult& trace,
                         const std::vector<std::string>& dims) {
    std::ostringstream out;
    out << "# " << ws.provenance << "\niter";
    for (const auto& d : dims) out << ',' << d;
    out << ",cost,incumbent_cost\n";
    for (const auto& tp : trace.trace) {
      out << tp.iter;
      for (double v : tp.theta) out << ',' << fmt(v);
      out << ',' << fmt(tp.cost) << ',' << fmt(tp.incumbent) << '\n';
    }
    write_file(ws.path(name), out.str());
  };
  write_trace("stage1_trace.csv", res.stage1_trace, {"L_NH", "c_min", "phi_cycle"});
  write_trace("stage2_trace.csv", res.stage2_trace, {"gamma1", "gamma2"});
}

void write_polygon_csv(const Workspace& ws, const std::string& name,
                       const MapPolygon& poly) {
  std::ostringstream out;
  out << "# " << ws.provenance << "\nx,y\n";
  for (const auto& v : poly.vertices) out << fmt(v.x()) << ',' << fmt(v.y()) << '\n';
  write_file(ws.path(name), out.str());
}

void stage_evaluate(const Workspace& ws) {
  const std::string graph_path = ws.path("optimized_graph.json");
  if (!fs::exists(graph_path))
    throw StageError("eval", "optimized_graph.json missing; run optimize first");
  const PoseGraph g = graph_from_json(read_file(graph_path));

  const Trajectory traj = load_input_trajectory(ws);
  std::vector<size_t> indices;
  load_reduced_path(ws, &indices);

  const bool have_truth = !traj.true_poses.empty();
  const bool have_map = ws.cfg.has_map();
  if (!have_truth && !have_map)
    throw StageError("eval", "evaluation needs ground-truth poses or a map polygon");

  json j;
  j["provenance"] = json::parse(ws.provenance);
  j["seed"] = ws.cfg.seed;

  if (have_truth) {
    std::vector<Pose> truth;
    truth.reserve(indices.size());
    for (size_t k : indices) truth.push_back(traj.true_poses[k]);
    try {
      const auto [et, er] = relative_error(g, truth);
      j["E_trans"] = et;
      j["E_rot"] = er;
    } catch (const std::exception& e) {
      throw StageError("eval", e.what());
    }
  }

  if (have_map) {
    double U = 0.0;
    const auto closures = load_closures(ws, &U);
    try {
      const auto u = chain_distances(g.vertices, closures);
      if (!u.empty()) {
        if (U <= 0.0) U = *std::min_element(u.begin(), u.end());
        const LapPolygon lap = polygon_from_graph(g, closures, U);
        const MapPolygon truth_poly = ws.cfg.resolve_map();
        j["delta_A"] = area_error(lap.polygon, truth_poly);
        j["lap_cleanup_triggered"] = lap.cleanup_triggered;
        write_polygon_csv(ws, "polygon_est.csv", lap.polygon);
        write_polygon_csv(ws, "polygon_true.csv", truth_poly);
      }
    } catch (const std::exception& e) {
      throw StageError("eval", e.what());
    }
  }
  write_file(ws.path("eval.json"), j.dump(2));
}

}  // namespace

void run_pipeline(const PipelineConfig& cfg) {
  Workspace ws{cfg, config_provenance(cfg), cfg.out_dir};
  std::error_code ec;
  fs::create_directories(ws.dir, ec);
  if (ec) throw StageError("io", "cannot create output directory " + ws.dir);

  switch (cfg.mode) {
    case Mode::Simulate:
      stage_simulate(ws);
      break;
    case Mode::Detect:
      stage_detect(ws);
      break;
    case Mode::Optimize:
      stage_optimize(ws);
      break;
    case Mode::Learn:
      stage_learn(ws);
      break;
    case Mode::Evaluate:
      stage_evaluate(ws);
      break;
    case Mode::Full: {
      if (cfg.input.empty()) stage_simulate(ws);
      if (cfg.learn_params) stage_learn(ws);
      stage_detect(ws);
      stage_optimize(ws);
      const Trajectory traj = load_input_trajectory(ws);
      if (!traj.true_poses.empty() || cfg.has_map()) stage_evaluate(ws);
      break;
    }
  }
}

}  // namespace bmap
