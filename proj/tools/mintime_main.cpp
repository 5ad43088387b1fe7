// Command-line front end: builds reach tubes, minimum time fields,
// convergence studies, open-loop trajectories and structural diagnostics
// from registry examples or inline problem JSON, writing CSV artifacts.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "mintime/csv.hpp"
#include "mintime/harness.hpp"
#include "mintime/mtf.hpp"
#include "mintime/oracle.hpp"
#include "mintime/problem_json.hpp"
#include "mintime/reachset.hpp"
#include "mintime/systems.hpp"

namespace {

using nlohmann::json;
using namespace mintime;

constexpr int kExitConfig = 2;
constexpr int kExitDomain = 3;
constexpr int kExitNotReachable = 4;

struct RunConfig {
  std::optional<std::string> example_id;
  std::optional<json> inline_problem;
  Scheme scheme{Scheme::EulerRiemann};
  int nr{100};
  double tol{1e-9};
  bool monotone{true};
  FieldMode mode{FieldMode::Interpolated};
  SpatialGrid grid{};
  std::string out{"out"};
  double threshold{1e-3};
  std::optional<Vec2> start;
  std::vector<std::pair<double, int>> ladder;

  ControlProblem problem;  // resolved
};

struct CliFlags {
  std::string example_id;
  std::string config_path;
  std::string out;
  std::string scheme;
  std::string mode;
  int nr{-1};
  int k{-1};
  int n{-1};
  double tf{std::numeric_limits<double>::quiet_NaN()};
  double dx{std::numeric_limits<double>::quiet_NaN()};
  double tol{std::numeric_limits<double>::quiet_NaN()};
  double threshold{std::numeric_limits<double>::quiet_NaN()};
  int monotone{-1};  // -1 unset, 0 false, 1 true
  std::string ladder_path;
  std::vector<double> start;
};

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  json j;
  in >> j;
  return j;
}

std::vector<std::pair<double, int>> parse_ladder(const json& j) {
  std::vector<std::pair<double, int>> rungs;
  for (const auto& item : j) {
    if (item.is_array())
      rungs.emplace_back(item.at(0).get<double>(), item.at(1).get<int>());
    else
      rungs.emplace_back(item.at("h").get<double>(), item.at("nr").get<int>());
  }
  return rungs;
}

// Config file first, explicit flags override, registry defaults fill the rest.
RunConfig resolve_config(const CliFlags& flags) {
  RunConfig cfg;
  json file;
  if (!flags.config_path.empty()) file = load_json_file(flags.config_path);

  if (file.contains("example"))
    cfg.example_id = file.at("example").get<std::string>();
  if (file.contains("problem")) cfg.inline_problem = file.at("problem");
  if (!flags.example_id.empty()) cfg.example_id = flags.example_id;

  if (cfg.example_id) {
    const ExampleInfo& info = example_info(*cfg.example_id);
    cfg.problem = info.problem;
    cfg.nr = info.default_nr;
    cfg.tol = info.membership_tol;
    cfg.monotone = info.monotone;
  } else if (cfg.inline_problem) {
    cfg.problem = problem_from_json(*cfg.inline_problem);
  } else {
    throw std::invalid_argument("missing field: --example or config problem");
  }
  cfg.scheme = std::holds_alternative<LinearControlProblem>(cfg.problem)
                   ? Scheme::EulerRiemann
                   : Scheme::NonlinearEuler;

  if (file.contains("scheme"))
    cfg.scheme = scheme_from_name(file.at("scheme").get<std::string>());
  if (file.contains("nr")) cfg.nr = file.at("nr").get<int>();
  if (file.contains("tol")) cfg.tol = file.at("tol").get<double>();
  if (file.contains("monotone")) cfg.monotone = file.at("monotone").get<bool>();
  if (file.contains("mode"))
    cfg.mode = field_mode_from_name(file.at("mode").get<std::string>());
  else
    cfg.mode = cfg.monotone ? FieldMode::Interpolated : FieldMode::Discrete;
  if (file.contains("grid")) {
    const auto& g = file.at("grid");
    cfg.grid.x1min = g.value("x1min", cfg.grid.x1min);
    cfg.grid.x1max = g.value("x1max", cfg.grid.x1max);
    cfg.grid.x2min = g.value("x2min", cfg.grid.x2min);
    cfg.grid.x2max = g.value("x2max", cfg.grid.x2max);
    cfg.grid.dx = g.value("dx", cfg.grid.dx);
  }
  if (file.contains("out")) cfg.out = file.at("out").get<std::string>();
  if (file.contains("threshold"))
    cfg.threshold = file.at("threshold").get<double>();
  if (file.contains("start")) cfg.start = vec2_from_json(file.at("start"));
  if (file.contains("time")) {
    TimeGrid& tg = time_grid(cfg.problem);
    const auto& t = file.at("time");
    tg.t0 = t.value("t0", tg.t0);
    tg.tf = t.value("tf", tg.tf);
    tg.outer_steps = t.value("K", tg.outer_steps);
    tg.inner_steps = t.value("N", tg.inner_steps);
  }
  if (file.contains("ladder")) cfg.ladder = parse_ladder(file.at("ladder"));

  if (!flags.scheme.empty()) cfg.scheme = scheme_from_name(flags.scheme);
  if (flags.nr > 0) cfg.nr = flags.nr;
  if (!std::isnan(flags.tol)) cfg.tol = flags.tol;
  if (flags.monotone >= 0) {
    cfg.monotone = flags.monotone == 1;
    if (flags.mode.empty())
      cfg.mode = cfg.monotone ? FieldMode::Interpolated : FieldMode::Discrete;
  }
  if (!flags.mode.empty()) cfg.mode = field_mode_from_name(flags.mode);
  if (!std::isnan(flags.dx)) cfg.grid.dx = flags.dx;
  if (!flags.out.empty()) cfg.out = flags.out;
  if (!std::isnan(flags.threshold)) cfg.threshold = flags.threshold;
  if (!flags.start.empty()) {
    if (flags.start.size() != 2)
      throw std::invalid_argument("--start needs two coordinates");
    cfg.start = Vec2{flags.start[0], flags.start[1]};
  }
  if (!flags.ladder_path.empty())
    cfg.ladder = parse_ladder(load_json_file(flags.ladder_path));

  TimeGrid& tg = time_grid(cfg.problem);
  if (flags.k > 0) tg.outer_steps = flags.k;
  if (flags.n > 0) tg.inner_steps = flags.n;
  if (!std::isnan(flags.tf)) tg.tf = flags.tf;
  tg.validate();
  cfg.grid.validate();
  if (cfg.nr < 3) throw std::invalid_argument("invalid field: nr must be >= 3");
  if (!(cfg.tol >= 0.0)) throw std::invalid_argument("invalid field: tol");
  if (cfg.mode == FieldMode::Interpolated && !cfg.monotone)
    throw std::invalid_argument(
        "invalid field combination: interpolated mode needs monotone");
  return cfg;
}

json config_to_json(const RunConfig& cfg) {
  json j;
  if (cfg.example_id) j["example"] = *cfg.example_id;
  j["problem"] = to_json(cfg.problem);
  j["scheme"] = scheme_name(cfg.scheme);
  j["nr"] = cfg.nr;
  j["tol"] = cfg.tol;
  j["monotone"] = cfg.monotone;
  j["mode"] = field_mode_name(cfg.mode);
  j["grid"] = {{"x1min", cfg.grid.x1min}, {"x1max", cfg.grid.x1max},
               {"x2min", cfg.grid.x2min}, {"x2max", cfg.grid.x2max},
               {"dx", cfg.grid.dx}};
  j["out"] = cfg.out;
  j["threshold"] = cfg.threshold;
  if (cfg.start) j["start"] = to_json(*cfg.start);
  if (!cfg.ladder.empty()) {
    json lad = json::array();
    for (const auto& [h, nr] : cfg.ladder) lad.push_back({{"h", h}, {"nr", nr}});
    j["ladder"] = lad;
  }
  return j;
}

void write_json(const std::filesystem::path& path, const json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

int cmd_reach(const RunConfig& cfg) {
  const ReachTube tube = reach_tube(cfg.problem, cfg.scheme,
                                    make_direction_grid(cfg.nr));
  const std::filesystem::path out(cfg.out);
  write_file_atomic(out / "tube.csv", tube_to_csv(tube));

  json summary;
  summary["config"] = config_to_json(cfg);
  json increments = json::array();
  for (std::size_t j = 1; j < tube.sets.size(); ++j)
    increments.push_back(support_distance(tube.sets[j - 1], tube.sets[j]));
  summary["support_distance_increments"] = increments;
  const auto violations = expansion_check(tube, 0.0);
  summary["expansion_violations"] = violations;
  bool monotone = true;
  for (std::size_t j = 1; j < tube.sets.size(); ++j) {
    if (inclusion_margin(tube.sets[j - 1], tube.sets[j]) < -cfg.tol) {
      monotone = false;
      break;
    }
  }
  summary["monotone_inclusion"] = monotone;
  write_json(out / "reach_summary.json", summary);
  std::cout << "reach: " << tube.sets.size() << " sets, "
            << violations.size() << " expansion violations, wrote "
            << (out / "tube.csv").string() << "\n";
  return 0;
}

int cmd_mtf(const RunConfig& cfg) {
  const ReachTube tube = reach_tube(cfg.problem, cfg.scheme,
                                    make_direction_grid(cfg.nr));
  const MinTimeField field =
      min_time_field(tube, cfg.grid, cfg.tol, cfg.monotone, cfg.mode);
  const std::filesystem::path out(cfg.out);
  write_file_atomic(out / "field.csv", field_to_csv(field));
  int finite = 0;
  for (const double v : field.values)
    if (std::isfinite(v)) ++finite;
  json summary;
  summary["config"] = config_to_json(cfg);
  summary["nodes"] = field.values.size();
  summary["finite_nodes"] = finite;
  write_json(out / "mtf_summary.json", summary);
  std::cout << "mtf: " << finite << "/" << field.values.size()
            << " nodes reachable, wrote " << (out / "field.csv").string()
            << "\n";
  return 0;
}

int cmd_study(const RunConfig& cfg) {
  if (!cfg.example_id)
    throw std::invalid_argument("missing field: study needs --example");
  if (cfg.ladder.empty())
    throw std::invalid_argument("missing field: study needs a --ladder file");
  Ladder ladder;
  ladder.rungs = cfg.ladder;
  const StudyResult study =
      convergence_study(*cfg.example_id, cfg.scheme, ladder, cfg.grid);
  const std::filesystem::path out(cfg.out);
  write_file_atomic(out / "study.csv", study_to_csv(study));
  json summary;
  summary["config"] = config_to_json(cfg);
  if (study.fit) {
    summary["fit"] = {{"C", study.fit->c},
                      {"p", study.fit->p},
                      {"residual", study.fit->residual}};
    std::cout << "study: " << study.rows.size() << " rungs, fit C="
              << study.fit->c << " p=" << study.fit->p << "\n";
  } else {
    summary["fit"] = nullptr;
    std::cout << "study: " << study.rows.size() << " rung, no fit\n";
  }
  write_json(out / "study_summary.json", summary);
  return 0;
}

int cmd_traj(const RunConfig& cfg) {
  if (!cfg.start)
    throw std::invalid_argument("missing field: traj needs --start x1 x2");
  const ReachTube tube = reach_tube(cfg.problem, cfg.scheme,
                                    make_direction_grid(cfg.nr));
  const Trajectory traj = reconstruct_trajectory(tube, *cfg.start, cfg.tol);
  const std::filesystem::path out(cfg.out);
  write_file_atomic(out / "trajectory.csv", trajectory_to_csv(traj));
  json summary;
  summary["config"] = config_to_json(cfg);
  summary["duration"] = traj.duration;
  summary["endpoint_gap"] = traj.endpoint_gap;
  summary["steps"] = traj.states.size();
  write_json(out / "traj_summary.json", summary);
  std::cout << "traj: duration " << traj.duration << ", endpoint gap "
            << traj.endpoint_gap << ", wrote "
            << (out / "trajectory.csv").string() << "\n";
  return 0;
}

int cmd_diag(const RunConfig& cfg) {
  json diag;
  diag["config"] = config_to_json(cfg);
  if (cfg.example_id) {
    const ExampleInfo& info = example_info(*cfg.example_id);
    diag["kalman_rank"] = kalman_rank(info.A_fwd, info.B_fwd);
  } else if (const auto* lin =
                 std::get_if<LinearControlProblem>(&cfg.problem)) {
    diag["kalman_rank"] = kalman_rank(-lin->A_rev.base, -lin->B_rev.base);
  }
  const ReachTube tube = reach_tube(cfg.problem, cfg.scheme,
                                    make_direction_grid(cfg.nr));
  diag["expansion_violations"] = expansion_check(tube, 0.0);
  const auto stop = stopping_index(tube, cfg.threshold);
  if (stop)
    diag["stopping_index"] = *stop;
  else
    diag["stopping_index"] = nullptr;
  write_json(std::filesystem::path(cfg.out) / "diag.json", diag);
  std::cout << diag.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planar reachable-set and minimum-time-function toolkit"};
  app.require_subcommand(1);

  CliFlags flags;
  std::string command;
  for (const std::string name : {"reach", "mtf", "study", "traj", "diag"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--example", flags.example_id, "registry example id");
    sub->add_option("--config", flags.config_path, "JSON config file");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--scheme", flags.scheme, "integration scheme");
    sub->add_option("--nr", flags.nr, "number of directions N_R");
    sub->add_option("--k", flags.k, "outer step count K");
    sub->add_option("--n", flags.n, "inner steps per outer step N");
    sub->add_option("--tf", flags.tf, "horizon end time");
    sub->add_option("--dx", flags.dx, "spatial grid step");
    sub->add_option("--tol", flags.tol, "membership tolerance");
    sub->add_option("--mode", flags.mode, "interpolated or discrete");
    sub->add_flag("--monotone{1},--no-monotone{0}", flags.monotone,
                  "treat the tube as monotone");
    sub->add_option("--threshold", flags.threshold, "stopping threshold (diag)");
    sub->add_option("--ladder", flags.ladder_path, "ladder JSON file (study)");
    sub->add_option("--start", flags.start, "start point (traj)")->expected(2);
    sub->callback([&command, name] { command = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = resolve_config(flags);
    if (command == "reach") return cmd_reach(cfg);
    if (command == "mtf") return cmd_mtf(cfg);
    if (command == "study") return cmd_study(cfg);
    if (command == "traj") return cmd_traj(cfg);
    if (command == "diag") return cmd_diag(cfg);
    std::cerr << "error: unknown command\n";
    return kExitConfig;
  } catch (const mintime::not_reachable_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNotReachable;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const mintime::not_found_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
