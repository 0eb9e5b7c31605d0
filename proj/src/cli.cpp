#include "mfgz/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mfgz/checks.hpp"
#include "mfgz/config.hpp"
#include "mfgz/dpp.hpp"
#include "mfgz/errors.hpp"
#include "mfgz/hji.hpp"
#include "mfgz/textio.hpp"

namespace mfgz {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Collects outputs and resolved parameters, then writes manifest.txt.
class Run {
 public:
  Run(std::string out_dir, std::string command) : dir_(std::move(out_dir)), command_(std::move(command)) {
    fs::create_directories(dir_);
  }

  void param(const std::string& key, const std::string& value) { params_.emplace_back(key, value); }
  void config(const GameConfig& cfg) {
    config_path_ = cfg.path;
    for (const auto& [k, v] : cfg.entries) param("config." + k, v);
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path p = fs::path(dir_) / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + p.string());
    out << content;
    files_.push_back({name, fnv1a64(content), content.size()});
  }

  void lap(const std::string& what) {
    const auto now = Clock::now();
    timings_.emplace_back(what, std::chrono::duration<double, std::milli>(now - last_).count());
    last_ = now;
  }

  void finish(int status) {
    std::ostringstream m;
    m << "tool = mfgz " << kToolVersion << '\n';
    m << "subcommand = " << command_ << '\n';
    if (!config_path_.empty()) m << "config = " << config_path_ << '\n';
    m << "output_dir = " << dir_ << '\n';
    m << "exit_status = " << status << '\n';
    for (const auto& [k, v] : params_) m << "param." << k << " = " << v << '\n';
    for (const auto& f : files_) {
      char hex[17];
      std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(f.hash));
      m << "file." << f.name << " = fnv1a64:" << hex << " bytes:" << f.bytes << '\n';
    }
    for (const auto& [k, ms] : timings_) m << "timing." << k << "_ms = " << fmt(ms) << '\n';
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    m << "finished_at = " << stamp << '\n';
    std::ofstream(fs::path(dir_) / "manifest.txt", std::ios::binary) << m.str();
  }

 private:
  struct File {
    std::string name;
    std::uint64_t hash;
    std::size_t bytes;
  };
  std::string dir_;
  std::string command_;
  std::string config_path_;
  std::vector<std::pair<std::string, std::string>> params_;
  std::vector<File> files_;
  std::vector<std::pair<std::string, double>> timings_;
  Clock::time_point last_ = Clock::now();
};

std::vector<ValueKind> kinds_of(const std::string& kind) {
  if (kind == "lower") return {ValueKind::lower};
  if (kind == "upper") return {ValueKind::upper};
  if (kind == "both") return {ValueKind::lower, ValueKind::upper};
  throw InvalidArgument("--kind must be lower, upper or both");
}

const char* kind_name(ValueKind k) { return k == ValueKind::lower ? "lower" : "upper"; }

struct Common {
  std::string out = "mfgz_out";
  std::uint64_t seed = 0;
};

struct HjiFlags {
  std::string config;
  std::string kind = "lower";
  std::size_t particles = 0;
  std::size_t points = 0;
  std::size_t steps = 0;
  std::size_t snapshots = 11;
  double cfl = 0.0;
};

int cmd_solve_hji(const HjiFlags& fl, const Common& common) {
  GameConfig cfg = load_config(fl.config);
  if (fl.particles) cfg.particles = fl.particles;
  if (fl.cfl > 0.0) cfg.cfl = fl.cfl;
  Run run(common.out, "solve-hji");
  run.config(cfg);
  run.param("kind", fl.kind);
  run.param("particles", std::to_string(cfg.particle_count()));
  const GameSpec spec = cfg.game();
  const SpatialGrid grid = cfg.hji_grid(fl.points ? std::optional<std::size_t>(fl.points) : std::nullopt);
  SchemeConfig scheme = cfg.scheme_config();
  scheme.steps = fl.steps;
  const EmpiricalMeasure z = cfg.z_measure();
  const HjiSolver solver(spec, grid, z, scheme);
  run.param("grid_points", std::to_string(grid.axis(0).points));
  run.param("steps", std::to_string(solver.steps()));
  std::cout << "grid axes " << grid.axis_count() << " x " << grid.axis(0).points << " nodes, steps " << solver.steps()
            << ", dt " << fmt(solver.dt()) << ", CFL number " << fmt(solver.cfl_number()) << '\n';
  if (spec.time_dependent())
    std::cout << "note: f or l depends on t; uniqueness of the viscosity solution is not covered by the comparison "
                 "result in that case\n";
  run.lap("setup");

  std::vector<HjiSolution> sols;
  for (ValueKind kind : kinds_of(fl.kind)) {
    HjiSolution sol = solver.solve(kind, fl.snapshots);
    run.lap(std::string("solve_") + kind_name(kind));
    std::ostringstream csv;
    write_snapshots_csv(csv, grid, sol.snapshots);
    run.write(std::string("hji_") + kind_name(kind) + ".csv", csv.str());
    if (grid.axis_count() == 1) {
      std::ostringstream mat;
      write_surface_matrix(mat, grid, sol.snapshots);
      run.write(std::string("hji_") + kind_name(kind) + "_surface.dat", mat.str());
    }
    double max_abs = 0.0;
    for (double v : sol.field.values) max_abs = std::max(max_abs, std::abs(v));
    const double bound = sol.max_abs_terminal + spec.horizon() * sol.max_abs_running_cost;
    std::cout << kind_name(kind) << ": max|value(0)| " << fmt(max_abs) << ", max-principle bound " << fmt(bound)
              << " (excess over all steps " << fmt(sol.max_principle_excess) << ") "
              << (sol.max_principle_ok() ? "ok" : "VIOLATED") << '\n';
    try {
      const double at = field_value_at(sol.field, cfg.x_measure().atoms());
      std::cout << kind_name(kind) << ": value at the configured law's node " << fmt(at) << '\n';
    } catch (const GridExcursion& e) {
      std::cout << kind_name(kind) << ": configured law lies outside the grid (" << e.what() << ")\n";
    }
    sols.push_back(std::move(sol));
  }
  if (sols.size() == 2) {
    double gap = 0.0;
    for (std::size_t i = 0; i < sols[0].field.values.size(); ++i)
      gap = std::max(gap, std::abs(sols[1].field.values[i] - sols[0].field.values[i]));
    std::cout << "max nodewise |upper - lower| at t=0: " << fmt(gap) << '\n';
  }
  run.finish(kExitOk);
  return kExitOk;
}

struct ValueFlags {
  std::string config;
  std::string kind = "both";
  std::size_t steps = 0;
  std::size_t resolution = 0;
  std::size_t particles = 0;
  std::size_t points = 0;
  std::string mode = "grid";
  double residual = -1.0;
};

int cmd_value(const ValueFlags& fl, const Common& common) {
  GameConfig cfg = load_config(fl.config);
  if (fl.particles) cfg.particles = fl.particles;
  if (fl.steps) cfg.time_steps = fl.steps;
  if (fl.resolution) cfg.control_resolution = fl.resolution;
  if (fl.points) cfg.dpp_grid_points = fl.points;
  Run run(common.out, "value");
  run.config(cfg);
  DppConfig d = cfg.dpp_config();
  if (fl.mode == "exact") d.mode = DppMode::exact;
  else if (fl.mode != "grid") throw InvalidArgument("--mode must be grid or exact");
  run.param("kind", fl.kind);
  run.param("mode", fl.mode);
  run.param("steps", std::to_string(d.steps));
  run.param("control_resolution", std::to_string(d.u_resolution));
  run.param("particles", std::to_string(cfg.particle_count()));
  if (d.mode == DppMode::grid) run.param("grid_points", std::to_string(d.grid_points));
  const GameSpec spec = cfg.game();
  const TargetedEnsemble ens = cfg.ensemble();
  run.lap("setup");
  std::vector<double> values;
  for (ValueKind kind : kinds_of(fl.kind)) {
    GameValueReport rep = dpp_value(spec, ens, kind, d);
    if (fl.residual >= 0.0) rep.residual = dpp_residual(spec, ens, kind, d, fl.residual);
    run.lap(std::string("value_") + kind_name(kind));
    std::ostringstream txt, csv;
    write_report(txt, rep);
    write_strategy_csv(csv, rep);
    run.write(std::string("value_") + kind_name(kind) + ".txt", txt.str());
    run.write(std::string("strategy_") + kind_name(kind) + ".csv", csv.str());
    std::cout << kind_name(kind) << " value " << fmt(rep.value) << " (S=" << rep.steps << ", R=" << d.u_resolution
              << ", N=" << ens.x_measure.size() << ", " << (d.mode == DppMode::exact ? "exact" : "grid") << ")\n";
    if (rep.residual) std::cout << kind_name(kind) << " dpp residual at r=" << fmt(fl.residual) << ": " << fmt(*rep.residual) << '\n';
    values.push_back(rep.value);
  }
  if (values.size() == 2) {
    std::cout << "upper - lower = " << fmt(values[1] - values[0]) << '\n';
    if (values[0] > values[1] + 1e-12) std::cout << "warning: lower exceeds upper\n";
  }
  run.finish(kExitOk);
  return kExitOk;
}

int cmd_check(const std::string& config, const std::string& suite, const Common& common) {
  bool known = false;
  for (const char* s : kSuites) known |= suite == s;
  if (!known) throw InvalidArgument("unknown suite '" + suite + "'");
  const GameConfig cfg = load_config(config);
  Run run(common.out, "check");
  run.config(cfg);
  run.param("suite", suite);
  run.param("seed", std::to_string(common.seed));
  const CheckReport rep = run_suite(suite, cfg, common.seed);
  run.lap("suite");
  std::ostringstream txt;
  for (const CheckLine& l : rep.lines) txt << (l.pass ? "PASS " : "FAIL ") << l.property << ": " << l.measured << '\n';
  txt << (rep.passed() ? "suite passed" : "suite failed") << '\n';
  std::cout << txt.str();
  run.write("check_" + suite + ".txt", txt.str());
  const int status = rep.passed() ? kExitOk : kExitCheckFailed;
  run.finish(status);
  return status;
}

EmpiricalMeasure read_measure_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read measure file '" + path + "'");
  std::vector<double> weights, atoms;
  std::size_t dim = 0;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    bool numeric = true;
    for (std::string cell; std::getline(ss, cell, ',');) {
      char* end = nullptr;
      const double x = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) {
        numeric = false;
        break;
      }
      row.push_back(x);
    }
    if (!numeric) {
      if (weights.empty()) continue;  // header
      throw ParseError("non-numeric row in measure file", line_no, 1);
    }
    if (row.size() < 2) throw ParseError("measure rows need weight and at least one coordinate", line_no, 1);
    if (dim == 0) dim = row.size() - 1;
    if (row.size() - 1 != dim) throw ParseError("inconsistent coordinate count", line_no, 1);
    weights.push_back(row[0]);
    atoms.insert(atoms.end(), row.begin() + 1, row.end());
  }
  if (weights.empty()) throw InvalidArgument("measure file '" + path + "' has no atoms");
  return EmpiricalMeasure(dim, std::move(atoms), std::move(weights));
}

struct SimFlags {
  std::string config;
  std::string u;
  std::string v;
  std::size_t steps = 0;
};

std::vector<double> control_point(const std::string& text, const ControlBox& box) {
  std::vector<double> p;
  if (text.empty()) {
    for (const Interval& iv : box.axes) p.push_back(iv.lo);
    return p;
  }
  std::stringstream ss(text);
  for (double x; ss >> x;) p.push_back(x);
  if (p.size() != box.dim()) throw InvalidArgument("control needs " + std::to_string(box.dim()) + " values");
  return p;
}

int cmd_simulate(const SimFlags& fl, const Common& common) {
  GameConfig cfg = load_config(fl.config);
  if (fl.steps) cfg.time_steps = fl.steps;
  Run run(common.out, "simulate");
  run.config(cfg);
  const GameSpec spec = cfg.game();
  const TargetedEnsemble ens = cfg.ensemble();
  const TimeMesh mesh(0.0, cfg.horizon, cfg.time_steps);
  const ControlPath u = ControlPath::constant(mesh, control_point(fl.u, cfg.u_box));
  const ControlPath v = ControlPath::constant(mesh, control_point(fl.v, cfg.v_box));
  run.param("u", fl.u.empty() ? "lower corner" : fl.u);
  run.param("v", fl.v.empty() ? "lower corner" : fl.v);
  std::ostringstream csv;
  csv << "t,atom,weight";
  for (std::size_t c = 0; c < cfg.dim; ++c) csv << ",x" << c + 1;
  csv << '\n';
  ParticleState st{0.0, ens.x_measure};
  double cost = 0.0;
  auto dump = [&](const ParticleState& s) {
    for (std::size_t i = 0; i < s.measure.size(); ++i) {
      csv << fmt(s.time) << ',' << i << ',' << fmt(s.measure.weight(i));
      for (double x : s.measure.atom(i)) csv << ',' << fmt(x);
      csv << '\n';
    }
  };
  dump(st);
  for (std::size_t k = 1; k <= mesh.steps; ++k) {
    CostedState next = running_cost_accumulate(spec, st, u, v, mesh.time(k), cfg.integrator());
    cost += next.cost;
    st = std::move(next.state);
    dump(st);
  }
  const double j = cost + eval_terminal_cost(spec, ens, st.measure.atoms());
  run.write("trajectory.csv", csv.str());
  std::cout << "running cost " << fmt(cost) << ", objective J " << fmt(j) << '\n';
  run.lap("simulate");
  run.finish(kExitOk);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Zero-sum differential games on laws: finite-difference HJI, dynamic programming and checks", "mfgz"};
  app.set_version_flag("--version", std::string("mfgz ") + kToolVersion);
  app.require_subcommand(1);
  Common common;
  app.add_option("--out", common.out, "Output directory")->capture_default_str();
  app.add_option("--seed", common.seed, "Seed for randomized checks")->capture_default_str();

  HjiFlags hji;
  auto* solve = app.add_subcommand("solve-hji", "Solve the lifted HJI equation on a particle grid");
  solve->add_option("config", hji.config, "Config name or path")->required();
  solve->add_option("--kind", hji.kind, "lower, upper or both")->capture_default_str();
  solve->add_option("--particles", hji.particles, "Atoms of the quantized initial law");
  solve->add_option("--points", hji.points, "Grid points per axis");
  solve->add_option("--steps", hji.steps, "Time steps (default: from the CFL bound)");
  solve->add_option("--snapshots", hji.snapshots, "Number of stored time slices")->capture_default_str();
  solve->add_option("--cfl", hji.cfl, "CFL safety factor");

  ValueFlags val;
  auto* value = app.add_subcommand("value", "Lower/upper value by dynamic programming");
  value->add_option("config", val.config, "Config name or path")->required();
  value->add_option("--kind", val.kind, "lower, upper or both")->capture_default_str();
  value->add_option("--steps", val.steps, "Time steps");
  value->add_option("--resolution", val.resolution, "Control grid points per axis");
  value->add_option("--particles", val.particles, "Atoms of the quantized initial law");
  value->add_option("--points", val.points, "Interpolation grid points per axis");
  value->add_option("--mode", val.mode, "grid or exact")->capture_default_str();
  value->add_option("--residual", val.residual, "Also report the DPP residual at this split time");

  std::string check_config, suite;
  auto* check = app.add_subcommand("check", "Run a property suite");
  check->add_option("config", check_config, "Config name or path")->required();
  check->add_option("suite", suite, "metric, flow, estimates, isaacs, gradient, dpp-oracle, comparison")->required();

  std::string file_a, file_b;
  int order = 2;
  auto* wass = app.add_subcommand("wasserstein", "W_p distance between two measure CSV files (weight,x1..xn)");
  wass->add_option("file_a", file_a)->required();
  wass->add_option("file_b", file_b)->required();
  wass->add_option("--p", order, "Order, 1 or 2")->capture_default_str();

  SimFlags sim;
  auto* simulate = app.add_subcommand("simulate", "Propagate the ensemble under constant controls");
  simulate->add_option("config", sim.config, "Config name or path")->required();
  simulate->add_option("--u", sim.u, "Player 1 control (space separated), default lower corner of U");
  simulate->add_option("--v", sim.v, "Player 2 control, default lower corner of V");
  simulate->add_option("--steps", sim.steps, "Output time steps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*solve) return cmd_solve_hji(hji, common);
    if (*value) return cmd_value(val, common);
    if (*check) return cmd_check(check_config, suite, common);
    if (*simulate) return cmd_simulate(sim, common);
    if (*wass) {
      if (order != 1 && order != 2) throw InvalidArgument("--p must be 1 or 2");
      std::cout << fmt(wasserstein(order, read_measure_csv(file_a), read_measure_csv(file_b))) << '\n';
      return kExitOk;
    }
  } catch (const CflViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCfl;
  } catch (const GridExcursion& e) {
    std::cerr << "error: " << e.what() << " (enlarge the grid)\n";
    return kExitGridExcursion;
  } catch (const NumericFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const EvalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace mfgz
