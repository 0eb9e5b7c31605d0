#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mfgz/dpp.hpp"
#include "mfgz/dynamics.hpp"
#include "mfgz/game.hpp"
#include "mfgz/grid.hpp"
#include "mfgz/hji.hpp"
#include "mfgz/measure.hpp"

namespace mfgz {

/// Law descriptions accepted by x_law / z_law:
///   gaussian <mean> <variance>    (dim 1, quantized)
///   uniform <lo> <hi>             (dim 1, quantized)
///   dirac <a1> .. <an>
///   atoms <p1> | <p2> | ...       (each p has n coordinates, equal weights)
struct LawSpec {
  enum class Kind { gaussian, uniform, dirac, atoms };
  Kind kind = Kind::dirac;
  double a = 0.0;
  double b = 0.0;
  std::vector<double> points;  // dirac point or packed atoms
  std::string text;

  /// Atom count is used for gaussian/uniform; a dirac law repeats its point.
  EmpiricalMeasure measure(std::size_t dim, std::size_t atom_count) const;
  /// Fixed atom count for atoms laws, none otherwise.
  std::optional<std::size_t> fixed_count(std::size_t dim) const;
};

LawSpec parse_law(std::string_view text, std::size_t dim);

struct GameConfig {
  std::string name;
  std::string path;

  double horizon = 1.0;
  std::size_t dim = 1;
  std::vector<std::string> f;
  std::string l = "0";
  std::string m = "0";
  ControlBox u_box;
  ControlBox v_box;
  LawSpec x_law;
  LawSpec z_law;
  std::size_t particles = 1;
  std::size_t z_atoms = 51;
  std::size_t control_resolution = 5;
  std::size_t time_steps = 10;
  std::vector<GridAxis> grid;  // 1, dim or particles*dim entries
  std::optional<double> lipschitz_k;
  std::size_t substeps = 4;
  Scheme scheme = Scheme::rk4;
  std::size_t dpp_grid_points = 15;
  double dpp_margin = 1.0;
  double cfl = 0.9;

  /// key -> raw text exactly as read (for the manifest)
  std::map<std::string, std::string> entries;

  GameSpec game() const;
  std::size_t particle_count() const;
  EmpiricalMeasure x_measure() const;
  EmpiricalMeasure z_measure() const;
  TargetedEnsemble ensemble() const;
  IntegratorConfig integrator() const { return IntegratorConfig{scheme, substeps}; }
  /// Grid for the finite-difference solver; `points` overrides every axis count.
  SpatialGrid hji_grid(std::optional<std::size_t> points = std::nullopt) const;
  SchemeConfig scheme_config() const;
  DppConfig dpp_config() const;
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys, repeated
/// keys and malformed values are ParseErrors carrying the line number.
GameConfig parse_config(std::string_view text, std::string name = "inline");

/// Accepts a file path or a bare config name looked up in $MFGZ_CONFIG_DIR and
/// then the install's configs directory (".cfg" appended when missing).
std::string resolve_config_path(const std::string& name_or_path);
GameConfig load_config(const std::string& name_or_path);

}  // namespace mfgz
