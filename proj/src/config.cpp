#include "mfgz/config.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mfgz/errors.hpp"

#ifndef MFGZ_CONFIG_DIR
#define MFGZ_CONFIG_DIR "configs"
#endif

namespace mfgz {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::vector<std::string> words(std::string_view s) {
  std::istringstream in{std::string(s)};
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double to_number(const std::string& w) {
  char* end = nullptr;
  const double x = std::strtod(w.c_str(), &end);
  if (w.empty() || end != w.c_str() + w.size() || !std::isfinite(x)) throw InvalidArgument("not a number: '" + w + "'");
  return x;
}

std::vector<double> numbers(std::string_view s) {
  std::vector<double> out;
  for (const std::string& w : words(s)) out.push_back(to_number(w));
  return out;
}

std::size_t to_count(const std::string& s) {
  const auto w = words(s);
  if (w.size() != 1) throw InvalidArgument("expected one integer, got '" + s + "'");
  char* end = nullptr;
  const long long v = std::strtoll(w[0].c_str(), &end, 10);
  if (end != w[0].c_str() + w[0].size() || v < 0) throw InvalidArgument("expected a non-negative integer: '" + s + "'");
  return static_cast<std::size_t>(v);
}

double to_scalar(const std::string& s) {
  const auto v = numbers(s);
  if (v.size() != 1) throw InvalidArgument("expected one number, got '" + s + "'");
  return v[0];
}

ControlBox to_box(const std::string& s) {
  ControlBox box;
  for (const std::string& part : split(s, ';')) {
    const auto v = numbers(part);
    if (v.size() == 1) {
      box.axes.push_back(Interval{v[0], v[0]});
    } else if (v.size() == 2) {
      if (!(v[0] <= v[1])) throw InvalidArgument("control box axis has lo > hi: '" + part + "'");
      box.axes.push_back(Interval{v[0], v[1]});
    } else {
      throw InvalidArgument("control box axis needs 'lo hi': '" + part + "'");
    }
  }
  return box;
}

std::vector<GridAxis> to_grid(const std::string& s) {
  std::vector<GridAxis> axes;
  for (const std::string& part : split(s, ';')) {
    const auto w = words(part);
    if (w.size() != 3) throw InvalidArgument("grid axis needs 'lo hi points': '" + part + "'");
    axes.push_back(GridAxis{to_number(w[0]), to_number(w[1]), to_count(w[2])});
  }
  return axes;
}

}  // namespace

LawSpec parse_law(std::string_view text, std::size_t dim) {
  LawSpec law;
  law.text = trim(text);
  const auto w = words(text);
  if (w.empty()) throw InvalidArgument("empty law");
  const std::string head = w[0];
  const std::string rest = trim(text.substr(text.find(head) + head.size()));
  if (head == "gaussian" || head == "uniform") {
    const auto v = numbers(rest);
    if (v.size() != 2) throw InvalidArgument(head + " law needs two numbers");
    if (dim != 1) throw InvalidArgument(head + " laws are only quantized in dimension 1");
    law.kind = head == "gaussian" ? LawSpec::Kind::gaussian : LawSpec::Kind::uniform;
    law.a = v[0];
    law.b = v[1];
    if (law.kind == LawSpec::Kind::gaussian && !(law.b > 0.0)) throw InvalidArgument("gaussian variance must be positive");
    if (law.kind == LawSpec::Kind::uniform && !(law.a < law.b)) throw InvalidArgument("uniform law needs lo < hi");
  } else if (head == "dirac") {
    law.kind = LawSpec::Kind::dirac;
    law.points = numbers(rest);
    if (law.points.size() != dim) throw InvalidArgument("dirac law needs exactly dim coordinates");
  } else if (head == "atoms") {
    law.kind = LawSpec::Kind::atoms;
    for (const std::string& part : split(rest, '|')) {
      const auto p = numbers(part);
      if (p.size() != dim) throw InvalidArgument("each atom needs exactly dim coordinates");
      law.points.insert(law.points.end(), p.begin(), p.end());
    }
  } else {
    throw InvalidArgument("unknown law '" + head + "' (gaussian, uniform, dirac, atoms)");
  }
  return law;
}

EmpiricalMeasure LawSpec::measure(std::size_t dim, std::size_t atom_count) const {
  switch (kind) {
    case Kind::gaussian:
      return quantize(QuantizationSpec{LawFamily::gaussian, a, b, 0.0, 1.0, atom_count});
    case Kind::uniform:
      return quantize(QuantizationSpec{LawFamily::uniform, 0.0, 1.0, a, b, atom_count});
    case Kind::dirac: {
      std::vector<double> atoms;
      for (std::size_t i = 0; i < std::max<std::size_t>(atom_count, 1); ++i)
        atoms.insert(atoms.end(), points.begin(), points.end());
      return EmpiricalMeasure::uniform(dim, std::move(atoms));
    }
    case Kind::atoms:
      return EmpiricalMeasure::uniform(dim, points);
  }
  throw InvalidArgument("unknown law kind");
}

std::optional<std::size_t> LawSpec::fixed_count(std::size_t dim) const {
  if (kind == Kind::atoms) return points.size() / dim;
  return std::nullopt;
}

GameConfig parse_config(std::string_view text, std::string name) {
  GameConfig cfg;
  cfg.name = std::move(name);
  std::map<std::string, std::pair<std::string, std::size_t>> raw;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no, 1);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("missing key", line_no, 1);
    if (raw.count(key)) throw ParseError("key '" + key + "' given twice", line_no, 1);
    raw[key] = {value, line_no};
    if (pos > text.size()) break;
  }

  auto get = [&](const std::string& key) -> const std::pair<std::string, std::size_t>* {
    auto it = raw.find(key);
    return it == raw.end() ? nullptr : &it->second;
  };
  auto with_line = [&](const std::string& key, auto&& fn) {
    const auto* e = get(key);
    if (!e) return;
    try {
      fn(e->first);
    } catch (const InvalidArgument& err) {
      throw ParseError(key + ": " + err.what(), e->second, 1);
    }
  };

  static const char* known[] = {"horizon", "dim", "f", "l", "m", "U", "V", "x_law", "z_law", "particles",
                                "control_resolution", "time_steps", "grid", "lipschitz_K", "substeps", "scheme",
                                "dpp_grid_points", "dpp_margin", "z_atoms", "cfl"};
  for (const auto& [key, entry] : raw) {
    bool ok = false;
    for (const char* k : known) ok |= key == k;
    if (!ok) throw ParseError("unknown key '" + key + "'", entry.second, 1);
  }
  for (const char* req : {"dim", "f", "m", "U", "V", "x_law", "z_law"})
    if (!get(req)) throw ParseError(std::string("missing required key '") + req + "'", line_no, 1);

  with_line("horizon", [&](const std::string& v) { cfg.horizon = to_scalar(v); });
  with_line("dim", [&](const std::string& v) { cfg.dim = to_count(v); });
  if (cfg.dim == 0) throw ParseError("dim must be positive", get("dim")->second, 1);
  if (!(cfg.horizon > 0.0)) throw ParseError("horizon must be positive", get("horizon") ? get("horizon")->second : 0, 1);
  with_line("f", [&](const std::string& v) { cfg.f = split(v, ';'); });
  with_line("l", [&](const std::string& v) { cfg.l = v; });
  with_line("m", [&](const std::string& v) { cfg.m = v; });
  with_line("U", [&](const std::string& v) { cfg.u_box = to_box(v); });
  with_line("V", [&](const std::string& v) { cfg.v_box = to_box(v); });
  with_line("x_law", [&](const std::string& v) { cfg.x_law = parse_law(v, cfg.dim); });
  with_line("z_law", [&](const std::string& v) { cfg.z_law = parse_law(v, cfg.dim); });
  with_line("particles", [&](const std::string& v) { cfg.particles = to_count(v); });
  with_line("z_atoms", [&](const std::string& v) { cfg.z_atoms = to_count(v); });
  with_line("control_resolution", [&](const std::string& v) { cfg.control_resolution = to_count(v); });
  with_line("time_steps", [&](const std::string& v) { cfg.time_steps = to_count(v); });
  with_line("grid", [&](const std::string& v) { cfg.grid = to_grid(v); });
  with_line("lipschitz_K", [&](const std::string& v) { cfg.lipschitz_k = to_scalar(v); });
  with_line("substeps", [&](const std::string& v) { cfg.substeps = to_count(v); });
  with_line("scheme", [&](const std::string& v) {
    if (v == "rk4") cfg.scheme = Scheme::rk4;
    else if (v == "euler") cfg.scheme = Scheme::euler;
    else throw InvalidArgument("scheme must be rk4 or euler");
  });
  with_line("dpp_grid_points", [&](const std::string& v) { cfg.dpp_grid_points = to_count(v); });
  with_line("dpp_margin", [&](const std::string& v) { cfg.dpp_margin = to_scalar(v); });
  with_line("cfl", [&](const std::string& v) { cfg.cfl = to_scalar(v); });

  if (cfg.f.size() != cfg.dim) throw ParseError("f needs one ';'-separated expression per state component", get("f")->second, 1);
  if (cfg.particles == 0 || cfg.z_atoms == 0 || cfg.time_steps == 0 || cfg.substeps == 0)
    throw ParseError("particles, z_atoms, time_steps and substeps must be positive", line_no, 1);
  for (const auto& [key, entry] : raw) cfg.entries[key] = entry.first;
  // surface expression errors now, with the config line attached
  try {
    (void)cfg.game();
  } catch (const InvalidArgument& err) {
    throw ParseError(err.what(), 0, 0);
  }
  return cfg;
}

GameSpec GameConfig::game() const {
  std::vector<Expression> drift;
  for (const std::string& e : f) drift.push_back(parse_expression(e));
  return GameSpec(horizon, dim, u_box, v_box, std::move(drift), parse_expression(l), parse_expression(m), lipschitz_k);
}

std::size_t GameConfig::particle_count() const {
  if (auto fixed = x_law.fixed_count(dim)) return *fixed;
  return particles;
}

EmpiricalMeasure GameConfig::x_measure() const { return x_law.measure(dim, particle_count()); }

EmpiricalMeasure GameConfig::z_measure() const {
  return z_law.measure(dim, z_law.kind == LawSpec::Kind::dirac ? 1 : z_atoms);
}

TargetedEnsemble GameConfig::ensemble() const { return TargetedEnsemble(x_measure(), z_measure()); }

SpatialGrid GameConfig::hji_grid(std::optional<std::size_t> points) const {
  if (grid.empty()) throw InvalidArgument("config has no grid");
  const std::size_t axes = particle_count() * dim;
  std::vector<GridAxis> out;
  if (grid.size() == 1) {
    out.assign(axes, grid[0]);
  } else if (grid.size() == dim) {
    for (std::size_t i = 0; i < particle_count(); ++i) out.insert(out.end(), grid.begin(), grid.end());
  } else if (grid.size() == axes) {
    out = grid;
  } else {
    throw InvalidArgument("grid needs 1, dim or particles*dim axes");
  }
  if (points)
    for (GridAxis& a : out) a.points = *points;
  return SpatialGrid(std::move(out));
}

SchemeConfig GameConfig::scheme_config() const { return SchemeConfig{0, cfl, control_resolution}; }

DppConfig GameConfig::dpp_config() const {
  DppConfig c;
  c.steps = time_steps;
  c.u_resolution = control_resolution;
  c.v_resolution = control_resolution;
  c.mode = DppMode::grid;
  c.grid_points = dpp_grid_points;
  c.margin = dpp_margin;
  c.integrator = integrator();
  return c;
}

std::string resolve_config_path(const std::string& name_or_path) {
  namespace fs = std::filesystem;
  if (fs::is_regular_file(name_or_path)) return name_or_path;
  std::vector<std::string> dirs;
  if (const char* env = std::getenv("MFGZ_CONFIG_DIR")) dirs.emplace_back(env);
  dirs.emplace_back(MFGZ_CONFIG_DIR);
  for (const std::string& d : dirs) {
    for (const std::string& candidate : {name_or_path, name_or_path + ".cfg"}) {
      const fs::path p = fs::path(d) / candidate;
      if (fs::is_regular_file(p)) return p.string();
    }
  }
  throw InvalidArgument("config '" + name_or_path + "' not found (searched the path, $MFGZ_CONFIG_DIR and " +
                        MFGZ_CONFIG_DIR + ")");
}

GameConfig load_config(const std::string& name_or_path) {
  const std::string path = resolve_config_path(name_or_path);
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  GameConfig cfg = parse_config(buf.str(), std::filesystem::path(path).stem().string());
  cfg.path = path;
  return cfg;
}

}  // namespace mfgz
