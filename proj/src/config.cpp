#include "iwri/config.hpp"

#include "iwri/errors.hpp"
#include "iwri/io.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <sstream>

namespace iwri {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(s);
  while (std::getline(ss, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  if (v == "inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": '" + v + "' is not a number");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError(key + ": '" + v + "' is not an integer");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError(key + ": '" + v + "' is not a boolean");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& p : split(v, ',')) out.push_back(to_double(key, p));
  return out;
}

std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s;
}

std::vector<Position> to_positions(const std::string& key, const std::string& v) {
  std::vector<Position> out;
  for (const auto& item : split(v, ';')) {
    std::istringstream is(item);
    std::string xs, zs, extra;
    is >> xs >> zs;
    if (xs.empty() || zs.empty() || (is >> extra)) throw ConfigError(key + ": expected 'x z' pairs separated by ';'");
    out.push_back({to_double(key, xs), to_double(key, zs)});
  }
  return out;
}

std::string positions_text(const std::vector<Position>& ps) {
  std::string s;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    s += (i ? "; " : "") + format_double(ps[i].x) + " " + format_double(ps[i].z);
  }
  return s;
}

std::vector<Position> receiver_line(const std::string& key, const std::string& v) {
  std::istringstream is(v);
  std::string t[5], extra;
  for (auto& s : t) is >> s;
  if (t[4].empty() || (is >> extra)) throw ConfigError(key + ": expected 'x0 z0 x1 z1 count'");
  const double x0 = to_double(key, t[0]), z0 = to_double(key, t[1]);
  const double x1 = to_double(key, t[2]), z1 = to_double(key, t[3]);
  const long long n = to_int(key, t[4]);
  if (n < 1) throw ConfigError(key + ": count must be >= 1");
  std::vector<Position> out;
  for (long long i = 0; i < n; ++i) {
    const double s = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    out.push_back({x0 + s * (x1 - x0), z0 + s * (z1 - z0)});
  }
  return out;
}

const char* solve_name(NormalSolve s) { return s == NormalSolve::kLowRank ? "lowrank" : "normal"; }
const char* bound_name(BoundMode b) { return b == BoundMode::kSplitBregman ? "bregman" : "clip"; }

bool is_builtin(const std::string& kind) {
  return kind == "box" || kind == "homogeneous" || kind == "gradient" || kind == "smooth";
}

ModelSource model_source(const std::string& v, const std::string& base_dir) {
  if (is_builtin(v)) return {v, ""};
  std::filesystem::path p(v);
  if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
  return {"file", p.lexically_normal().string()};
}

std::string model_text(const ModelSource& s) { return s.kind == "file" ? s.path : s.kind; }

}  // namespace

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.geometry.sources = {{10.0, 350.0}};
  cfg.geometry.receivers = receiver_line("receivers.line", "980 30 980 670 18");
  cfg.plan.batches = {cfg.frequencies};
  cfg.penalty.variant = Variant::kPrsm;
  cfg.penalty.alpha = 0.5;
  cfg.stopping.k_max = 100;
  cfg.stopping.delta = 1e-3;
  cfg.stopping.delta_relative = 1e-3;  // data are O(1e-4): an absolute delta stops at once
  cfg.bounds = Bounds(1800.0, 2100.0);
  cfg.setup.pml_velocity = 2100.0;
  return cfg;
}

void RunConfig::validate() const {
  (void)Grid2D(grid.nx, grid.nz, grid.dx, grid.dz);
  geometry.validate(grid);
  if (frequencies.empty()) throw ConfigError("no frequencies configured");
  for (double f : frequencies) {
    if (!(f > 0.0)) throw ConfigError("frequencies must be positive");
  }
  plan.validate();
  for (const auto& b : plan.batches) {
    for (double f : b) {
      bool found = false;
      for (double g : frequencies) found = found || std::abs(f - g) <= 1e-9 * std::max(1.0, g);
      if (!found) throw ConfigError("batch frequency " + format_double(f) + " is not in the frequency list");
    }
  }
  try {
    penalty.validate();
    setup.pml.validate();
    setup.scheme.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  stopping.validate();
  if (!(lambda.fraction > 0.0)) throw ConfigError("lambda.fraction must be positive");
  if (!(setup.pml_velocity > 0.0) || !(setup.ricker_f0 > 0.0)) {
    throw ConfigError("pml.velocity and ricker.f0 must be positive");
  }
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) {
    throw ConfigError("snr_db must be finite or inf");
  }
  for (const auto* s : {&true_model, &initial_model}) {
    if (s->kind == "file" && !std::filesystem::exists(s->path)) throw ConfigError("model file not found: " + s->path);
  }
  if (!data_file.empty() && !std::filesystem::exists(data_file)) {
    throw ConfigError("data file not found: " + data_file);
  }
  if (!(background_velocity > 0.0) || !(box_velocity > 0.0) || !(gradient_bottom_velocity > 0.0)) {
    throw ConfigError("velocities must be positive");
  }
  if (!(smooth_corr_x >= 0.0) || !(smooth_corr_z >= 0.0)) throw ConfigError("smoothing lengths must be >= 0");
}

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  RunConfig cfg = default_run_config();
  bool batches_set = false;
  Index nx = cfg.grid.nx, nz = cfg.grid.nz;
  double dx = cfg.grid.dx, dz = cfg.grid.dz;
  std::optional<double> bmin, bmax;
  if (cfg.bounds) {
    bmin = cfg.bounds->v_min;
    bmax = cfg.bounds->v_max;
  }
  auto path_of = [&](const std::string& v) {
    std::filesystem::path p(v);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    return p.lexically_normal().string();
  };

  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"grid.nx", [&](auto& k, auto& v) { nx = to_int(k, v); }},
      {"grid.nz", [&](auto& k, auto& v) { nz = to_int(k, v); }},
      {"grid.dx", [&](auto& k, auto& v) { dx = to_double(k, v); }},
      {"grid.dz", [&](auto& k, auto& v) { dz = to_double(k, v); }},
      {"true_model", [&](auto&, auto& v) { cfg.true_model = model_source(v, base_dir); }},
      {"initial_model", [&](auto&, auto& v) { cfg.initial_model = model_source(v, base_dir); }},
      {"background.velocity", [&](auto& k, auto& v) { cfg.background_velocity = to_double(k, v); }},
      {"gradient.bottom_velocity", [&](auto& k, auto& v) { cfg.gradient_bottom_velocity = to_double(k, v); }},
      {"box.x0", [&](auto& k, auto& v) { cfg.box_x0 = to_double(k, v); }},
      {"box.z0", [&](auto& k, auto& v) { cfg.box_z0 = to_double(k, v); }},
      {"box.side", [&](auto& k, auto& v) { cfg.box_side = to_double(k, v); }},
      {"box.velocity", [&](auto& k, auto& v) { cfg.box_velocity = to_double(k, v); }},
      {"smooth.corr_x", [&](auto& k, auto& v) { cfg.smooth_corr_x = to_double(k, v); }},
      {"smooth.corr_z", [&](auto& k, auto& v) { cfg.smooth_corr_z = to_double(k, v); }},
      {"sources", [&](auto& k, auto& v) { cfg.geometry.sources = to_positions(k, v); }},
      {"receivers", [&](auto& k, auto& v) { cfg.geometry.receivers = to_positions(k, v); }},
      {"receivers.line", [&](auto& k, auto& v) { cfg.geometry.receivers = receiver_line(k, v); }},
      {"frequencies", [&](auto& k, auto& v) { cfg.frequencies = to_list(k, v); }},
      {"batches",
       [&](auto& k, auto& v) {
         cfg.plan.batches.clear();
         for (const auto& b : split(v, ';')) cfg.plan.batches.push_back(to_list(k, b));
         batches_set = true;
       }},
      {"paths",
       [&](auto& k, auto& v) {
         cfg.plan.paths.clear();
         for (const auto& p : split(v, ',')) {
           const long long i = to_int(k, p);
           if (i < 0) throw ConfigError(k + ": path start must be >= 0");
           cfg.plan.paths.push_back(static_cast<std::size_t>(i));
         }
       }},
      {"batch_k_max",
       [&](auto& k, auto& v) {
         cfg.plan.k_max.clear();
         for (const auto& p : split(v, ',')) cfg.plan.k_max.push_back(static_cast<int>(to_int(k, p)));
       }},
      {"data_file", [&](auto&, auto& v) { cfg.data_file = v == "none" ? "" : path_of(v); }},
      {"variant",
       [&](auto&, auto& v) {
         try {
           cfg.penalty.variant = parse_variant(v);
         } catch (const Error& e) {
           throw ConfigError(e.what());
         }
       }},
      {"alpha", [&](auto& k, auto& v) { cfg.penalty.alpha = to_double(k, v); }},
      {"inner_n", [&](auto& k, auto& v) { cfg.penalty.inner_iterations = static_cast<int>(to_int(k, v)); }},
      {"normal_solve",
       [&](auto& k, auto& v) {
         if (v == "lowrank") cfg.penalty.normal_solve = NormalSolve::kLowRank;
         else if (v == "normal") cfg.penalty.normal_solve = NormalSolve::kNormalMatrix;
         else throw ConfigError(k + ": expected lowrank or normal");
       }},
      {"bound_mode",
       [&](auto& k, auto& v) {
         if (v == "bregman") cfg.penalty.bound_mode = BoundMode::kSplitBregman;
         else if (v == "clip") cfg.penalty.bound_mode = BoundMode::kClip;
         else throw ConfigError(k + ": expected bregman or clip");
       }},
      {"bregman_weight", [&](auto& k, auto& v) { cfg.penalty.bregman_weight = to_double(k, v); }},
      {"regularization", [&](auto& k, auto& v) { cfg.penalty.regularization = to_double(k, v); }},
      {"lambda.fraction", [&](auto& k, auto& v) { cfg.lambda.fraction = to_double(k, v); }},
      {"lambda.fixed",
       [&](auto& k, auto& v) {
         cfg.lambda.fixed.clear();
         for (const auto& item : split(v, ',')) {
           const auto c = item.find(':');
           if (c == std::string::npos) throw ConfigError(k + ": expected 'freq:lambda' items");
           cfg.lambda.fixed[to_double(k, trim(item.substr(0, c)))] = to_double(k, trim(item.substr(c + 1)));
         }
       }},
      {"mu1.tol", [&](auto& k, auto& v) { cfg.lambda.mu1_tol = to_double(k, v); }},
      {"mu1.max_iterations", [&](auto& k, auto& v) { cfg.lambda.mu1_max_it = static_cast<int>(to_int(k, v)); }},
      {"mu1.seed", [&](auto& k, auto& v) { cfg.lambda.seed = static_cast<std::uint64_t>(to_int(k, v)); }},
      {"k_max", [&](auto& k, auto& v) { cfg.stopping.k_max = static_cast<int>(to_int(k, v)); }},
      {"delta", [&](auto& k, auto& v) { cfg.stopping.delta = to_double(k, v); }},
      {"delta_relative",
       [&](auto& k, auto& v) {
         if (v == "none") cfg.stopping.delta_relative.reset();
         else cfg.stopping.delta_relative = to_double(k, v);
       }},
      {"eps_n", [&](auto& k, auto& v) { cfg.stopping.eps_n = v == "dataset" ? std::vector<double>{} : to_list(k, v); }},
      {"bounds",
       [&](auto& k, auto& v) {
         if (v == "none") {
           bmin.reset();
           bmax.reset();
           return;
         }
         const auto parts = split(v, ' ');
         if (parts.size() != 2) throw ConfigError(k + ": expected 'v_min v_max' or none");
         bmin = to_double(k, parts[0]);
         bmax = to_double(k, parts[1]);
       }},
      {"pml.layers", [&](auto& k, auto& v) { cfg.setup.pml.n_layers = static_cast<int>(to_int(k, v)); }},
      {"pml.exponent", [&](auto& k, auto& v) { cfg.setup.pml.profile_exponent = to_double(k, v); }},
      {"pml.max_damping",
       [&](auto& k, auto& v) {
         if (v == "auto") cfg.setup.pml.max_damping.reset();
         else cfg.setup.pml.max_damping = to_double(k, v);
       }},
      {"pml.reflection", [&](auto& k, auto& v) { cfg.setup.pml.target_reflection = to_double(k, v); }},
      {"pml.top", [&](auto& k, auto& v) { cfg.setup.pml.top = to_bool(k, v); }},
      {"pml.bottom", [&](auto& k, auto& v) { cfg.setup.pml.bottom = to_bool(k, v); }},
      {"pml.left", [&](auto& k, auto& v) { cfg.setup.pml.left = to_bool(k, v); }},
      {"pml.right", [&](auto& k, auto& v) { cfg.setup.pml.right = to_bool(k, v); }},
      {"pml.velocity", [&](auto& k, auto& v) { cfg.setup.pml_velocity = to_double(k, v); }},
      {"scheme",
       [&](auto& k, auto& v) {
         if (v == "nine_point") cfg.setup.scheme = StencilScheme::nine_point();
         else if (v == "five_point") cfg.setup.scheme = StencilScheme::five_point();
         else if (v == "nine_point_lumped") cfg.setup.scheme = StencilScheme::nine_point_lumped();
         else throw ConfigError(k + ": expected nine_point, five_point or nine_point_lumped");
       }},
      {"scheme.laplacian_weight", [&](auto& k, auto& v) { cfg.setup.scheme.laplacian_weight = to_double(k, v); }},
      {"scheme.mass_center", [&](auto& k, auto& v) { cfg.setup.scheme.mass_center = to_double(k, v); }},
      {"scheme.mass_edge", [&](auto& k, auto& v) { cfg.setup.scheme.mass_edge = to_double(k, v); }},
      {"scheme.mass_corner", [&](auto& k, auto& v) { cfg.setup.scheme.mass_corner = to_double(k, v); }},
      {"ricker.f0", [&](auto& k, auto& v) { cfg.setup.ricker_f0 = to_double(k, v); }},
      {"snr_db", [&](auto& k, auto& v) { cfg.snr_db = to_double(k, v); }},
      {"seed", [&](auto& k, auto& v) { cfg.seed = static_cast<std::uint64_t>(to_int(k, v)); }},
      {"dual_reset", [&](auto& k, auto& v) { cfg.reset_duals = to_bool(k, v); }},
      {"record_timing", [&](auto& k, auto& v) { cfg.record_timing = to_bool(k, v); }},
      {"output_dir", [&](auto&, auto& v) { cfg.output_dir = path_of(v); }},
  };

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    try {
      it->second(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }

  try {
    cfg.grid = Grid2D(nx, nz, dx, dz);
    cfg.bounds.reset();
    if (bmin && bmax) cfg.bounds = Bounds(*bmin, *bmax);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!batches_set) cfg.plan.batches = {cfg.frequencies};
  try {
    cfg.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path);
  const auto base = std::filesystem::path(path).parent_path();
  RunConfig cfg = parse_config(read_file(path), base.empty() ? "." : base.string());
  cfg.source_path = path;
  return cfg;
}

std::vector<std::pair<std::string, std::string>> resolved_entries(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> e;
  auto d = [](double v) { return format_double(v); };
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  e.emplace_back("grid.nx", std::to_string(cfg.grid.nx));
  e.emplace_back("grid.nz", std::to_string(cfg.grid.nz));
  e.emplace_back("grid.dx", d(cfg.grid.dx));
  e.emplace_back("grid.dz", d(cfg.grid.dz));
  e.emplace_back("true_model", model_text(cfg.true_model));
  e.emplace_back("initial_model", model_text(cfg.initial_model));
  e.emplace_back("background.velocity", d(cfg.background_velocity));
  e.emplace_back("gradient.bottom_velocity", d(cfg.gradient_bottom_velocity));
  e.emplace_back("box.x0", d(cfg.box_x0));
  e.emplace_back("box.z0", d(cfg.box_z0));
  e.emplace_back("box.side", d(cfg.box_side));
  e.emplace_back("box.velocity", d(cfg.box_velocity));
  e.emplace_back("smooth.corr_x", d(cfg.smooth_corr_x));
  e.emplace_back("smooth.corr_z", d(cfg.smooth_corr_z));
  e.emplace_back("sources", positions_text(cfg.geometry.sources));
  e.emplace_back("receivers", positions_text(cfg.geometry.receivers));
  e.emplace_back("frequencies", list_text(cfg.frequencies));
  std::string batches;
  for (std::size_t i = 0; i < cfg.plan.batches.size(); ++i) batches += (i ? "; " : "") + list_text(cfg.plan.batches[i]);
  e.emplace_back("batches", batches);
  std::string paths;
  for (std::size_t i = 0; i < cfg.plan.paths.size(); ++i) paths += (i ? ", " : "") + std::to_string(cfg.plan.paths[i]);
  e.emplace_back("paths", paths);
  if (!cfg.plan.k_max.empty()) {
    std::string km;
    for (std::size_t i = 0; i < cfg.plan.k_max.size(); ++i) km += (i ? ", " : "") + std::to_string(cfg.plan.k_max[i]);
    e.emplace_back("batch_k_max", km);
  }
  e.emplace_back("data_file", cfg.data_file.empty() ? "none" : cfg.data_file);
  e.emplace_back("variant", to_string(cfg.penalty.variant));
  e.emplace_back("alpha", d(cfg.penalty.alpha));
  e.emplace_back("inner_n", std::to_string(cfg.penalty.inner_iterations));
  e.emplace_back("normal_solve", solve_name(cfg.penalty.normal_solve));
  e.emplace_back("bound_mode", bound_name(cfg.penalty.bound_mode));
  e.emplace_back("bregman_weight", d(cfg.penalty.bregman_weight));
  e.emplace_back("regularization", d(cfg.penalty.regularization));
  e.emplace_back("lambda.fraction", d(cfg.lambda.fraction));
  if (!cfg.lambda.fixed.empty()) {
    std::string fx;
    for (const auto& [f, l] : cfg.lambda.fixed) fx += (fx.empty() ? "" : ", ") + d(f) + ":" + d(l);
    e.emplace_back("lambda.fixed", fx);
  }
  e.emplace_back("mu1.tol", d(cfg.lambda.mu1_tol));
  e.emplace_back("mu1.max_iterations", std::to_string(cfg.lambda.mu1_max_it));
  e.emplace_back("mu1.seed", std::to_string(cfg.lambda.seed));
  e.emplace_back("k_max", std::to_string(cfg.stopping.k_max));
  e.emplace_back("delta", d(cfg.stopping.delta));
  e.emplace_back("delta_relative", cfg.stopping.delta_relative ? d(*cfg.stopping.delta_relative) : "none");
  e.emplace_back("eps_n", cfg.stopping.eps_n.empty() ? "dataset" : list_text(cfg.stopping.eps_n));
  e.emplace_back("bounds", cfg.bounds ? d(cfg.bounds->v_min) + " " + d(cfg.bounds->v_max) : "none");
  e.emplace_back("pml.layers", std::to_string(cfg.setup.pml.n_layers));
  e.emplace_back("pml.exponent", d(cfg.setup.pml.profile_exponent));
  e.emplace_back("pml.max_damping", cfg.setup.pml.max_damping ? d(*cfg.setup.pml.max_damping) : "auto");
  e.emplace_back("pml.reflection", d(cfg.setup.pml.target_reflection));
  e.emplace_back("pml.top", b(cfg.setup.pml.top));
  e.emplace_back("pml.bottom", b(cfg.setup.pml.bottom));
  e.emplace_back("pml.left", b(cfg.setup.pml.left));
  e.emplace_back("pml.right", b(cfg.setup.pml.right));
  e.emplace_back("pml.velocity", d(cfg.setup.pml_velocity));
  e.emplace_back("scheme.laplacian_weight", d(cfg.setup.scheme.laplacian_weight));
  e.emplace_back("scheme.mass_center", d(cfg.setup.scheme.mass_center));
  e.emplace_back("scheme.mass_edge", d(cfg.setup.scheme.mass_edge));
  e.emplace_back("scheme.mass_corner", d(cfg.setup.scheme.mass_corner));
  e.emplace_back("ricker.f0", d(cfg.setup.ricker_f0));
  e.emplace_back("snr_db", d(cfg.snr_db));
  e.emplace_back("seed", std::to_string(cfg.seed));
  e.emplace_back("dual_reset", b(cfg.reset_duals));
  e.emplace_back("record_timing", b(cfg.record_timing));
  e.emplace_back("output_dir", cfg.output_dir);
  return e;
}

std::string to_config_text(const RunConfig& cfg) {
  std::string s;
  for (const auto& [k, v] : resolved_entries(cfg)) s += k + " = " + v + "\n";
  return s;
}

namespace {

VelocityModel build_model(const RunConfig& cfg, const ModelSource& src, bool allow_smooth) {
  if (src.kind == "file") {
    VelocityModel m = read_model_file(src.path);
    if (!(m.grid == cfg.grid)) throw ConfigError("model file " + src.path + " does not match the configured grid");
    return m;
  }
  const VelocityModel bg = build_homogeneous(cfg.grid, cfg.background_velocity);
  if (src.kind == "homogeneous") return bg;
  if (src.kind == "box") return embed_box(bg, cfg.box_x0, cfg.box_z0, cfg.box_side, cfg.box_velocity);
  if (src.kind == "gradient") return build_linear_gradient(cfg.grid, cfg.background_velocity, cfg.gradient_bottom_velocity);
  if (src.kind == "smooth" && allow_smooth) {
    return gaussian_smooth(build_true_model(cfg), cfg.smooth_corr_x, cfg.smooth_corr_z);
  }
  throw ConfigError("model kind '" + src.kind + "' is not available here");
}

}  // namespace

VelocityModel build_true_model(const RunConfig& cfg) { return build_model(cfg, cfg.true_model, false); }
VelocityModel build_initial_model(const RunConfig& cfg) { return build_model(cfg, cfg.initial_model, true); }

}  // namespace iwri
