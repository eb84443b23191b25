#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pxlap/config.hpp"
#include "pxlap/csv.hpp"
#include "pxlap/exponent.hpp"
#include "pxlap/mesh.hpp"
#include "pxlap/operators.hpp"
#include "pxlap/radial.hpp"
#include "pxlap/solver.hpp"
#include "pxlap/spaces.hpp"
#include "pxlap/viscosity.hpp"

namespace pxlap {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes of the batch front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNonConvergence = 3,
  kExitAssertion = 4,
};

struct NonConvergence : Error {
  explicit NonConvergence(const std::string& msg) : Error(msg) {}
};

namespace runner {

struct Assertion {
  std::string name;
  bool pass = false;
  double value = 0.0;
};

struct RunContext {
  Config config;
  std::string command;
  unsigned long long seed = 1;
  std::vector<Assertion> assertions;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void check(const std::string& name, bool pass, double value = 0.0) {
    assertions.push_back({name, pass, value});
  }

  bool all_pass() const {
    for (const auto& a : assertions)
      if (!a.pass) return false;
    return true;
  }
};

inline unsigned long long resolve_seed(const Config& cfg) {
  if (const char* env = std::getenv("PXLAP_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError("PXLAP_SEED is not an unsigned integer");
    }
  }
  const long long s = cfg.has("experiment", "seed") ? cfg.get_int("experiment", "seed") : 1;
  if (s < 0) throw ConfigError("seed must be nonnegative");
  return static_cast<unsigned long long>(s);
}

inline MeshPtr mesh_from_config(const Config& cfg) {
  if (!cfg.has_section("mesh")) throw ConfigError("missing config section [mesh]");
  const int dim = static_cast<int>(cfg.get_int("mesh", "dimension"));
  const int resolution = static_cast<int>(cfg.get_int("mesh", "resolution"));
  std::vector<double> extent =
      cfg.has("mesh", "extent") ? cfg.get_list("mesh", "extent") : std::vector<double>{0.0, 1.0};
  Box box;
  if (dim == 1) {
    if (extent.size() != 2) throw ConfigError("[mesh] extent needs 2 values in 1D");
    box.lo = Vec(extent[0]);
    box.hi = Vec(extent[1]);
  } else if (dim == 2) {
    if (extent.size() == 2) {
      box.lo = Vec(extent[0], extent[0]);
      box.hi = Vec(extent[1], extent[1]);
    } else if (extent.size() == 4) {
      box.lo = Vec(extent[0], extent[1]);
      box.hi = Vec(extent[2], extent[3]);
    } else {
      throw ConfigError("[mesh] extent needs 2 or 4 values in 2D");
    }
  } else {
    throw ConfigError("[mesh] dimension must be 1 or 2");
  }
  try {
    return make_mesh(dim, box, resolution);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

inline std::vector<double> read_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open exponent table " + path);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find_last_of(',');
    const std::string field = comma == std::string::npos ? line : line.substr(comma + 1);
    try {
      values.push_back(std::stod(field));
    } catch (const std::exception&) {
      if (values.empty()) continue;  // header row
      throw ConfigError("exponent table " + path + ": bad value '" + field + "'");
    }
  }
  if (values.empty()) throw ConfigError("exponent table " + path + " holds no values");
  return values;
}

inline ExponentField exponent_from_config(const Config& cfg, const MeshPtr& mesh) {
  if (!cfg.has_section("exponent")) throw ConfigError("missing config section [exponent]");
  const std::string kind = cfg.get_string("exponent", "kind");
  try {
    if (kind == "constant") return ExponentField::constant(cfg.get_double("exponent", "p0"));
    if (kind == "affine") {
      Vec dir = Vec::zero(mesh->dim);
      dir[0] = 1.0;
      if (cfg.has("exponent", "direction")) {
        const auto d = cfg.get_list("exponent", "direction");
        if (static_cast<int>(d.size()) != mesh->dim)
          throw ConfigError("[exponent] direction must match the mesh dimension");
        for (int i = 0; i < mesh->dim; ++i) dir[i] = d[static_cast<std::size_t>(i)];
      }
      return ExponentField::affine(cfg.get_double("exponent", "p0"),
                                   cfg.get_double("exponent", "slope", 0.0), dir, mesh->extent);
    }
    if (kind == "radial") {
      double rmax = 0.0;
      for (const Vec& corner : {mesh->extent.lo, mesh->extent.hi})
        rmax = std::max(rmax, norm(corner));
      Vec mixed = mesh->extent.lo;
      if (mesh->dim == 2) {
        mixed[1] = mesh->extent.hi[1];
        rmax = std::max(rmax, norm(mixed));
        mixed = mesh->extent.hi;
        mixed[1] = mesh->extent.lo[1];
        rmax = std::max(rmax, norm(mixed));
      }
      return ExponentField::radial(cfg.get_double("exponent", "p0"),
                                   cfg.get_double("exponent", "slope", 0.0), rmax);
    }
    if (kind == "tabulated")
      return ExponentField::tabulated(mesh, read_table_csv(cfg.get_string("exponent", "table_path")));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("[exponent] kind must be constant, affine, radial, or tabulated");
}

// Boundary-data catalog: constant | linear | bump.
inline std::function<double(const Vec&)> boundary_from_config(const Config& cfg,
                                                              const MeshPtr& mesh) {
  const std::string kind = cfg.get_string("problem", "boundary", "linear");
  if (kind == "constant") {
    const double value = cfg.get_double("problem", "boundary_value", 0.0);
    return [value](const Vec&) { return value; };
  }
  if (kind == "linear") {
    const double offset = cfg.get_double("problem", "boundary_offset", 0.0);
    const double slope = cfg.get_double("problem", "boundary_slope", 1.0);
    return [offset, slope](const Vec& x) { return offset + slope * x[0]; };
  }
  if (kind == "bump") {
    const double amp = cfg.get_double("problem", "boundary_amp", 1.0);
    const double width =
        cfg.get_double("problem", "boundary_width", 0.25 * mesh->extent.diameter());
    Vec center = 0.5 * (mesh->extent.lo + mesh->extent.hi);
    return [amp, width, center](const Vec& x) {
      const Vec d = x - center;
      return amp * std::exp(-dot(d, d) / (width * width));
    };
  }
  throw ConfigError("[problem] boundary must be constant, linear, or bump");
}

inline void validate_tolerance(const Config& cfg) {
  for (const char* key : {"tol", "tolerance"})
    if (cfg.has("experiment", key) && !(cfg.get_double("experiment", key) > 0.0))
      throw ConfigError("tolerances must be positive");
}

inline double solver_tolerance(const Config& cfg, const Mesh& mesh) {
  const double fallback = default_tolerance(mesh);
  const double tol = cfg.get_double("experiment", "tol", fallback);
  if (!(tol > 0.0)) throw ConfigError("tolerances must be positive");
  return tol;
}

inline std::string point_field(const Vec& x) {
  std::string s = format_double(x[0]);
  for (int i = 1; i < x.n; ++i) s += ";" + format_double(x[i]);
  return s;
}

inline void write_manifest(const RunContext& ctx, const std::string& path) {
  nlohmann::json j;
  j["command"] = ctx.command;
  j["versions"] = {{"pxlap", kVersion}};
  j["seed"] = ctx.seed;
  nlohmann::json cfgj;
  for (const auto& [section, keys] : ctx.config.sections()) {
    nlohmann::json sj;
    for (const auto& [k, v] : keys) sj[k] = v;
    cfgj[section.empty() ? "(top)" : section] = sj;
  }
  j["config"] = cfgj;
  nlohmann::json asserts = nlohmann::json::array();
  for (const auto& a : ctx.assertions)
    asserts.push_back({{"name", a.name}, {"pass", a.pass}, {"value", a.value}});
  j["assertions"] = asserts;
  j["outputs"] = ctx.outputs;
  j["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
  write_file_atomic(path, j.dump(2) + "\n");
}

inline std::string output_path(const Config& cfg, const std::string& key,
                               const std::string& fallback) {
  return cfg.get_string("output", key, fallback);
}

inline std::string solution_csv(const GridFunction& u) {
  const Mesh& mesh = *u.mesh;
  Csv csv(mesh.dim == 1 ? std::initializer_list<std::string>{"node_id", "x", "u"}
                        : std::initializer_list<std::string>{"node_id", "x", "y", "u"});
  for (int i = 0; i < mesh.node_count(); ++i) {
    std::vector<std::string> row{std::to_string(i), format_double(mesh.nodes[i][0])};
    if (mesh.dim == 2) row.push_back(format_double(mesh.nodes[i][1]));
    row.push_back(format_double(u[i]));
    csv.row(row);
  }
  return csv.str();
}

// ---- commands -------------------------------------------------------

inline int cmd_solve(RunContext& ctx) {
  const MeshPtr mesh = mesh_from_config(ctx.config);
  const ExponentField p = exponent_from_config(ctx.config, mesh);
  const double rhs_c = ctx.config.get_double("problem", "rhs_c", 0.0);
  const auto g = boundary_from_config(ctx.config, mesh);
  const DirichletProblem problem = DirichletProblem::with_boundary(mesh, p, rhs_c, g);
  const double tol = solver_tolerance(ctx.config, *mesh);

  auto [u, report] = solve(problem, tol);
  const std::string out = output_path(ctx.config, "csv", "solve.csv");
  write_file_atomic(out, solution_csv(u));
  ctx.outputs.push_back(out);

  if (ctx.config.has("output", "nodes_csv")) {
    const std::string path = ctx.config.get_string("output", "nodes_csv");
    write_file_atomic(path, mesh->nodes_csv());
    ctx.outputs.push_back(path);
  }
  if (ctx.config.has("output", "elements_csv")) {
    const std::string path = ctx.config.get_string("output", "elements_csv");
    write_file_atomic(path, mesh->elements_csv());
    ctx.outputs.push_back(path);
  }

  nlohmann::json rj;
  rj["iterations"] = report.iterations;
  rj["final_residual_norm"] = report.final_residual_norm;
  rj["final_energy"] = report.final_energy;
  rj["converged"] = report.converged;
  rj["minimum_certified"] = report.minimum_certified;
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& [damping, res] : report.step_history)
    steps.push_back({{"damping", damping}, {"residual_norm", res}});
  rj["step_history"] = steps;
  const std::string report_path = output_path(ctx.config, "report", out + ".report.json");
  write_file_atomic(report_path, rj.dump(2) + "\n");
  ctx.outputs.push_back(report_path);

  ctx.check("converged", report.converged, report.final_residual_norm);
  double boundary_err = 0.0;
  for (std::size_t k = 0; k < problem.boundary_values.size(); ++k)
    boundary_err = std::max(
        boundary_err, std::abs(u[mesh->boundary_nodes[k]] - problem.boundary_values[k]));
  ctx.check("boundary_exact", boundary_err == 0.0, boundary_err);

  if (!report.converged) throw NonConvergence("solver did not reach the residual tolerance");
  return kExitOk;
}

inline int cmd_eps_sweep(RunContext& ctx) {
  const MeshPtr mesh = mesh_from_config(ctx.config);
  const ExponentField p = exponent_from_config(ctx.config, mesh);
  const auto g = boundary_from_config(ctx.config, mesh);
  const DirichletProblem base = DirichletProblem::with_boundary(mesh, p, 0.0, g);
  if (!ctx.config.has("experiment", "eps_list"))
    throw ConfigError("eps-sweep needs [experiment] eps_list");
  const std::vector<double> eps_list = ctx.config.get_list("experiment", "eps_list");
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    if (!(eps_list[k] >= 0.0)) throw ConfigError("eps_list entries must be positive");
    if (k > 0 && !(eps_list[k] < eps_list[k - 1]))
      throw ConfigError("eps_list must be strictly decreasing");
  }
  const double tol = solver_tolerance(ctx.config, *mesh);

  EpsilonFamily fam = [&] {
    try {
      return epsilon_family(base, eps_list, tol);
    } catch (const Error& e) {
      throw NonConvergence(e.what());
    }
  }();

  Csv csv({"eps", "sup_diff", "grad_modular_diff"});
  for (std::size_t k = 0; k < fam.entries.size(); ++k)
    csv.row({format_double(fam.entries[k].first), format_double(fam.sup_diffs[k]),
             format_double(fam.grad_modular_diffs[k])});
  const std::string out = output_path(ctx.config, "csv", "eps_sweep.csv");
  write_file_atomic(out, csv.str());
  ctx.outputs.push_back(out);

  ctx.check("sup_diff_strictly_decreasing", fam.sup_diff_decreasing);
  ctx.check("nodewise_monotone", fam.monotone, fam.worst_monotonicity_violation);
  ctx.check("grad_modular_rate", fam.rate_slope >= 0.5 * p.p_minus() - 0.2, fam.rate_slope);
  return ctx.all_pass() ? kExitOk : kExitAssertion;
}

inline int cmd_compare(RunContext& ctx) {
  const MeshPtr mesh = mesh_from_config(ctx.config);
  const ExponentField p = exponent_from_config(ctx.config, mesh);
  const auto g = boundary_from_config(ctx.config, mesh);
  const double c_low = ctx.config.get_double("problem", "rhs_c", 0.0);
  const double c_high = ctx.config.get_double("problem", "rhs_c2");
  if (!(c_low <= c_high)) throw ConfigError("compare expects rhs_c <= rhs_c2");
  const double tol = solver_tolerance(ctx.config, *mesh);

  auto [u, ru] = solve(DirichletProblem::with_boundary(mesh, p, c_low, g), tol);
  auto [v, rv] = solve(DirichletProblem::with_boundary(mesh, p, c_high, g), tol);
  if (!ru.converged || !rv.converged) throw NonConvergence("compare: a solve did not converge");

  const WeakComparisonReport weak = check_weak_comparison(u, v, p);
  const EndpointComparisonReport endpoint = comparison_theorem_check(u, v);

  Csv csv({"node_id", "u_low", "u_high", "diff"});
  for (int i = 0; i < mesh->node_count(); ++i)
    csv.row({std::to_string(i), format_double(u[i]), format_double(v[i]),
             format_double(v[i] - u[i])});
  const std::string out = output_path(ctx.config, "csv", "compare.csv");
  write_file_atomic(out, csv.str());
  ctx.outputs.push_back(out);

  ctx.check("premise_holds", weak.premise_holds, weak.worst_premise_gap);
  ctx.check("weak_ordering", weak.state == ComparisonState::ordered, weak.max_violation);
  ctx.check("endpoint_ordering", endpoint.state == EndpointComparison::ordered,
            endpoint.worst_interior_violation);
  return ctx.all_pass() ? kExitOk : kExitAssertion;
}

inline int cmd_viscosity_check(RunContext& ctx) {
  const MeshPtr mesh = mesh_from_config(ctx.config);
  const ExponentField p = exponent_from_config(ctx.config, mesh);
  const double rhs_c = ctx.config.get_double("problem", "rhs_c", 0.0);
  const auto g = boundary_from_config(ctx.config, mesh);
  const double tol = solver_tolerance(ctx.config, *mesh);

  auto [u, report] = solve(DirichletProblem::with_boundary(mesh, p, rhs_c, g), tol);
  if (!report.converged) throw NonConvergence("viscosity-check: solve did not converge");

  const int family_size =
      static_cast<int>(ctx.config.get_int("experiment", "family_size", 200));
  const auto family = quadratic_family(*mesh, family_size, ctx.seed);
  const ViscosityReport visc = viscosity_supersolution_test(u, p, rhs_c, family);

  Csv csv({"phi_id", "x0", "grad_norm", "op_value", "required", "violated"});
  for (const auto& rec : visc.records)
    csv.row({std::to_string(rec.phi_id), point_field(rec.point), format_double(rec.grad_norm),
             format_double(rec.op_value), format_double(rec.required),
             rec.violated ? "1" : "0"});
  const std::string out = output_path(ctx.config, "csv", "viscosity_check.csv");
  write_file_atomic(out, csv.str());
  ctx.outputs.push_back(out);

  ctx.check("zero_violations", visc.violations == 0, visc.violations);
  return ctx.all_pass() ? kExitOk : kExitAssertion;
}

inline int cmd_doubling(RunContext& ctx) {
  const MeshPtr mesh = mesh_from_config(ctx.config);
  const ExponentField p = exponent_from_config(ctx.config, mesh);
  const auto g = boundary_from_config(ctx.config, mesh);
  const double eps = ctx.config.get_double("experiment", "eps", 1e-2);
  if (!(eps > 0.0)) throw ConfigError("[experiment] eps must be positive");
  const double tol = solver_tolerance(ctx.config, *mesh);
  const bool normalized =
      ctx.config.get_string("experiment", "operator", "divergence") == "normalized";

  std::vector<double> j_list = ctx.config.has("experiment", "j_list")
                                   ? ctx.config.get_list("experiment", "j_list")
                                   : std::vector<double>{1e0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6};

  double q = 0.0, delta = 0.0;
  if (!normalized) {
    const std::string qs = ctx.config.get_string("experiment", "q", "auto");
    q = qs == "auto" ? admissible_q_min(p) + 0.5 : ctx.config.get_double("experiment", "q");
    if (!(q > admissible_q_min(p)))
      throw ConfigError("q must exceed max(2, p^-/(p^- - 1)) = " +
                        std::to_string(admissible_q_min(p)));
    const std::string ds = ctx.config.get_string("experiment", "delta", "auto");
    delta = ds == "auto" ? default_doubling_delta(p) : ctx.config.get_double("experiment", "delta");
    if (!(delta > 0.0) || !(1.0 - delta * (p.p_plus() - 1.0) > 0.0))
      throw ConfigError("delta must satisfy 0 < delta and 1 - delta (p^+ - 1) > 0");
  }

  auto [u, ru] = solve(DirichletProblem::with_boundary(mesh, p, 0.0, g), tol);
  auto [v, rv] = solve(DirichletProblem::with_boundary(mesh, p, eps, g), tol);
  if (!ru.converged || !rv.converged) throw NonConvergence("doubling: a solve did not converge");

  DoublingTrace trace;
  try {
    trace = normalized ? normalized_doubling_experiment(u, v, p, j_list)
                       : doubling_experiment(u, v, p, q, j_list, delta);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  Csv csv({"j", "xj", "yj", "gap", "wmax", "eta_norm", "decay", "op_at_x", "op_at_y"});
  for (const auto& row : trace.rows)
    csv.row({format_double(row.j), point_field(row.x), point_field(row.y),
             format_double(row.gap), format_double(row.w_max), format_double(row.eta_norm),
             format_double(row.decay), format_double(row.op_at_x), format_double(row.op_at_y)});
  const std::string out = output_path(ctx.config, "csv", "doubling.csv");
  write_file_atomic(out, csv.str());
  ctx.outputs.push_back(out);

  bool eta_ok = true;
  for (const auto& row : trace.rows)
    if (row.x_interior && row.gap == 0.0) eta_ok = false;
  bool decay_monotone_top = true;
  if (trace.rows.size() >= 2) {
    const std::size_t last = trace.rows.size() - 1;
    if (trace.rows[last].decay > trace.rows[last - 1].decay + 1e-12) decay_monotone_top = false;
  }
  ctx.check("no_interior_crossing", !trace.interior_crossing,
            trace.rows.empty() ? 0.0 : trace.rows.back().w_max);
  ctx.check("eta_nonzero_at_interior_maximizers", eta_ok);
  ctx.check("decay_nonincreasing_top_decade", decay_monotone_top);
  return ctx.all_pass() ? kExitOk : kExitAssertion;
}

inline int cmd_norms(RunContext& ctx) {
  const MeshPtr mesh = mesh_from_config(ctx.config);
  const ExponentField p = exponent_from_config(ctx.config, mesh);
  const auto g = boundary_from_config(ctx.config, mesh);
  GridFunction u = GridFunction::interpolate(mesh, g);

  const double mod = modular(u, p);
  const double mod_grad = modular(u, p, true);
  const double lux = luxemburg_norm(u, p);

  // Poincare quotient needs zero boundary values; the catalog function
  // is cut off at the boundary nodes for that row.
  GridFunction u0 = u;
  for (int b : mesh->boundary_nodes) u0[b] = 0.0;
  double poincare = std::numeric_limits<double>::quiet_NaN();
  bool poincare_defined = false;
  try {
    poincare = poincare_ratio(u0, p);
    poincare_defined = true;
  } catch (const Error&) {
  }

  Csv csv({"quantity", "value"});
  csv.row({"modular", format_double(mod)});
  csv.row({"modular_gradient", format_double(mod_grad)});
  csv.row({"luxemburg_norm", format_double(lux)});
  csv.row({"poincare_ratio", format_double(poincare)});
  const std::string out = output_path(ctx.config, "csv", "norms.csv");
  write_file_atomic(out, csv.str());
  ctx.outputs.push_back(out);

  if (lux > 0.0) {
    GridFunction scaled = u;
    for (double& v : scaled.values) v /= lux;
    const double unit = modular(scaled, p);
    ctx.check("unit_ball_property", std::abs(unit - 1.0) <= 1e-8, unit - 1.0);
  }
  if (poincare_defined) ctx.check("poincare_finite", std::isfinite(poincare), poincare);
  return ctx.all_pass() ? kExitOk : kExitAssertion;
}

}  // namespace runner

// Dispatch a config-driven command; returns a process exit code and
// writes the CSV artifacts plus a JSON manifest.
inline int run_command(const std::string& command, const Config& config,
                       std::string manifest_override = "") {
  runner::RunContext ctx;
  ctx.config = config;
  ctx.command = command;

  int code = kExitOk;
  std::string error;
  try {
    ctx.seed = runner::resolve_seed(config);
    runner::validate_tolerance(config);
    if (command == "solve") code = runner::cmd_solve(ctx);
    else if (command == "eps-sweep") code = runner::cmd_eps_sweep(ctx);
    else if (command == "compare") code = runner::cmd_compare(ctx);
    else if (command == "viscosity-check") code = runner::cmd_viscosity_check(ctx);
    else if (command == "doubling") code = runner::cmd_doubling(ctx);
    else if (command == "norms") code = runner::cmd_norms(ctx);
    else throw ConfigError("unknown command " + command);
  } catch (const ConfigError& e) {
    code = kExitConfig;
    error = e.what();
  } catch (const NonConvergence& e) {
    code = kExitNonConvergence;
    error = e.what();
  } catch (const Error& e) {
    code = kExitAssertion;
    error = e.what();
  }

  if (!error.empty()) std::cerr << "pxlap " << command << ": " << error << "\n";

  const std::string manifest_path =
      !manifest_override.empty()
          ? manifest_override
          : config.get_string("output", "manifest",
                              (ctx.outputs.empty() ? command : ctx.outputs.front()) +
                                  ".manifest.json");
  try {
    runner::write_manifest(ctx, manifest_path);
  } catch (const Error& e) {
    std::cerr << "pxlap " << command << ": manifest write failed: " << e.what() << "\n";
    if (code == kExitOk) code = kExitAssertion;
  }
  return code;
}

// ---- flag-driven commands (radial, rado, op) ------------------------

inline int run_radial(const std::string& variant_name, const std::string& out_path,
                      double p0 = 1.5, double slope = 0.3, int dim = 2) {
  RadialProfile profile;
  if (variant_name == "verbatim") profile.variant = RadialProfile::Variant::verbatim;
  else if (variant_name == "grouped") profile.variant = RadialProfile::Variant::grouped;
  else {
    std::cerr << "pxlap radial: variant must be verbatim or grouped\n";
    return kExitConfig;
  }
  profile.dim = dim;
  profile.p_of_r = [p0, slope](double r) { return p0 + slope * r; };
  if (!(p0 > 1.0)) {
    std::cerr << "pxlap radial: profile must keep p > 1\n";
    return kExitConfig;
  }

  std::vector<double> radii;
  for (int k = 0; k <= 40; ++k) radii.push_back(std::pow(10.0, -3.0 + 3.0 * k / 40.0));
  const RadialSamples samples = radial_example(profile, radii);
  Csv csv({"r", "v", "grad_modular_cum"});
  for (const auto& [r, v] : samples.rows) {
    double gm;
    try {
      gm = radial_gradient_modular(profile, r);
    } catch (const Error& e) {
      std::cerr << "pxlap radial: " << e.what() << " (partial results kept)\n";
      write_file_atomic(out_path, csv.str());
      return kExitNonConvergence;
    }
    csv.row({format_double(r), format_double(v), format_double(gm)});
  }
  write_file_atomic(out_path, csv.str());
  if (!samples.complete) {
    std::cerr << "pxlap radial: " << samples.error << " (partial results kept)\n";
    return kExitNonConvergence;
  }
  return kExitOk;
}

inline int run_rado(const std::string& case_name, std::ostream& os) {
  MeshPtr mesh;
  std::function<double(const Vec&)> candidate;
  ExponentField p = ExponentField::affine(2.0, 0.25, Vec(1.0), Box{Vec(-1.0), Vec(1.0)});
  if (case_name == "linear1d") {
    mesh = make_mesh(1, Box{Vec(-1.0), Vec(1.0)}, 65);
    candidate = [](const Vec& x) { return x[0]; };
  } else if (case_name == "linear2d") {
    Box box;
    box.lo = Vec(-1.0, -1.0);
    box.hi = Vec(1.0, 1.0);
    mesh = make_mesh(2, box, 17);
    p = ExponentField::affine(2.0, 0.25, Vec(1.0, 0.0), box);
    candidate = [](const Vec& x) { return x[0]; };
  } else if (case_name == "abs") {
    mesh = make_mesh(1, Box{Vec(-1.0), Vec(1.0)}, 65);
    candidate = [](const Vec& x) { return std::abs(x[0]); };
  } else {
    std::cerr << "pxlap rado: case must be linear1d, linear2d, or abs\n";
    return kExitConfig;
  }

  const double tol = default_tolerance(*mesh);
  nlohmann::json j;
  j["case"] = case_name;
  j["tol"] = tol;
  try {
    const RadoReport rep = rado_experiment(mesh, candidate, p, tol);
    j["off_zero_residual"] = rep.off_zero_residual;
    j["full_residual"] = rep.full_residual;
    j["removable"] = rep.removable;
    j["straddling_count"] = rep.straddling_count;
    j["worst_straddling_node"] = rep.worst_straddling_node;
    j["worst_straddling_residual"] = rep.worst_straddling_residual;
  } catch (const Error& e) {
    j["error"] = e.what();
    os << j.dump(2) << "\n";
    return kExitAssertion;
  }
  os << j.dump(2) << "\n";
  return kExitOk;
}

namespace runner {

// "key=v1,v2;key=v" field parser for the op command.
inline std::map<std::string, std::vector<double>> parse_semicolon_fields(const std::string& spec) {
  std::map<std::string, std::vector<double>> fields;
  std::istringstream in(spec);
  std::string part;
  while (std::getline(in, part, ';')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value in '" + part + "'");
    const std::string key = part.substr(0, eq);
    std::vector<double> vals;
    std::istringstream vin(part.substr(eq + 1));
    std::string tok;
    while (std::getline(vin, tok, ',')) {
      try {
        vals.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ConfigError("bad number '" + tok + "' in '" + part + "'");
      }
    }
    fields[key] = vals;
  }
  return fields;
}

}  // namespace runner

namespace runner {

inline std::map<std::string, std::string> parse_semicolon_strings(const std::string& spec) {
  std::map<std::string, std::string> fields;
  std::istringstream in(spec);
  std::string part;
  while (std::getline(in, part, ';')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value in '" + part + "'");
    fields[part.substr(0, eq)] = part.substr(eq + 1);
  }
  return fields;
}

}  // namespace runner

// Pointwise operator evaluation: prints value and branch as JSON.
inline int run_op(const std::string& jet_spec, const std::string& exponent_spec,
                  const std::string& form, std::ostream& os) {
  try {
    const auto jf = runner::parse_semicolon_fields(jet_spec);
    const auto es = runner::parse_semicolon_strings(exponent_spec);

    const auto need = [&jf](const std::string& k) {
      const auto it = jf.find(k);
      if (it == jf.end()) throw ConfigError("--jet is missing field " + k);
      return it->second;
    };
    const std::vector<double> xs = need("x");
    const int dim = static_cast<int>(xs.size());
    if (dim < 1 || dim > 3) throw ConfigError("--jet x must have 1..3 coordinates");
    Vec x = Vec::zero(dim);
    for (int i = 0; i < dim; ++i) x[i] = xs[static_cast<std::size_t>(i)];
    const std::vector<double> xiv = need("xi");
    if (static_cast<int>(xiv.size()) != dim) throw ConfigError("--jet xi dimension mismatch");
    Vec xi = Vec::zero(dim);
    for (int i = 0; i < dim; ++i) xi[i] = xiv[static_cast<std::size_t>(i)];
    const double value = need("value").at(0);
    const std::vector<double> Xv = need("X");
    if (static_cast<int>(Xv.size()) != dim * dim)
      throw ConfigError("--jet X must have dim*dim row-major entries");
    const Jet2 jet = Jet2::from_hessian_entries(x, value, xi, Xv.data());

    // bounds are certified on a unit neighborhood of the evaluation point
    Box domain;
    domain.lo = Vec::zero(dim);
    domain.hi = Vec::zero(dim);
    for (int i = 0; i < dim; ++i) {
      domain.lo[i] = x[i] - 1.0;
      domain.hi[i] = x[i] + 1.0;
    }
    const auto eget = [&es](const std::string& k, double fb) {
      const auto it = es.find(k);
      if (it == es.end()) return fb;
      try {
        return std::stod(it->second);
      } catch (const std::exception&) {
        throw ConfigError("--exponent field " + k + " is not a number");
      }
    };
    const std::string kind = es.count("kind") ? es.at("kind") : "constant";
    ExponentField p = ExponentField::constant(2.0);
    if (kind == "constant") {
      p = ExponentField::constant(eget("p0", 2.0));
    } else if (kind == "affine") {
      Vec dir = Vec::zero(dim);
      dir[0] = 1.0;
      if (es.count("direction")) {
        std::istringstream din(es.at("direction"));
        std::string tok;
        int i = 0;
        while (std::getline(din, tok, ',')) {
          if (i >= dim) throw ConfigError("--exponent direction dimension mismatch");
          dir[i++] = std::stod(tok);
        }
        if (i != dim) throw ConfigError("--exponent direction dimension mismatch");
      }
      p = ExponentField::affine(eget("p0", 2.0), eget("slope", 0.0), dir, domain);
    } else if (kind == "radial") {
      p = ExponentField::radial(eget("p0", 2.0), eget("slope", 0.0), norm(x) + 1.0);
    } else {
      throw ConfigError("--exponent kind must be constant, affine, or radial");
    }

    OperatorValue out;
    if (form == "normalized") out = normalized_pxlap(jet, p);
    else if (form == "divergence") out = divergence_form(jet, p);
    else throw ConfigError("--form must be divergence or normalized");

    nlohmann::json j;
    j["value"] = out.value;
    j["branch"] = branch_name(out.branch);
    os << j.dump(2) << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "pxlap op: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "pxlap op: " << e.what() << "\n";
    return kExitAssertion;
  }
}

}  // namespace pxlap
