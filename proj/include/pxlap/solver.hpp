#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "pxlap/assemble.hpp"
#include "pxlap/exponent.hpp"
#include "pxlap/mesh.hpp"
#include "pxlap/spaces.hpp"

namespace pxlap {

// Dirichlet problem -div(|Du|^{p(x)-2} Du) = c with nodal boundary data.
struct DirichletProblem {
  MeshPtr mesh;
  ExponentField p;
  double rhs_c = 0.0;
  std::vector<double> boundary_values;  // aligned with mesh->boundary_nodes

  DirichletProblem(MeshPtr m, ExponentField exponent, double c, std::vector<double> bdata)
      : mesh(std::move(m)), p(std::move(exponent)), rhs_c(c), boundary_values(std::move(bdata)) {
    if (boundary_values.size() != mesh->boundary_nodes.size())
      throw Error("DirichletProblem: boundary data must match the boundary node set");
  }

  template <class G>
  static DirichletProblem with_boundary(MeshPtr m, ExponentField exponent, double c, G&& g) {
    std::vector<double> bd;
    bd.reserve(m->boundary_nodes.size());
    for (int b : m->boundary_nodes) bd.push_back(g(m->nodes[static_cast<std::size_t>(b)]));
    return DirichletProblem(std::move(m), std::move(exponent), c, std::move(bd));
  }

  void apply_boundary(GridFunction& u) const {
    for (std::size_t k = 0; k < boundary_values.size(); ++k)
      u[mesh->boundary_nodes[k]] = boundary_values[k];
  }
};

struct SolveReport {
  int iterations = 0;
  double final_residual_norm = 0.0;
  double final_energy = 0.0;
  std::vector<std::pair<double, double>> step_history;  // (damping, residual norm)
  bool converged = false;
  bool minimum_certified = false;
  int gradient_fallbacks = 0;
};

inline double default_tolerance(const Mesh& mesh) { return mesh.dim == 1 ? 1e-10 : 1e-8; }

namespace detail {

// Newton direction with an escalating diagonal shift when the Hessian
// is not positive definite; empty on total failure.
inline std::vector<double> newton_direction(const AssembledSystem& sys) {
  double diag_scale = 0.0;
  for (int i = 0; i < sys.hessian.size(); ++i)
    diag_scale = std::max(diag_scale, std::abs(sys.hessian.get(i, i)));
  if (diag_scale == 0.0) diag_scale = 1.0;

  for (double mu = 0.0; mu <= 1e3 * diag_scale;
       mu = (mu == 0.0 ? 1e-12 * diag_scale : 10.0 * mu)) {
    BandedSym h = sys.hessian;
    if (mu > 0.0) h.shift_diagonal(mu);
    if (!h.cholesky()) continue;
    std::vector<double> rhs = sys.residual;
    for (double& r : rhs) r = -r;
    return h.solve(std::move(rhs));
  }
  return {};
}

inline GridFunction harmonic_extension(const DirichletProblem& problem) {
  GridFunction u(problem.mesh,
                 std::vector<double>(static_cast<std::size_t>(problem.mesh->node_count()), 0.0));
  problem.apply_boundary(u);
  const ExponentField p2 = ExponentField::constant(2.0);
  const AssembledSystem sys = assemble(u, p2, 0.0, 0.0);
  const std::vector<double> d = newton_direction(sys);
  if (!d.empty())
    for (std::size_t k = 0; k < sys.free_nodes.size(); ++k)
      u[sys.free_nodes[k]] += d[k];
  return u;
}

}  // namespace detail

// Damped Newton on the discrete energy. Boundary data is interpolated
// exactly; the default initial guess is the harmonic extension, which
// keeps the early iterates away from the Du = 0 singular set.
inline std::pair<GridFunction, SolveReport> solve_from(const DirichletProblem& problem,
                                                       GridFunction u, double tol,
                                                       int max_iter = 200,
                                                       double reg_floor = 1e-12) {
  if (!(tol > 0.0)) throw Error("solve: tolerance must be positive");
  if (u.mesh != problem.mesh) throw Error("solve: initial guess lives on a different mesh");
  problem.apply_boundary(u);
  SolveReport report;

  const double armijo_c = 1e-4;
  double energy = energy_only(u, problem.p, problem.rhs_c);

  for (int iter = 0; iter < max_iter; ++iter) {
    AssembledSystem sys = assemble(u, problem.p, problem.rhs_c, reg_floor);
    const double res_norm = sys.residual_max_norm();
    report.final_residual_norm = res_norm;
    report.final_energy = sys.energy;
    if (res_norm <= tol) {
      report.converged = true;
      break;
    }
    report.iterations = iter + 1;

    std::vector<double> dir = detail::newton_direction(sys);
    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      if (attempt == 1 || dir.empty()) {
        // gradient fallback
        dir = sys.residual;
        for (double& d : dir) d = -d;
        ++report.gradient_fallbacks;
      }
      double slope = 0.0;
      for (std::size_t k = 0; k < dir.size(); ++k)
        slope += sys.residual[k] * dir[k];
      if (slope >= 0.0) continue;

      double t = 1.0;
      const int max_halvings = attempt == 0 ? 30 : 60;
      // once the predicted decrease sinks below the energy's roundoff,
      // sufficient decrease is unobservable; allow that slack
      const double roundoff = 1e-14 * (1.0 + std::abs(energy));
      for (int h = 0; h <= max_halvings; ++h, t *= 0.5) {
        GridFunction trial = u;
        for (std::size_t k = 0; k < sys.free_nodes.size(); ++k)
          trial[sys.free_nodes[k]] += t * dir[k];
        double trial_energy;
        try {
          trial_energy = energy_only(trial, problem.p, problem.rhs_c);
        } catch (const Error&) {
          continue;  // overflowed trial step, keep halving
        }
        if (trial_energy <= energy + armijo_c * t * slope + roundoff) {
          u = std::move(trial);
          energy = trial_energy;
          report.step_history.emplace_back(t, res_norm);
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) break;  // reported as non-convergence with full history
  }

  // local-minimum certificate: random perturbation probes
  if (report.converged) {
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const auto [free_nodes, free_index] = detail::free_node_map(*problem.mesh);
    (void)free_index;
    bool certified = true;
    for (int probe = 0; probe < 20 && certified; ++probe) {
      GridFunction trial = u;
      double amax = 0.0;
      std::vector<double> delta(free_nodes.size());
      for (double& d : delta) {
        d = unit(rng);
        amax = std::max(amax, std::abs(d));
      }
      for (std::size_t k = 0; k < free_nodes.size(); ++k)
        trial[free_nodes[k]] += 1e-4 * delta[k] / amax;
      if (energy_only(trial, problem.p, problem.rhs_c) < energy - 1e-9) certified = false;
    }
    report.minimum_certified = certified;
    report.converged = certified;
  }

  return {std::move(u), std::move(report)};
}

inline std::pair<GridFunction, SolveReport> solve(const DirichletProblem& problem, double tol,
                                                  int max_iter = 200, double reg_floor = 1e-12) {
  return solve_from(problem, detail::harmonic_extension(problem), tol, max_iter, reg_floor);
}

inline std::pair<GridFunction, SolveReport> solve(const DirichletProblem& problem) {
  return solve(problem, default_tolerance(*problem.mesh));
}

struct EpsilonFamily {
  std::vector<std::pair<double, GridFunction>> entries;
  GridFunction base;  // the c = 0 solution with the same boundary data
  std::vector<double> sup_diffs;            // sup |u_eps - u| per entry
  std::vector<double> grad_modular_diffs;   // modular of D(u - u_eps) per entry
  bool monotone = true;                     // u_{eps1} >= u_{eps2} - 1e-8 for eps1 >= eps2
  double worst_monotonicity_violation = 0.0;
  bool sup_diff_decreasing = true;
  double rate_slope = 0.0;                  // log-log slope of grad modular vs eps
};

// Solutions of -div(|Du|^{p(x)-2} Du) = eps over a strictly decreasing
// positive eps list, with the same boundary data as the base problem.
inline EpsilonFamily epsilon_family(const DirichletProblem& base_problem,
                                    const std::vector<double>& eps_list,
                                    double tol = 0.0) {
  if (eps_list.empty()) throw Error("epsilon_family: empty eps list");
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    if (!(eps_list[k] >= 0.0)) throw Error("epsilon_family: eps must be positive");
    if (k > 0 && !(eps_list[k] < eps_list[k - 1]))
      throw Error("epsilon_family: eps list must be strictly decreasing");
  }
  const double use_tol = tol > 0.0 ? tol : default_tolerance(*base_problem.mesh);

  DirichletProblem base = base_problem;
  base.rhs_c = 0.0;
  auto [u0, rep0] = solve(base, use_tol);
  if (!rep0.converged) throw Error("epsilon_family: base solve did not converge");

  EpsilonFamily fam{.entries = {},
                    .base = u0,
                    .sup_diffs = {},
                    .grad_modular_diffs = {},
                    .monotone = true,
                    .worst_monotonicity_violation = 0.0,
                    .sup_diff_decreasing = true,
                    .rate_slope = 0.0};
  for (double eps : eps_list) {
    DirichletProblem pe = base_problem;
    pe.rhs_c = eps;
    auto [ue, repe] = solve(pe, use_tol);
    if (!repe.converged) throw Error("epsilon_family: solve did not converge for eps");
    fam.entries.emplace_back(eps, std::move(ue));
  }

  for (std::size_t k = 0; k < fam.entries.size(); ++k) {
    const GridFunction& ue = fam.entries[k].second;
    double sup = 0.0;
    for (int i = 0; i < u0.mesh->node_count(); ++i) sup = std::max(sup, std::abs(ue[i] - u0[i]));
    fam.sup_diffs.push_back(sup);
    std::vector<double> diff(ue.values.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = u0.values[i] - ue.values[i];
    fam.grad_modular_diffs.push_back(
        modular(GridFunction(u0.mesh, std::move(diff)), base_problem.p, /*of_gradient=*/true));

    if (k > 0) {
      fam.sup_diff_decreasing =
          fam.sup_diff_decreasing && fam.sup_diffs[k] < fam.sup_diffs[k - 1];
      const GridFunction& prev = fam.entries[k - 1].second;
      for (int i = 0; i < u0.mesh->node_count(); ++i) {
        const double viol = ue[i] - prev[i];  // positive means ordering violated
        if (viol > fam.worst_monotonicity_violation) fam.worst_monotonicity_violation = viol;
      }
    }
  }
  fam.monotone = fam.worst_monotonicity_violation <= 1e-8;

  // least-squares slope of log(grad modular) against log(eps)
  int m = 0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < fam.entries.size(); ++k) {
    if (!(fam.grad_modular_diffs[k] > 0.0) || !(fam.entries[k].first > 0.0)) continue;
    const double lx = std::log(fam.entries[k].first);
    const double ly = std::log(fam.grad_modular_diffs[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m >= 2) fam.rate_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);

  return fam;
}

enum class ComparisonState { ordered, interior_violation, premise_not_satisfied };

struct WeakComparisonReport {
  ComparisonState state = ComparisonState::ordered;
  bool premise_holds = false;      // flux pairing of u <= that of v on every hat
  double worst_premise_gap = 0.0;  // max over hats of (pairing(u) - pairing(v))
  double max_violation = 0.0;      // max over nodes of u - v
  int worst_node = -1;
};

// Discrete weak comparison: if the flux pairing of u is dominated by
// that of v on every nonnegative hat function and (u - v)+ vanishes on
// the boundary, then u <= v nodewise.
inline WeakComparisonReport check_weak_comparison(const GridFunction& u, const GridFunction& v,
                                                  const ExponentField& p) {
  if (u.mesh != v.mesh) throw Error("check_weak_comparison: different meshes");
  const Mesh& mesh = *u.mesh;
  for (int b : mesh.boundary_nodes)
    if (u[b] > v[b] + 1e-10)
      throw Error("check_weak_comparison: (u - v)+ does not vanish on the boundary");

  const AssembledSystem su = assemble(u, p, 0.0);
  const AssembledSystem sv = assemble(v, p, 0.0);

  WeakComparisonReport rep;
  for (std::size_t k = 0; k < su.residual.size(); ++k)
    rep.worst_premise_gap = std::max(rep.worst_premise_gap, su.residual[k] - sv.residual[k]);
  rep.premise_holds = rep.worst_premise_gap <= 1e-9;

  if (!rep.premise_holds) {
    rep.state = ComparisonState::premise_not_satisfied;
    return rep;
  }
  for (int i = 0; i < mesh.node_count(); ++i) {
    const double viol = u[i] - v[i];
    if (viol > rep.max_violation) {
      rep.max_violation = viol;
      rep.worst_node = i;
    }
  }
  rep.state = rep.max_violation <= 1e-8 ? ComparisonState::ordered
                                        : ComparisonState::interior_violation;
  return rep;
}

}  // namespace pxlap
