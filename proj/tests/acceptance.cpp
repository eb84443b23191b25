// Acceptance suite: runs every toolkit-level criterion at its stated
// tolerance and prints one pass/fail line per criterion. Exit status is
// the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "pxlap/radial.hpp"
#include "pxlap/solver.hpp"
#include "pxlap/viscosity.hpp"

using namespace pxlap;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] %02d %-28s %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  if (!pass) ++g_failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const auto kRamp = [](const Vec& x) { return x[0]; };

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

// 1. constant-flux exactness across the exponent catalog
void criterion_flux_constancy() {
  MeshPtr mesh = make_mesh(1, Box::unit(1), 65);
  std::vector<double> table;
  for (const Vec& x : mesh->nodes) table.push_back(2.0 + 0.3 * std::sin(2.0 * M_PI * x[0]));
  const std::vector<std::pair<std::string, ExponentField>> catalog{
      {"constant 1.5", ExponentField::constant(1.5)},
      {"constant 3", ExponentField::constant(3.0)},
      {"affine 2+0.5x", ExponentField::affine(2.0, 0.5, Vec(1.0), mesh->extent)},
      {"radial 1.5+0.3r", ExponentField::radial(1.5, 0.3, 1.0)},
      {"tabulated", ExponentField::tabulated(mesh, table)},
  };
  bool pass = true;
  double worst = 0.0, slowest = 0.0;
  for (const auto& [name, p] : catalog) {
    const auto t0 = std::chrono::steady_clock::now();
    auto [u, rep] = solve(DirichletProblem::with_boundary(mesh, p, 0.0, kRamp), 1e-10);
    const double dt = seconds_since(t0);
    slowest = std::max(slowest, dt);
    double err = 0.0;
    for (int i = 0; i < mesh->node_count(); ++i)
      err = std::max(err, std::abs(u[i] - mesh->nodes[i][0]));
    worst = std::max(worst, err);
    pass = pass && rep.converged && err <= 1e-8 && dt < 1.0;
  }
  report(1, "flux-constancy", pass,
         fmt("max nodewise error %.2e (<= 1e-8), slowest solve %.2f s (< 1 s)", worst, slowest));
}

// 2. epsilon-convergence of the perturbed problems
void criterion_eps_convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  MeshPtr mesh = make_mesh(1, Box::unit(1), 65);
  const ExponentField p2 = ExponentField::constant(2.0);
  const EpsilonFamily fam = epsilon_family(
      DirichletProblem::with_boundary(mesh, p2, 0.0, kRamp), {1e-1, 1e-2, 1e-3, 1e-4}, 1e-12);
  const double h = 1.0 / 64.0;
  double worst_dev = 0.0;
  for (std::size_t k = 0; k < fam.entries.size(); ++k)
    worst_dev =
        std::max(worst_dev, std::abs(fam.sup_diffs[k] - fam.entries[k].first / 8.0));
  const double dt = seconds_since(t0);
  const bool pass = fam.sup_diff_decreasing && worst_dev <= 3.0 * h * h && fam.monotone &&
                    dt < 10.0;
  report(2, "eps-convergence", pass,
         fmt("sup|u_eps-u| vs eps/8 dev %.2e (<= %.2e), monotone, %.2f s", worst_dev,
             3.0 * h * h, dt));
}

// 3. weak comparison over randomized ordered pairs
void criterion_weak_comparison() {
  std::mt19937_64 rng(20240);
  std::uniform_real_distribution<double> cdist(-0.4, 0.4);
  std::uniform_int_distribution<int> field_pick(0, 3);
  std::uniform_int_distribution<int> bdy_pick(0, 2);
  MeshPtr mesh = make_mesh(1, Box::unit(1), 33);
  const ExponentField catalog[] = {
      ExponentField::constant(1.5), ExponentField::constant(3.0),
      ExponentField::affine(2.0, 0.5, Vec(1.0), mesh->extent),
      ExponentField::radial(1.5, 0.3, 1.0)};
  double worst = 0.0;
  bool all_converged = true;
  for (int trial = 0; trial < 50; ++trial) {
    const ExponentField& p = catalog[field_pick(rng)];
    double c1 = cdist(rng), c2 = cdist(rng);
    if (c1 > c2) std::swap(c1, c2);
    const int which = bdy_pick(rng);
    const double shift = cdist(rng);
    const auto boundary = [which, shift](const Vec& x) {
      if (which == 0) return shift;
      if (which == 1) return x[0] + shift;
      return std::exp(-8.0 * (x[0] - 0.5) * (x[0] - 0.5));
    };
    auto [u, ru] = solve(DirichletProblem::with_boundary(mesh, p, c1, boundary), 1e-11);
    auto [v, rv] = solve(DirichletProblem::with_boundary(mesh, p, c2, boundary), 1e-11);
    all_converged = all_converged && ru.converged && rv.converged;
    for (int i = 0; i < mesh->node_count(); ++i) worst = std::max(worst, u[i] - v[i]);
  }
  report(3, "weak-comparison", all_converged && worst <= 1e-8,
         fmt("50 ordered pairs, worst ordering violation %.2e (<= 1e-8)", worst));
}

// 4. operator-form equivalence and flux-divergence consistency
void criterion_operator_forms() {
  std::mt19937_64 rng(577);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> logmag(std::log(1e-3), std::log(1e3));
  std::uniform_real_distribution<double> entry(-3.0, 3.0);
  std::uniform_real_distribution<double> pconst(1.1, 4.0);
  const ExponentField affine = ExponentField::affine(
      2.0, 0.25, Vec(1.0, 0.0), Box{Vec(-2.5, -2.5), Vec(2.5, 2.5)});
  double worst_rel = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec x(coord(rng), coord(rng));
    const double ang = coord(rng);
    const Vec xi = std::exp(logmag(rng)) * Vec(std::cos(ang), std::sin(ang));
    SymMat X = SymMat::zero(2);
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j) X.at(i, j) = X.at(j, i) = entry(rng);
    const ExponentField p =
        trial % 2 == 0 ? ExponentField::constant(pconst(rng)) : affine;
    const Jet2 jet(x, 0.0, xi, X);
    const double f = jet_form_F(jet, p);
    const double ex = pxlap_expanded(jet, p);
    worst_rel = std::max(worst_rel, std::abs(f - ex) / (1.0 + std::abs(f)));
  }

  const auto grad_phi = [](const Vec& x) {
    return Vec(std::cos(x[0]) + 0.25 * x[1], -std::sin(x[1]) + 0.25 * x[0]);
  };
  const auto hess_phi = [](const Vec& x) {
    SymMat h = SymMat::zero(2);
    h.at(0, 0) = -std::sin(x[0]);
    h.at(1, 1) = -std::cos(x[1]);
    h.at(0, 1) = h.at(1, 0) = 0.25;
    return h;
  };
  const Vec x0(0.3, 0.4);
  const auto fd_div = [&](double h) {
    double div = 0.0;
    for (int k = 0; k < 2; ++k) {
      Vec xp = x0, xm = x0;
      xp[k] += h;
      xm[k] -= h;
      div += (flux(xp, grad_phi(xp), affine)[k] - flux(xm, grad_phi(xm), affine)[k]) / (2.0 * h);
    }
    return div;
  };
  const double exact = pxlap_expanded(Jet2(x0, 0.0, grad_phi(x0), hess_phi(x0)), affine);
  const double e1 = std::abs(fd_div(1e-2) - exact);
  const double e2 = std::abs(fd_div(5e-3) - exact);
  const double order = std::log(e1 / e2) / std::log(2.0);

  report(4, "operator-form-equivalence", worst_rel <= 1e-10 && order >= 1.9,
         fmt("1000 jets, worst rel gap %.2e (<= 1e-10), FD order %.2f (>= 1.9)", worst_rel,
             order));
}

// 5. vector monotonicity inequalities
void criterion_vector_inequalities() {
  std::mt19937_64 rng(733);
  std::uniform_real_distribution<double> entry(-3.0, 3.0);
  std::uniform_real_distribution<double> pconst(1.1, 4.5);
  int violations = 0, nonstrict = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const Vec xi(entry(rng), entry(rng));
    const Vec eta(entry(rng), entry(rng));
    const ExponentField p = ExponentField::constant(pconst(rng));
    try {
      const MonoGap g = mono_gap(Vec(0.0, 0.0), xi, eta, p);
      if (g.lhs < g.bound - 1e-12 * (1.0 + std::abs(g.lhs))) ++violations;
      if (norm(xi - eta) > 0.0 && !(g.lhs > 0.0)) ++nonstrict;
    } catch (const Error&) {
      ++violations;
    }
  }
  report(5, "vector-inequalities", violations == 0 && nonstrict == 0,
         fmt("10000 triples, %g bound violations, %g strictness failures", violations,
             nonstrict));
}

// 6. Luxemburg norm unit-ball property
void criterion_luxemburg() {
  std::mt19937_64 rng(97);
  MeshPtr mesh = make_mesh(1, Box::unit(1), 33);
  const ExponentField fields[] = {
      ExponentField::constant(1.7), ExponentField::constant(3.0),
      ExponentField::affine(2.0, 1.0, Vec(1.0), Box::unit(1))};
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  double worst_unit = 0.0, worst_homog = 0.0;
  int sandwich_violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const ExponentField& p = fields[trial % 3];
    std::vector<double> vals(static_cast<std::size_t>(mesh->node_count()));
    for (double& v : vals) v = dist(rng);
    const GridFunction u(mesh, vals);
    const double lam = luxemburg_norm(u, p);
    if (lam == 0.0) continue;
    GridFunction scaled = u;
    for (double& v : scaled.values) v /= lam;
    worst_unit = std::max(worst_unit, std::abs(modular(scaled, p) - 1.0));
    const double rho = modular(u, p);
    const double lo = std::min(std::pow(lam, p.p_plus()), std::pow(lam, p.p_minus()));
    const double hi = std::max(std::pow(lam, p.p_plus()), std::pow(lam, p.p_minus()));
    if (rho < lo - 1e-9 * (1.0 + lo) || rho > hi + 1e-9 * (1.0 + hi)) ++sandwich_violations;
    if (trial % 100 == 0) {
      for (double t : {0.5, 2.0, -3.0}) {
        GridFunction tu = u;
        for (double& v : tu.values) v *= t;
        worst_homog =
            std::max(worst_homog, std::abs(luxemburg_norm(tu, p) - std::abs(t) * lam) /
                                      (std::abs(t) * lam));
      }
    }
  }
  report(6, "luxemburg-unit-ball", worst_unit <= 1e-8 && sandwich_violations == 0 &&
                                       worst_homog <= 1e-8,
         fmt("worst |modular(u/norm)-1| %.2e (<= 1e-8), %g sandwich violations, homogeneity %.2e",
             worst_unit, sandwich_violations, worst_homog));
}

// 7. eigenvalue estimate for sqrt(A)
void criterion_eigenvalue_estimate() {
  std::mt19937_64 rng(331);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> logmag(std::log(1e-3), std::log(1e3));
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> pconst(1.1, 4.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec x(coord(rng), coord(rng));
    const Vec xi = std::exp(logmag(rng)) * Vec(std::cos(ang(rng)), std::sin(ang(rng)));
    const ExponentField p = ExponentField::constant(pconst(rng));
    const SqrtALambdaMin r = sqrt_A_lambda_min_routes(x, xi, p);
    worst = std::max(worst,
                     std::abs(r.closed_form - r.numeric) / std::max(1.0, std::abs(r.closed_form)));
  }
  report(7, "sqrtA-eigenvalue-estimate", worst <= 1e-8,
         fmt("1000 samples, worst route disagreement %.2e (<= 1e-8)", worst));
}

// 8. doubling decay on the 1d fixture
void criterion_doubling_decay() {
  const auto t0 = std::chrono::steady_clock::now();
  MeshPtr mesh = make_mesh(1, Box::unit(1), 33);
  const ExponentField p2 = ExponentField::constant(2.0);
  auto [u, ru] = solve(DirichletProblem::with_boundary(mesh, p2, 0.0, kRamp), 1e-12);
  auto [v, rv] = solve(DirichletProblem::with_boundary(mesh, p2, 1e-2, kRamp), 1e-12);
  const double q = admissible_q_min(p2) + 0.5;
  const double delta = default_doubling_delta(p2);
  std::vector<double> j_list;
  for (int k = 0; k <= 6; ++k) j_list.push_back(std::pow(10.0, k));
  const DoublingTrace trace = doubling_experiment(u, v, p2, q, j_list, delta);
  const double dt = seconds_since(t0);

  const double initial = trace.rows.front().decay;
  const double final = trace.rows.back().decay;
  bool top_decade_monotone = trace.rows[6].decay <= trace.rows[5].decay + 1e-12;
  bool eta_ok = true;
  for (const auto& row : trace.rows)
    if (row.x_interior && row.gap == 0.0) eta_ok = false;
  const bool pass = ru.converged && rv.converged && top_decade_monotone &&
                    final <= 1e-3 * initial && eta_ok && dt < 30.0;
  report(8, "doubling-decay", pass,
         fmt("decay %.2e -> %.2e (<= 1e-3 ratio), interior maximizers split, %.2f s", initial,
             final, dt));
}

// 9. viscosity touching tests
void criterion_viscosity_tests() {
  MeshPtr mesh = make_mesh(2, Box::unit(2), 17);
  const ExponentField p = ExponentField::affine(2.0, 0.5, Vec(1.0, 0.0), Box::unit(2));
  auto [u, rep] = solve(DirichletProblem::with_boundary(mesh, p, 0.0, kRamp), 1e-8);
  const auto family = quadratic_family(*mesh, 200, 42);
  const ViscosityReport pass_rep = viscosity_supersolution_test(u, p, 0.0, family);

  const ExponentField p2 = ExponentField::constant(2.0);
  const GridFunction sub =
      GridFunction::interpolate(mesh, [](const Vec& x) { return dot(x, x); });
  const ViscosityReport fail_rep = viscosity_supersolution_test(sub, p2, 0.0, family);

  const bool pass = rep.converged && pass_rep.violations == 0 && pass_rep.touched > 0 &&
                    fail_rep.violations >= 1;
  report(9, "viscosity-touching", pass,
         fmt("solution: 0 of %g touchings violated; subsolution: %g violations (>= 1)",
             pass_rep.touched, fail_rep.violations));
}

// 10. radial singularity and integrand discrimination
void criterion_radial_singularity() {
  RadialProfile prof;
  prof.p_of_r = [](double r) { return 1.5 + 0.3 * r; };
  prof.dim = 2;
  prof.variant = RadialProfile::Variant::grouped;
  const double m1 = radial_gradient_modular(prof, 1e-1);
  const double m2 = radial_gradient_modular(prof, 1e-2);
  const double m3 = radial_gradient_modular(prof, 1e-3);
  const bool blowup = m2 / m1 >= 2.0 && m3 / m2 >= 2.0;

  RadialProfile constp;
  constp.p_of_r = [](double) { return 1.5; };
  constp.dim = 2;
  constp.variant = RadialProfile::Variant::grouped;
  const double r32 = radial_residual_check(constp, 0.3, 0.9, 32);
  const double r128 = radial_residual_check(constp, 0.3, 0.9, 128);
  const double order = std::log2(r32 / r128) / 2.0;
  const bool order_ok = order >= 1.5 && order <= 2.5;

  report(10, "radial-singularity", blowup && order_ok,
         fmt("modular ratios %.1f, %.1f (>= 2); residual order %.2f in [1.5, 2.5]", m2 / m1,
             m3 / m2, order));
}

// 11. removability experiment
void criterion_rado() {
  const Box line{Vec(-1.0), Vec(1.0)};
  const ExponentField p1 = ExponentField::affine(2.0, 0.25, Vec(1.0), line);
  MeshPtr mesh1 = make_mesh(1, line, 65);
  const RadoReport lin1 =
      rado_experiment(mesh1, [](const Vec& x) { return x[0]; }, p1, 1e-10);

  Box square;
  square.lo = Vec(-1.0, -1.0);
  square.hi = Vec(1.0, 1.0);
  const ExponentField p2 = ExponentField::affine(2.0, 0.25, Vec(1.0, 0.0), square);
  MeshPtr mesh2 = make_mesh(2, square, 17);
  const RadoReport lin2 =
      rado_experiment(mesh2, [](const Vec& x) { return x[0]; }, p2, 1e-8);

  const RadoReport kink =
      rado_experiment(mesh1, [](const Vec& x) { return std::abs(x[0]); }, p1, 1e-10);

  const bool pass = lin1.removable && lin2.removable && !kink.removable &&
                    kink.worst_straddling_residual >= 0.1;
  report(11, "rado-removability", pass,
         fmt("linear residuals %.1e / %.1e pass; kink residual %.2f (>= 0.1) fails",
             lin1.full_residual, lin2.full_residual, kink.worst_straddling_residual));
}

// 12. normalized-operator experiment
void criterion_normalized_operator() {
  MeshPtr mesh = make_mesh(1, Box::unit(1), 33);
  const ExponentField p2 = ExponentField::constant(2.0);
  auto [u, ru] = solve(DirichletProblem::with_boundary(mesh, p2, 0.0, kRamp), 1e-12);
  auto [v, rv] = solve(DirichletProblem::with_boundary(mesh, p2, 1e-2, kRamp), 1e-12);
  std::vector<double> j_list;
  for (int k = 0; k <= 6; ++k) j_list.push_back(std::pow(10.0, k));
  const DoublingTrace trace = normalized_doubling_experiment(u, v, p2, j_list);

  std::mt19937_64 rng(1213);
  std::uniform_real_distribution<double> entry(-3.0, 3.0);
  std::uniform_real_distribution<double> pconst(1.1, 4.0);
  int branch_mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    SymMat X = SymMat::zero(2);
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j) X.at(i, j) = X.at(j, i) = entry(rng);
    const double pv = pconst(rng);
    const OperatorValue val = normalized_pxlap(
        Jet2(Vec(0.0, 0.0), 0.0, Vec::zero(2), X), ExponentField::constant(pv));
    const Branch want =
        pv >= 2.0 ? Branch::envelope_lambda_max : Branch::envelope_lambda_min;
    if (val.branch != want) ++branch_mismatches;
  }

  const bool pass = ru.converged && rv.converged && !trace.interior_crossing &&
                    branch_mismatches == 0;
  report(12, "normalized-operator", pass,
         fmt("quartic trace w_max %.2e stays below the boundary max; %g branch mismatches",
             trace.rows.back().w_max, branch_mismatches));
}

}  // namespace

int main() {
  criterion_flux_constancy();
  criterion_eps_convergence();
  criterion_weak_comparison();
  criterion_operator_forms();
  criterion_vector_inequalities();
  criterion_luxemburg();
  criterion_eigenvalue_estimate();
  criterion_doubling_decay();
  criterion_viscosity_tests();
  criterion_radial_singularity();
  criterion_rado();
  criterion_normalized_operator();
  std::printf("%d of 12 criteria passed\n", 12 - g_failures);
  return g_failures;
}
