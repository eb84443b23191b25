#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "pxlap/assemble.hpp"
#include "pxlap/exponent.hpp"
#include "pxlap/mesh.hpp"
#include "pxlap/quadrature.hpp"

namespace pxlap {

// Radial profile v(r) on the punctured unit ball, built from the
// exponent r -> p(r). The printed integrand admits two readings; both
// are implemented and the annulus residual check discriminates.
//   verbatim: (p(r) r^{n-1}) * r^{-1/(p(r)-1)}
//   grouped:  (p(r) r^{n-1})^{-1/(p(r)-1)}
struct RadialProfile {
  enum class Variant { verbatim, grouped };

  std::function<double(double)> p_of_r;
  int dim = 2;
  Variant variant = Variant::grouped;
  double quad_tol = 1e-10;

  double integrand(double s) const {
    const double p = p_of_r(s);
    const double base = p * std::pow(s, dim - 1);
    if (variant == Variant::verbatim) return base * std::pow(s, -1.0 / (p - 1.0));
    return std::pow(base, -1.0 / (p - 1.0));
  }

  // |v'(r)| = integrand(r); v decreases toward the boundary value 0.
  double value(double r) const { return integrate([this](double s) { return integrand(s); }, r, 1.0, quad_tol); }
};

struct RadialSamples {
  std::vector<std::pair<double, double>> rows;  // (r, v(r))
  bool complete = true;
  std::string error;  // quadrature failure message, partial rows kept
};

// Samples v on (0, 1]; v(1) = 0 and v is nonincreasing in r. Quadrature
// non-convergence near 0 is reported alongside the partial results.
inline RadialSamples radial_example(const RadialProfile& profile,
                                    const std::vector<double>& sample_radii) {
  RadialSamples out;
  for (double r : sample_radii) {
    if (!(r > 0.0) || r > 1.0) throw Error("radial_example: radii must lie in (0, 1]");
    try {
      out.rows.emplace_back(r, profile.value(r));
    } catch (const Error& e) {
      out.complete = false;
      out.error = e.what();
      break;
    }
  }
  return out;
}

// Gradient modular over the annulus (a, 1), including the sphere factor.
inline double radial_gradient_modular(const RadialProfile& profile, double a) {
  if (!(a > 0.0 && a <= 1.0)) throw Error("radial_gradient_modular: need 0 < a <= 1");
  if (a == 1.0) return 0.0;
  const double sphere = profile.dim == 1 ? 2.0 : (profile.dim == 2 ? 2.0 * M_PI : 4.0 * M_PI);
  return sphere * integrate(
                      [&profile](double s) {
                        const double g = profile.integrand(s);
                        return std::pow(g, profile.p_of_r(s)) * std::pow(s, profile.dim - 1);
                      },
                      a, 1.0, profile.quad_tol);
}

// Pointwise weak residual of the interpolated profile on a radial mesh
// of the annulus (a, b): hat residuals with the r^{n-1} volume weight,
// normalized by the lumped node mass. Converges under refinement only
// for the variant that actually solves the radial equation.
inline double radial_residual_check(const RadialProfile& profile, double a, double b,
                                    int resolution) {
  if (!(0.0 < a && a < b && b <= 1.0)) throw Error("radial_residual_check: need 0 < a < b <= 1");
  Box extent;
  extent.lo = Vec(a);
  extent.hi = Vec(b);
  MeshPtr mesh = make_mesh(1, extent, resolution);
  GridFunction v = GridFunction::interpolate(mesh, [&profile](const Vec& x) {
    return profile.value(x[0]);
  });

  // residual_i = sum_e |e| * weight(r_e) * |v'|^{p(r_e)-2} v' * phi_i'
  std::vector<double> residual(static_cast<std::size_t>(mesh->node_count()), 0.0);
  std::vector<double> mass(static_cast<std::size_t>(mesh->node_count()), 0.0);
  for (int e = 0; e < mesh->element_count(); ++e) {
    const auto& el = mesh->elements[static_cast<std::size_t>(e)];
    const double w = mesh->element_measures[static_cast<std::size_t>(e)];
    const double rm = mesh->element_barycenters[static_cast<std::size_t>(e)][0];
    const double p = profile.p_of_r(rm);
    const double dv = (v[el[1]] - v[el[0]]) / w;
    const double flux = std::pow(std::abs(dv), p - 2.0) * dv;
    const double weight = std::pow(rm, profile.dim - 1);
    residual[static_cast<std::size_t>(el[0])] += w * weight * flux * (-1.0 / w);
    residual[static_cast<std::size_t>(el[1])] += w * weight * flux * (1.0 / w);
    mass[static_cast<std::size_t>(el[0])] += 0.5 * w * weight;
    mass[static_cast<std::size_t>(el[1])] += 0.5 * w * weight;
  }
  double max_res = 0.0;
  for (int i = 1; i + 1 < mesh->node_count(); ++i)
    max_res = std::max(max_res, std::abs(residual[static_cast<std::size_t>(i)]) /
                                    mass[static_cast<std::size_t>(i)]);
  return max_res;
}

struct RadoReport {
  bool candidate_solves_off_zero_set = false;
  double off_zero_residual = 0.0;   // max over hats supported away from {u = 0}
  double full_residual = 0.0;       // max over all interior hats
  bool removable = false;           // full residual <= 10 * tol
  int worst_straddling_node = -1;
  double worst_straddling_residual = 0.0;
  int straddling_count = 0;
};

// Removability experiment: a C1 candidate that solves the equation away
// from its zero set must carry a vanishing full-domain residual. Hats
// whose support meets {u = 0} are the straddling ones.
template <class FValue>
inline RadoReport rado_experiment(MeshPtr mesh, FValue&& candidate, const ExponentField& p,
                                  double tol) {
  GridFunction u = GridFunction::interpolate(mesh, candidate);
  const AssembledSystem sys = assemble(u, p, 0.0, 0.0);

  const double zero_tol = 1e-12 * std::max(1.0, u.max_abs());
  std::vector<char> node_straddles(static_cast<std::size_t>(mesh->node_count()), 0);
  for (const auto& el : mesh->elements) {
    const int nv = mesh->nodes_per_element();
    bool has_pos = false, has_neg = false, has_zero = false;
    for (int k = 0; k < nv; ++k) {
      const double val = u[el[k]];
      if (val > zero_tol) has_pos = true;
      else if (val < -zero_tol) has_neg = true;
      else has_zero = true;
    }
    if (has_zero || (has_pos && has_neg))
      for (int k = 0; k < nv; ++k) node_straddles[static_cast<std::size_t>(el[k])] = 1;
  }

  RadoReport rep;
  for (std::size_t k = 0; k < sys.free_nodes.size(); ++k) {
    const int node = sys.free_nodes[k];
    const double r = std::abs(sys.residual[k]);
    rep.full_residual = std::max(rep.full_residual, r);
    if (node_straddles[static_cast<std::size_t>(node)]) {
      ++rep.straddling_count;
      if (r > rep.worst_straddling_residual) {
        rep.worst_straddling_residual = r;
        rep.worst_straddling_node = node;
      }
    } else {
      rep.off_zero_residual = std::max(rep.off_zero_residual, r);
    }
  }
  rep.candidate_solves_off_zero_set = rep.off_zero_residual <= tol;
  if (!rep.candidate_solves_off_zero_set)
    throw Error("rado_experiment: candidate is not a discrete solution away from its zero set");
  rep.removable = rep.full_residual <= 10.0 * tol;
  return rep;
}

}  // namespace pxlap
