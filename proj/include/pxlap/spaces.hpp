#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "pxlap/exponent.hpp"
#include "pxlap/mesh.hpp"

namespace pxlap {

namespace detail {

// One-point (barycenter) quadrature of |v|^{p(x)} where v is either the
// interpolated value or the elementwise gradient magnitude.
template <class PEval>
double modular_quadrature(const GridFunction& u, PEval&& p_at, bool of_gradient, double scale) {
  const Mesh& mesh = *u.mesh;
  double sum = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const double w = mesh.element_measures[static_cast<std::size_t>(e)];
    const Vec& xq = mesh.element_barycenters[static_cast<std::size_t>(e)];
    const double v =
        of_gradient ? norm(element_gradient(u, e)) : std::abs(u.barycenter_value(e));
    const double term = w * std::pow(v * scale, p_at(xq));
    if (!std::isfinite(term)) throw Error("modular: non-finite integrand");
    sum += term;
  }
  return sum;
}

}  // namespace detail

// rho_{p(x)}(u) = sum_q w_q |v(x_q)|^{p(x_q)}, v = u or |Du|.
inline double modular(const GridFunction& u, const ExponentField& p, bool of_gradient = false) {
  return detail::modular_quadrature(u, [&p](const Vec& x) { return p(x); }, of_gradient, 1.0);
}

namespace detail {

template <class PEval>
double luxemburg_bisect(const GridFunction& u, PEval&& p_at, bool of_gradient) {
  const Mesh& mesh = *u.mesh;
  double umax = 0.0;
  if (of_gradient) {
    for (int e = 0; e < mesh.element_count(); ++e)
      umax = std::max(umax, norm(element_gradient(u, e)));
  } else {
    umax = u.max_abs();
  }
  if (umax == 0.0) return 0.0;

  const auto rho = [&](double lambda) {
    return modular_quadrature(u, p_at, of_gradient, 1.0 / lambda);
  };

  double lo = 1e-12;
  double hi = umax * mesh.total_measure() + 1.0;
  // expand the bracket geometrically until it straddles rho = 1
  int guard = 0;
  while (rho(hi) > 1.0) {
    hi *= 2.0;
    if (++guard > 2000 || !std::isfinite(hi))
      throw Error("luxemburg_norm: bracketing failure (modular stays above 1)");
  }
  guard = 0;
  while (true) {
    double r;
    try {
      r = rho(lo);
    } catch (const Error&) {
      r = std::numeric_limits<double>::infinity();  // overflow means rho > 1
    }
    if (r >= 1.0) break;
    lo *= 0.5;
    if (++guard > 2000) throw Error("luxemburg_norm: bracketing failure (modular stays below 1)");
  }

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    double r;
    try {
      r = rho(mid);
    } catch (const Error&) {
      r = std::numeric_limits<double>::infinity();
    }
    if (std::isfinite(r) && std::abs(r - 1.0) <= 1e-12) return mid;
    (r > 1.0 ? lo : hi) = mid;
    if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Luxemburg norm: the lambda with modular(u/lambda) = 1, located by
// bracketing and bisection. Returns 0 for the zero function.
inline double luxemburg_norm(const GridFunction& u, const ExponentField& p,
                             bool of_gradient = false) {
  return detail::luxemburg_bisect(u, [&p](const Vec& x) { return p(x); }, of_gradient);
}

struct HolderRecord {
  double lhs = 0.0;    // integral of f*g
  double rhs = 0.0;    // 2 ||f||_{p(x)} ||g||_{p'(x)}
  double ratio = 0.0;  // lhs / rhs (0 when rhs = 0)
  bool satisfied = true;
};

// Pairing bound with the certificate constant C = 2, which dominates
// 1/p^- + 1/(p')^- for every admissible exponent.
inline HolderRecord holder_pairing_check(const GridFunction& f, const GridFunction& g,
                                         const ExponentField& p) {
  if (f.mesh != g.mesh) throw Error("holder_pairing_check: functions live on different meshes");
  const Mesh& mesh = *f.mesh;
  double lhs = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e)
    lhs += mesh.element_measures[static_cast<std::size_t>(e)] * f.barycenter_value(e) *
           g.barycenter_value(e);

  const double nf = luxemburg_norm(f, p);
  const double ng = detail::luxemburg_bisect(g, p.conjugate_eval(), false);

  HolderRecord rec;
  rec.lhs = lhs;
  rec.rhs = 2.0 * nf * ng;
  rec.ratio = rec.rhs > 0.0 ? lhs / rec.rhs : 0.0;
  rec.satisfied = lhs <= rec.rhs + 1e-12 * std::max(1.0, std::abs(rec.rhs));
  return rec;
}

// ||u||_{p(x)} / (diam(Omega) ||Du||_{p(x)}) for u vanishing on the boundary.
inline double poincare_ratio(const GridFunction& u, const ExponentField& p) {
  const Mesh& mesh = *u.mesh;
  for (int b : mesh.boundary_nodes)
    if (u[b] != 0.0) throw Error("poincare_ratio: u does not vanish on the boundary");
  const double nu = luxemburg_norm(u, p);
  if (nu == 0.0) throw Error("poincare_ratio: undefined for u identically zero");
  const double ndu = luxemburg_norm(u, p, /*of_gradient=*/true);
  return nu / (mesh.diameter() * ndu);
}

// Discrete lower semicontinuous regularization: nodewise minimum over
// the graph ball of radius (radius_steps - 1), so one step is the node
// itself and the reported sequence shrinks toward u.
inline GridFunction ess_liminf_regularize(const GridFunction& u, int radius_steps) {
  if (radius_steps < 1) throw Error("ess_liminf_regularize: radius_steps must be >= 1");
  const Mesh& mesh = *u.mesh;
  std::vector<double> out(u.values.size());
  for (int i = 0; i < mesh.node_count(); ++i) {
    double m = u[i];
    for (int j : graph_ball(mesh, i, radius_steps - 1)) m = std::min(m, u[j]);
    out[static_cast<std::size_t>(i)] = m;
  }
  return GridFunction(u.mesh, std::move(out));
}

// The shrinking-layer sequence [radius_steps, ..., 1], outermost first.
inline std::vector<GridFunction> ess_liminf_sequence(const GridFunction& u, int radius_steps) {
  std::vector<GridFunction> seq;
  for (int k = radius_steps; k >= 1; --k) seq.push_back(ess_liminf_regularize(u, k));
  return seq;
}

}  // namespace pxlap
