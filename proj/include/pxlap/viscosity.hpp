#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pxlap/exponent.hpp"
#include "pxlap/mesh.hpp"
#include "pxlap/operators.hpp"
#include "pxlap/solver.hpp"

namespace pxlap {

// C2 test function with exact gradient and Hessian everywhere requested.
//   quadratic:        offset + b.(x-x0) + (x-x0)' M (x-x0) / 2
//   doubling_penalty: -(j/q) |x - anchor|^q + offset        (q > 2)
//   custom_radial:    offset + amp |x - x0|^alpha           (alpha > 2)
struct TestFunction {
  enum class Kind { quadratic, doubling_penalty, custom_radial };

  Kind kind = Kind::quadratic;
  Vec x0;          // center (quadratic, custom_radial) or anchor (doubling_penalty)
  double offset = 0.0;
  Vec b;
  SymMat M;
  double j = 1.0;
  double q = 4.0;
  double amp = 1.0;
  double alpha = 4.0;

  static TestFunction quadratic(const Vec& center, double offset, const Vec& b, const SymMat& M) {
    TestFunction f;
    f.kind = Kind::quadratic;
    f.x0 = center;
    f.offset = offset;
    f.b = b;
    f.M = M;
    return f;
  }

  static TestFunction doubling_penalty(const Vec& anchor, double j, double q,
                                       double offset = 0.0) {
    if (!(q > 2.0)) throw Error("TestFunction: doubling penalty needs q > 2");
    TestFunction f;
    f.kind = Kind::doubling_penalty;
    f.x0 = anchor;
    f.j = j;
    f.q = q;
    f.offset = offset;
    return f;
  }

  static TestFunction custom_radial(const Vec& center, double amp, double alpha,
                                    double offset = 0.0) {
    if (!(alpha > 2.0)) throw Error("TestFunction: custom_radial needs alpha > 2");
    TestFunction f;
    f.kind = Kind::custom_radial;
    f.x0 = center;
    f.amp = amp;
    f.alpha = alpha;
    f.offset = offset;
    return f;
  }

  double value(const Vec& x) const {
    const Vec r = x - x0;
    switch (kind) {
      case Kind::quadratic:
        return offset + dot(b, r) + 0.5 * M.quad(r);
      case Kind::doubling_penalty:
        return offset - (j / q) * std::pow(norm(r), q);
      case Kind::custom_radial:
        return offset + amp * std::pow(norm(r), alpha);
    }
    return offset;
  }

  Vec gradient(const Vec& x) const {
    const Vec r = x - x0;
    switch (kind) {
      case Kind::quadratic:
        return b + M.apply(r);
      case Kind::doubling_penalty: {
        const double rn = norm(r);
        if (rn == 0.0) return Vec::zero(x.n);
        return (-j * std::pow(rn, q - 2.0)) * r;
      }
      case Kind::custom_radial: {
        const double rn = norm(r);
        if (rn == 0.0) return Vec::zero(x.n);
        return (amp * alpha * std::pow(rn, alpha - 2.0)) * r;
      }
    }
    return Vec::zero(x.n);
  }

  SymMat hessian(const Vec& x) const {
    const Vec r = x - x0;
    switch (kind) {
      case Kind::quadratic:
        return M;
      case Kind::doubling_penalty: {
        const double rn = norm(r);
        if (rn == 0.0) return SymMat::zero(x.n);  // continuous limit for q > 2
        SymMat h = SymMat::identity(x.n);
        h += ((q - 2.0) / (rn * rn)) * SymMat::outer(r);
        h *= -j * std::pow(rn, q - 2.0);
        return h;
      }
      case Kind::custom_radial: {
        const double rn = norm(r);
        if (rn == 0.0) return SymMat::zero(x.n);
        SymMat h = SymMat::identity(x.n);
        h += ((alpha - 2.0) / (rn * rn)) * SymMat::outer(r);
        h *= amp * alpha * std::pow(rn, alpha - 2.0);
        return h;
      }
    }
    return SymMat::zero(x.n);
  }

  Jet2 jet(const Vec& x) const { return Jet2(x, value(x), gradient(x), hessian(x)); }
};

enum class TouchStatus { found, none, ambiguous };

struct TouchResult {
  TouchStatus status = TouchStatus::none;
  int node = -1;
  Vec point;
  double min_gap = 0.0;     // smallest u - phi (from below) over nodes
  double second_gap = 0.0;  // second smallest, for the tie test
};

// Locates the node where phi touches u: the minimizer of u - phi must
// be 0 within 1e-10 and every other node must clear it by at least
// 1e-12; ties are reported as ambiguous, never silently broken.
inline TouchResult find_touching(const GridFunction& u, const TestFunction& phi,
                                 bool from_below = true) {
  const Mesh& mesh = *u.mesh;
  TouchResult res;
  double best = std::numeric_limits<double>::infinity();
  double second = std::numeric_limits<double>::infinity();
  int best_node = -1;
  for (int i = 0; i < mesh.node_count(); ++i) {
    const double phi_i = phi.value(mesh.nodes[static_cast<std::size_t>(i)]);
    const double gap = from_below ? u[i] - phi_i : phi_i - u[i];
    if (gap < best) {
      second = best;
      best = gap;
      best_node = i;
    } else if (gap < second) {
      second = gap;
    }
  }
  res.min_gap = best;
  res.second_gap = second;
  if (std::abs(best) > 1e-10) {
    res.status = TouchStatus::none;
    return res;
  }
  if (second - best < 1e-12) {
    res.status = TouchStatus::ambiguous;
    return res;
  }
  res.status = TouchStatus::found;
  res.node = best_node;
  res.point = mesh.nodes[static_cast<std::size_t>(best_node)];
  return res;
}

struct ViscosityRecord {
  int phi_id = -1;
  int node = -1;
  Vec point;
  double grad_norm = 0.0;
  double op_value = 0.0;  // -Delta_{p(x)} phi at the touching point
  double required = 0.0;
  bool violated = false;
};

struct ViscosityReport {
  std::vector<ViscosityRecord> records;  // one per interior touching with Dphi != 0
  int touched = 0;
  int skipped_vanishing_gradient = 0;
  int skipped_boundary = 0;
  int ambiguous = 0;
  int no_touching = 0;
  int violations = 0;
  bool vacuous() const { return records.empty(); }
};

// Touching test for the supersolution inequality -Delta_{p(x)} phi >= rhs.
// Each family member is first shifted vertically so its minimum gap is
// zero; test functions whose gradient vanishes at the touching point
// are skipped structurally, as are boundary touchings and grid ties.
inline ViscosityReport viscosity_supersolution_test(const GridFunction& u,
                                                    const ExponentField& p, double rhs,
                                                    const std::vector<TestFunction>& family) {
  if (family.empty()) throw Error("viscosity_supersolution_test: empty family");
  const Mesh& mesh = *u.mesh;
  ViscosityReport report;
  for (std::size_t fid = 0; fid < family.size(); ++fid) {
    TestFunction phi = family[fid];
    double min_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < mesh.node_count(); ++i)
      min_gap = std::min(min_gap, u[i] - phi.value(mesh.nodes[static_cast<std::size_t>(i)]));
    phi.offset += min_gap;  // now touches from below

    const TouchResult touch = find_touching(u, phi, true);
    if (touch.status == TouchStatus::ambiguous) {
      ++report.ambiguous;
      continue;
    }
    if (touch.status == TouchStatus::none) {
      ++report.no_touching;
      continue;
    }
    if (mesh.is_boundary(touch.node)) {
      ++report.skipped_boundary;
      continue;
    }
    const Vec grad = phi.gradient(touch.point);
    if (norm(grad) < kGradientFloor) {
      ++report.skipped_vanishing_gradient;
      continue;
    }
    ++report.touched;
    ViscosityRecord rec;
    rec.phi_id = static_cast<int>(fid);
    rec.node = touch.node;
    rec.point = touch.point;
    rec.grad_norm = norm(grad);
    rec.op_value = -pxlap_expanded(phi.jet(touch.point), p);
    rec.required = rhs;
    rec.violated = rec.op_value < rhs - 1e-6;
    if (rec.violated) ++report.violations;
    report.records.push_back(rec);
  }
  return report;
}

struct LimsupScan {
  double limsup_surrogate = 0.0;          // sup over the smallest radius
  std::vector<std::pair<double, double>> per_radius;  // (r, sup over N_r \ {x0})
  int usable_samples = 0;
  bool all_gradients_vanished = false;
};

// Scans -Delta_{p(x)} phi over punctured neighborhoods of x0: mesh
// nodes within each radius plus 32 off-node ring points per radius.
// The surrogate for limsup_{x -> x0} is the sup at the smallest radius.
inline LimsupScan limsup_scan(const GridFunction& v, const TestFunction& phi, const Vec& x0,
                              const ExponentField& p, const std::vector<double>& radii) {
  if (radii.empty()) throw Error("limsup_scan: empty radius list");
  for (std::size_t k = 1; k < radii.size(); ++k)
    if (!(radii[k] < radii[k - 1])) throw Error("limsup_scan: radii must be descending");
  const Mesh& mesh = *v.mesh;
  LimsupScan scan;
  for (double r : radii) {
    double sup = -std::numeric_limits<double>::infinity();
    int used = 0;
    const auto consider = [&](const Vec& x) {
      const double d = norm(x - x0);
      if (d == 0.0 || d > r) return;
      const Vec g = phi.gradient(x);
      if (norm(g) < kGradientFloor) return;
      sup = std::max(sup, -pxlap_expanded(phi.jet(x), p));
      ++used;
    };
    for (const Vec& node : mesh.nodes) consider(node);
    if (mesh.dim == 1) {
      consider(Vec(x0[0] - r));
      consider(Vec(x0[0] + r));
      consider(Vec(x0[0] - 0.5 * r));
      consider(Vec(x0[0] + 0.5 * r));
    } else {
      for (int k = 0; k < 32; ++k) {
        const double ang = 2.0 * M_PI * k / 32.0;
        consider(Vec(x0[0] + r * std::cos(ang), x0[1] + r * std::sin(ang)));
      }
    }
    scan.per_radius.emplace_back(r, sup);
    scan.usable_samples += used;
  }
  if (scan.usable_samples == 0) {
    scan.all_gradients_vanished = true;
    throw Error("limsup_scan: no sample point has a nonvanishing gradient");
  }
  scan.limsup_surrogate = scan.per_radius.back().second;
  return scan;
}

struct DoublingRow {
  double j = 0.0;
  int x_node = -1, y_node = -1;
  Vec x, y;
  double gap = 0.0;    // |x_j - y_j|
  double w_max = 0.0;  // max of u(x) - v(y) - (j/q)|x-y|^q
  Vec eta;             // j |x-y|^{q-2} (x-y)
  double eta_norm = 0.0;
  double decay = 0.0;  // j |x-y|^{q-1+delta}
  double op_at_x = 0.0, op_at_y = 0.0;
  bool x_interior = false, y_interior = false;
};

struct DoublingTrace {
  std::vector<DoublingRow> rows;
  double q = 0.0, delta = 0.0;
  double boundary_max = 0.0;        // max of u - v over boundary nodes
  bool interior_crossing = false;   // final w_max exceeds boundary max + 1e-8
  bool normalized = false;
};

inline double admissible_q_min(const ExponentField& p) {
  return std::max(2.0, p.p_minus() / (p.p_minus() - 1.0));
}

inline double default_doubling_delta(const ExponentField& p) {
  return std::min(0.1, 0.5 / (p.p_plus() - 1.0));
}

namespace detail {

inline DoublingTrace doubling_core(const GridFunction& u, const GridFunction& v,
                                   const ExponentField& p, double q,
                                   const std::vector<double>& j_list, double delta,
                                   bool normalized) {
  if (u.mesh != v.mesh) throw Error("doubling_experiment: different meshes");
  const Mesh& mesh = *u.mesh;
  const double n2 = static_cast<double>(mesh.node_count()) * mesh.node_count();
  if (n2 > 1e7) throw Error("doubling_experiment: node count squared exceeds 1e7");

  DoublingTrace trace;
  trace.q = q;
  trace.delta = delta;
  trace.normalized = normalized;
  for (int bnode : mesh.boundary_nodes)
    trace.boundary_max = std::max(trace.boundary_max, u[bnode] - v[bnode]);

  const int n = mesh.node_count();
  for (double j : j_list) {
    DoublingRow row;
    row.j = j;
    double best = -std::numeric_limits<double>::infinity();
    int bx = 0, by = 0;
    for (int ix = 0; ix < n; ++ix) {
      const Vec& xv = mesh.nodes[static_cast<std::size_t>(ix)];
      const double ux = u[ix];
      for (int iy = 0; iy < n; ++iy) {
        const double d = norm(xv - mesh.nodes[static_cast<std::size_t>(iy)]);
        const double w = ux - v[iy] - (j / q) * std::pow(d, q);
        if (w > best) {
          best = w;
          bx = ix;
          by = iy;
        }
      }
    }
    row.x_node = bx;
    row.y_node = by;
    row.x = mesh.nodes[static_cast<std::size_t>(bx)];
    row.y = mesh.nodes[static_cast<std::size_t>(by)];
    row.gap = norm(row.x - row.y);
    row.w_max = best;
    row.eta = row.gap > 0.0 ? (j * std::pow(row.gap, q - 2.0)) * (row.x - row.y)
                            : Vec::zero(mesh.dim);
    row.eta_norm = norm(row.eta);
    row.decay = j * std::pow(row.gap, q - 1.0 + delta);
    row.x_interior = !mesh.is_boundary(bx);
    row.y_interior = !mesh.is_boundary(by);

    // operator values of the two penalty test functions at the
    // maximizer pair, the computable surrogate for the jets
    if (row.gap > 0.0) {
      const Vec z = row.x - row.y;
      SymMat P = SymMat::identity(mesh.dim);
      P += ((q - 2.0) / (row.gap * row.gap)) * SymMat::outer(z);
      P *= j * std::pow(row.gap, q - 2.0);
      const Jet2 jet_x(row.x, u[bx], row.eta, P);
      const Jet2 jet_y(row.y, v[by], row.eta, -1.0 * P);
      if (normalized) {
        row.op_at_x = normalized_pxlap(jet_x, p).value;
        row.op_at_y = normalized_pxlap(jet_y, p).value;
      } else {
        row.op_at_x = pxlap_expanded(jet_x, p);
        row.op_at_y = pxlap_expanded(jet_y, p);
      }
    } else if (normalized) {
      const Jet2 jet0(row.x, u[bx], Vec::zero(mesh.dim), SymMat::zero(mesh.dim));
      row.op_at_x = normalized_pxlap(jet0, p).value;
      row.op_at_y = row.op_at_x;
    } else {
      row.op_at_x = row.op_at_y = std::numeric_limits<double>::quiet_NaN();
    }
    trace.rows.push_back(row);
  }

  if (!trace.rows.empty())
    trace.interior_crossing = trace.rows.back().w_max > trace.boundary_max + 1e-8;
  return trace;
}

}  // namespace detail

// Doubling-of-variables experiment: brute-force maximization of
// w_j(x, y) = u(x) - v(y) - (j/q)|x-y|^q over all node pairs, with the
// penalty-gradient and decay diagnostics per j.
inline DoublingTrace doubling_experiment(const GridFunction& u, const GridFunction& v,
                                         const ExponentField& p, double q,
                                         const std::vector<double>& j_list, double delta) {
  if (!(q > admissible_q_min(p)))
    throw Error("doubling_experiment: q must exceed max(2, p^-/(p^- - 1))");
  if (!(delta > 0.0) || !(1.0 - delta * (p.p_plus() - 1.0) > 0.0))
    throw Error("doubling_experiment: delta must satisfy 0 < delta and 1 - delta (p^+ - 1) > 0");
  return detail::doubling_core(u, v, p, q, j_list, delta, false);
}

// Quartic-penalty variant for the normalized operator; envelope
// branches are admitted at vanishing penalty gradients.
inline DoublingTrace normalized_doubling_experiment(const GridFunction& u, const GridFunction& v,
                                                    const ExponentField& p,
                                                    const std::vector<double>& j_list) {
  const double delta = default_doubling_delta(p);
  return detail::doubling_core(u, v, p, 4.0, j_list, delta, true);
}

enum class EndpointComparison { ordered, interior_violation, boundary_not_ordered };

struct EndpointComparisonReport {
  EndpointComparison state = EndpointComparison::ordered;
  double worst_interior_violation = 0.0;
  int worst_node = -1;
  double worst_boundary_violation = 0.0;
};

// Boundary ordering u <= v propagates to every node.
inline EndpointComparisonReport comparison_theorem_check(const GridFunction& u,
                                                         const GridFunction& v) {
  if (u.mesh != v.mesh) throw Error("comparison_theorem_check: different meshes");
  const Mesh& mesh = *u.mesh;
  EndpointComparisonReport rep;
  for (int b : mesh.boundary_nodes)
    rep.worst_boundary_violation = std::max(rep.worst_boundary_violation, u[b] - v[b]);
  if (rep.worst_boundary_violation > 1e-10) {
    rep.state = EndpointComparison::boundary_not_ordered;
    return rep;
  }
  for (int i = 0; i < mesh.node_count(); ++i) {
    const double viol = u[i] - v[i];
    if (viol > rep.worst_interior_violation) {
      rep.worst_interior_violation = viol;
      rep.worst_node = i;
    }
  }
  rep.state = rep.worst_interior_violation <= 1e-8 ? EndpointComparison::ordered
                                                   : EndpointComparison::interior_violation;
  return rep;
}

// Deterministic quadratic family: centers on mesh nodes, unit gradient
// directions from a 16-point circle covering, isotropic curvatures from
// {-10, -1, -0.1, 0, 0.1, 1, 10} plus rank-one perturbations.
inline std::vector<TestFunction> quadratic_family(const Mesh& mesh, int count,
                                                  unsigned long long seed) {
  std::vector<TestFunction> family;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> node_pick(0, mesh.node_count() - 1);
  std::uniform_int_distribution<int> dir_pick(0, 15);
  const double curvatures[] = {-10.0, -1.0, -0.1, 0.0, 0.1, 1.0, 10.0};
  std::uniform_int_distribution<int> curv_pick(0, 6);
  std::uniform_int_distribution<int> rank_one(0, 3);
  std::uniform_real_distribution<double> rho(-1.0, 1.0);

  while (static_cast<int>(family.size()) < count) {
    const Vec center = mesh.nodes[static_cast<std::size_t>(node_pick(rng))];
    Vec b = Vec::zero(mesh.dim);
    if (mesh.dim == 1) {
      b[0] = dir_pick(rng) < 8 ? 1.0 : -1.0;
    } else {
      const double ang = 2.0 * M_PI * dir_pick(rng) / 16.0;
      b = Vec(std::cos(ang), std::sin(ang));
    }
    SymMat M = curvatures[curv_pick(rng)] * SymMat::identity(mesh.dim);
    if (rank_one(rng) == 0) {
      Vec v = Vec::zero(mesh.dim);
      for (int i = 0; i < mesh.dim; ++i) v[i] = rho(rng);
      if (norm(v) > 0.0) M += rho(rng) * SymMat::outer(normalized(v));
    }
    family.push_back(TestFunction::quadratic(center, 0.0, b, M));
  }
  return family;
}

}  // namespace pxlap
