#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "pxlap/exponent.hpp"
#include "pxlap/mesh.hpp"
#include "pxlap/operators.hpp"

namespace pxlap {

// Symmetric banded matrix storing the lower band; enough for the
// lexicographically ordered meshes produced by make_mesh.
class BandedSym {
 public:
  BandedSym() = default;
  BandedSym(int n, int bandwidth)
      : n_(n), band_(bandwidth), data_(static_cast<std::size_t>(n) * (bandwidth + 1), 0.0) {}

  int size() const { return n_; }
  int bandwidth() const { return band_; }

  double get(int i, int j) const {
    if (j > i) std::swap(i, j);
    if (i - j > band_) return 0.0;
    return data_[idx(i, j)];
  }

  void add(int i, int j, double v) {
    if (j > i) std::swap(i, j);
    if (i - j > band_) throw Error("BandedSym: entry outside band");
    data_[idx(i, j)] += v;
  }

  double max_asymmetry() const { return 0.0; }  // symmetric by storage

  std::vector<std::vector<double>> dense() const {
    std::vector<std::vector<double>> a(static_cast<std::size_t>(n_),
                                       std::vector<double>(static_cast<std::size_t>(n_), 0.0));
    for (int i = 0; i < n_; ++i)
      for (int j = std::max(0, i - band_); j <= i; ++j) {
        a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = get(i, j);
        a[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = get(i, j);
      }
    return a;
  }

  // In-place Cholesky; returns false when the matrix is not positive
  // definite (pivot below tiny * scale).
  bool cholesky() {
    double scale = 0.0;
    for (int i = 0; i < n_; ++i) scale = std::max(scale, std::abs(get(i, i)));
    if (scale == 0.0) return false;
    for (int j = 0; j < n_; ++j) {
      double d = data_[idx(j, j)];
      for (int k = std::max(0, j - band_); k < j; ++k) {
        const double l = data_[idx(j, k)];
        d -= l * l;
      }
      if (!(d > 1e-14 * scale)) return false;
      const double dj = std::sqrt(d);
      data_[idx(j, j)] = dj;
      for (int i = j + 1; i <= std::min(n_ - 1, j + band_); ++i) {
        double s = data_[idx(i, j)];
        for (int k = std::max(0, i - band_); k < j; ++k)
          s -= data_[idx(i, k)] * data_[idx(j, k)];
        data_[idx(i, j)] = s / dj;
      }
    }
    factored_ = true;
    return true;
  }

  // Solve L L^T x = b after cholesky().
  std::vector<double> solve(std::vector<double> b) const {
    if (!factored_) throw Error("BandedSym::solve before factorization");
    for (int i = 0; i < n_; ++i) {
      double s = b[static_cast<std::size_t>(i)];
      for (int k = std::max(0, i - band_); k < i; ++k)
        s -= data_[idx(i, k)] * b[static_cast<std::size_t>(k)];
      b[static_cast<std::size_t>(i)] = s / data_[idx(i, i)];
    }
    for (int i = n_ - 1; i >= 0; --i) {
      double s = b[static_cast<std::size_t>(i)];
      for (int k = i + 1; k <= std::min(n_ - 1, i + band_); ++k)
        s -= data_[idx(k, i)] * b[static_cast<std::size_t>(k)];
      b[static_cast<std::size_t>(i)] = s / data_[idx(i, i)];
    }
    return b;
  }

  void shift_diagonal(double mu) {
    for (int i = 0; i < n_; ++i) data_[idx(i, i)] += mu;
    factored_ = false;
  }

 private:
  std::size_t idx(int i, int j) const {
    // row i keeps columns [i-band, i]
    return static_cast<std::size_t>(i) * (band_ + 1) + static_cast<std::size_t>(j - (i - band_));
  }

  int n_ = 0;
  int band_ = 0;
  bool factored_ = false;
  std::vector<double> data_;
};

// Discrete energy, its gradient with respect to the free (interior)
// nodal values, and the exact Hessian of the regularized integrand.
struct AssembledSystem {
  double energy = 0.0;
  std::vector<double> residual;  // one entry per free node
  BandedSym hessian;
  std::vector<int> free_nodes;   // ascending node ids
  std::vector<int> free_index;   // node id -> free index or -1

  double residual_max_norm() const {
    double m = 0.0;
    for (double r : residual) m = std::max(m, std::abs(r));
    return m;
  }
};

namespace detail {

inline std::pair<std::vector<int>, std::vector<int>> free_node_map(const Mesh& mesh) {
  std::vector<int> free_nodes;
  std::vector<int> free_index(static_cast<std::size_t>(mesh.node_count()), -1);
  for (int i = 0; i < mesh.node_count(); ++i)
    if (!mesh.is_boundary(i)) {
      free_index[static_cast<std::size_t>(i)] = static_cast<int>(free_nodes.size());
      free_nodes.push_back(i);
    }
  return {std::move(free_nodes), std::move(free_index)};
}

inline int free_bandwidth(const Mesh& mesh, const std::vector<int>& free_index) {
  int band = 0;
  for (const auto& el : mesh.elements) {
    const int nv = mesh.nodes_per_element();
    for (int a = 0; a < nv; ++a)
      for (int b = 0; b < nv; ++b) {
        const int fa = free_index[static_cast<std::size_t>(el[a])];
        const int fb = free_index[static_cast<std::size_t>(el[b])];
        if (fa >= 0 && fb >= 0) band = std::max(band, std::abs(fa - fb));
      }
  }
  return band;
}

}  // namespace detail

// Energy of u: sum_e |e| (1/p(x_e)) |Du_e|^{p(x_e)} - c * integral(u).
// Reported unregularized.
inline double energy_only(const GridFunction& u, const ExponentField& p, double rhs_c) {
  const Mesh& mesh = *u.mesh;
  double energy = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const double w = mesh.element_measures[static_cast<std::size_t>(e)];
    const Vec& xq = mesh.element_barycenters[static_cast<std::size_t>(e)];
    const double pe = p(xq);
    const double gn = norm(element_gradient(u, e));
    const double pow_term = std::pow(gn, pe);
    if (!std::isfinite(pow_term)) throw Error("assemble: |Du|^p overflows the floating range");
    energy += w * (pow_term / pe - rhs_c * u.barycenter_value(e));
  }
  return energy;
}

// Full assembly. The regularization floor enters only the exponentiated
// factor of the residual and Hessian, only where p(x_e) < 2; the energy
// stays exact.
inline AssembledSystem assemble(const GridFunction& u, const ExponentField& p, double rhs_c,
                                double reg_floor = 1e-12) {
  if (reg_floor < 0.0) throw Error("assemble: reg_floor must be nonnegative");
  const Mesh& mesh = *u.mesh;
  AssembledSystem sys;
  auto [free_nodes, free_index] = detail::free_node_map(mesh);
  sys.free_nodes = std::move(free_nodes);
  sys.free_index = std::move(free_index);
  const int nfree = static_cast<int>(sys.free_nodes.size());
  sys.residual.assign(static_cast<std::size_t>(nfree), 0.0);
  sys.hessian = BandedSym(nfree, detail::free_bandwidth(mesh, sys.free_index));

  const int nv = mesh.nodes_per_element();
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto& el = mesh.elements[static_cast<std::size_t>(e)];
    const double w = mesh.element_measures[static_cast<std::size_t>(e)];
    const Vec& xq = mesh.element_barycenters[static_cast<std::size_t>(e)];
    const double pe = p(xq);
    const Vec du = element_gradient(u, e);
    const double gn = norm(du);

    const double pow_term = std::pow(gn, pe);
    if (!std::isfinite(pow_term)) throw Error("assemble: |Du|^p overflows the floating range");
    sys.energy += w * (pow_term / pe - rhs_c * u.barycenter_value(e));

    // flux factor m^{p-2}, clamped from below only in the singular range
    const double m = (pe < 2.0) ? std::max(gn, reg_floor) : gn;
    double factor;       // m^{p-2}
    bool clamped = false;
    if (m == 0.0) {
      factor = (pe == 2.0) ? 1.0 : 0.0;
    } else {
      factor = std::pow(m, pe - 2.0);
      clamped = (pe < 2.0) && (gn < reg_floor);
    }

    const auto hats = hat_gradients(mesh, e);

    for (int a = 0; a < nv; ++a) {
      const int fa = sys.free_index[static_cast<std::size_t>(el[a])];
      if (fa < 0) continue;
      sys.residual[static_cast<std::size_t>(fa)] +=
          w * (factor * dot(du, hats[static_cast<std::size_t>(a)]) - rhs_c / nv);
    }

    // d(m^{p-2} g)/dg: factor * (I + (p-2) ghat o ghat), or factor * I
    // while the clamp is active, or the p = 2 identity at g = 0.
    for (int a = 0; a < nv; ++a) {
      const int fa = sys.free_index[static_cast<std::size_t>(el[a])];
      if (fa < 0) continue;
      for (int b = 0; b < nv; ++b) {
        const int fb = sys.free_index[static_cast<std::size_t>(el[b])];
        if (fb < 0 || fb > fa) continue;
        const Vec& ga = hats[static_cast<std::size_t>(a)];
        const Vec& gb = hats[static_cast<std::size_t>(b)];
        double hab = factor * dot(ga, gb);
        if (!clamped && gn > 0.0)
          hab += factor * (pe - 2.0) * dot(du, ga) * dot(du, gb) / (gn * gn);
        sys.hessian.add(fa, fb, w * hab);
      }
    }
  }
  return sys;
}

}  // namespace pxlap
