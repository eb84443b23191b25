#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace pxlap {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Spatial vector of dimension 1..3, value semantics.
struct Vec {
  int n = 0;
  std::array<double, 3> a{0.0, 0.0, 0.0};

  Vec() = default;
  explicit Vec(double x) : n(1), a{x, 0.0, 0.0} {}
  Vec(double x, double y) : n(2), a{x, y, 0.0} {}
  Vec(double x, double y, double z) : n(3), a{x, y, z} {}

  static Vec zero(int dim) {
    Vec v;
    v.n = dim;
    return v;
  }

  double& operator[](int i) { return a[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return a[static_cast<std::size_t>(i)]; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < n; ++i) a[i] += o.a[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < n; ++i) a[i] -= o.a[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < n; ++i) a[i] *= s;
    return *this;
  }

  friend Vec operator+(Vec l, const Vec& r) { return l += r; }
  friend Vec operator-(Vec l, const Vec& r) { return l -= r; }
  friend Vec operator*(double s, Vec v) { return v *= s; }
  friend Vec operator*(Vec v, double s) { return v *= s; }
  friend Vec operator-(Vec v) { return v *= -1.0; }
};

inline double dot(const Vec& x, const Vec& y) {
  double s = 0.0;
  for (int i = 0; i < x.n; ++i) s += x[i] * y[i];
  return s;
}

inline double norm(const Vec& x) { return std::sqrt(dot(x, x)); }

inline Vec normalized(const Vec& x) {
  const double m = norm(x);
  if (m == 0.0) throw Error("normalized: zero vector");
  return (1.0 / m) * x;
}

// Axis-aligned box, doubles as the sampling domain of an exponent field.
struct Box {
  Vec lo;
  Vec hi;

  int dim() const { return lo.n; }

  double diameter() const {
    return norm(hi - lo);
  }

  bool contains(const Vec& x, double slack = 0.0) const {
    for (int i = 0; i < lo.n; ++i)
      if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
    return true;
  }

  static Box unit(int dim) {
    Box b;
    b.lo = Vec::zero(dim);
    b.hi = Vec::zero(dim);
    for (int i = 0; i < dim; ++i) b.hi[i] = 1.0;
    return b;
  }
};

// Symmetric n x n matrix, n = 1..3. Dense row-major storage; the
// symmetry invariant is enforced at the points where full matrices
// enter (from_entries).
struct SymMat {
  int n = 0;
  std::array<double, 9> m{};

  static SymMat zero(int dim) {
    SymMat s;
    s.n = dim;
    return s;
  }

  static SymMat identity(int dim) {
    SymMat s = zero(dim);
    for (int i = 0; i < dim; ++i) s.at(i, i) = 1.0;
    return s;
  }

  // Builds from a full row-major matrix; rejects asymmetry beyond sym_tol.
  static SymMat from_entries(int dim, const double* entries, double sym_tol = 1e-12) {
    SymMat s = zero(dim);
    double worst = 0.0;
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        const double aij = entries[i * dim + j];
        const double aji = entries[j * dim + i];
        worst = std::max(worst, std::abs(aij - aji));
        s.at(i, j) = 0.5 * (aij + aji);
      }
    if (worst > sym_tol)
      throw Error("SymMat: matrix not symmetric, max |A - A^T| = " + std::to_string(worst));
    return s;
  }

  static SymMat outer(const Vec& v) {
    SymMat s = zero(v.n);
    for (int i = 0; i < v.n; ++i)
      for (int j = 0; j < v.n; ++j) s.at(i, j) = v[i] * v[j];
    return s;
  }

  double& at(int i, int j) { return m[static_cast<std::size_t>(i * n + j)]; }
  double at(int i, int j) const { return m[static_cast<std::size_t>(i * n + j)]; }

  Vec apply(const Vec& x) const {
    Vec y = Vec::zero(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) y[i] += at(i, j) * x[j];
    return y;
  }

  // x' M x
  double quad(const Vec& x) const { return dot(apply(x), x); }

  double trace() const {
    double t = 0.0;
    for (int i = 0; i < n; ++i) t += at(i, i);
    return t;
  }

  SymMat& operator+=(const SymMat& o) {
    for (int i = 0; i < n * n; ++i) m[i] += o.m[i];
    return *this;
  }
  SymMat& operator*=(double s) {
    for (int i = 0; i < n * n; ++i) m[i] *= s;
    return *this;
  }
  friend SymMat operator+(SymMat l, const SymMat& r) { return l += r; }
  friend SymMat operator*(double s, SymMat a) { return a *= s; }
};

struct EigenSym {
  int n = 0;
  std::array<double, 3> values{};   // ascending
  std::array<Vec, 3> vectors{};     // matching, orthonormal

  double lambda_min() const { return values[0]; }
  double lambda_max() const { return values[static_cast<std::size_t>(n - 1)]; }
};

// Cyclic Jacobi eigendecomposition for symmetric matrices up to 3x3.
inline EigenSym sym_eigen(const SymMat& A) {
  const int n = A.n;
  SymMat D = A;
  double V[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(D.at(i, j)));
  if (scale == 0.0) scale = 1.0;

  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off = std::max(off, std::abs(D.at(i, j)));
    if (off <= 1e-15 * scale) break;

    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = D.at(p, q);
        if (std::abs(apq) <= 1e-18 * scale) continue;
        const double theta = (D.at(q, q) - D.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        const double app = D.at(p, p), aqq = D.at(q, q);
        D.at(p, p) = app - t * apq;
        D.at(q, q) = aqq + t * apq;
        D.at(p, q) = D.at(q, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = D.at(k, p), akq = D.at(k, q);
          D.at(k, p) = D.at(p, k) = c * akp - s * akq;
          D.at(k, q) = D.at(q, k) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = V[k][p], vkq = V[k][q];
          V[k][p] = c * vkp - s * vkq;
          V[k][q] = s * vkp + c * vkq;
        }
      }
  }

  EigenSym e;
  e.n = n;
  int order[3] = {0, 1, 2};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (D.at(order[j], order[j]) < D.at(order[i], order[i])) std::swap(order[i], order[j]);
  for (int i = 0; i < n; ++i) {
    e.values[static_cast<std::size_t>(i)] = D.at(order[i], order[i]);
    Vec v = Vec::zero(n);
    for (int k = 0; k < n; ++k) v[k] = V[k][order[i]];
    e.vectors[static_cast<std::size_t>(i)] = v;
  }
  return e;
}

// Symmetric square root via eigendecomposition; requires A >= 0 up to roundoff.
inline SymMat sym_sqrt(const SymMat& A) {
  const EigenSym e = sym_eigen(A);
  SymMat s = SymMat::zero(A.n);
  for (int k = 0; k < A.n; ++k) {
    double lam = e.values[static_cast<std::size_t>(k)];
    if (lam < 0.0) {
      if (lam < -1e-12 * std::max(1.0, std::abs(e.lambda_max())))
        throw Error("sym_sqrt: matrix has a negative eigenvalue");
      lam = 0.0;
    }
    const double r = std::sqrt(lam);
    const Vec& v = e.vectors[static_cast<std::size_t>(k)];
    for (int i = 0; i < A.n; ++i)
      for (int j = 0; j < A.n; ++j) s.at(i, j) += r * v[i] * v[j];
  }
  return s;
}

}  // namespace pxlap
