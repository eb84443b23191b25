#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "pxlap/linalg.hpp"
#include "pxlap/mesh.hpp"

namespace pxlap {

// Variable exponent p(x) with gradient and verified global bounds
// 1 < p_minus <= p(x) <= p_plus < infinity on the stated domain.
//
// Bounds are established by dense sampling (at least 256 points per
// axis) plus a check at element barycenters for tabulated fields; all
// downstream evaluation happens at mesh and quadrature points.
class ExponentField {
 public:
  enum class Kind { constant, affine, radial, tabulated };

  static ExponentField constant(double p0) {
    ExponentField f;
    f.kind_ = Kind::constant;
    f.p0_ = p0;
    f.p_minus_ = f.p_plus_ = p0;
    f.check_bounds();
    return f;
  }

  // p(x) = p0 + slope * (direction . x) on the given box.
  static ExponentField affine(double p0, double slope, const Vec& direction, const Box& domain) {
    ExponentField f;
    f.kind_ = Kind::affine;
    f.p0_ = p0;
    f.slope_ = slope;
    f.direction_ = direction;
    f.domain_ = domain;
    f.sample_box_bounds();
    f.check_bounds();
    return f;
  }

  // p(x) = p0 + slope * |x| for |x| <= max_radius. The gradient at the
  // origin is defined as 0; if slope != 0 the origin is not a C1 point
  // and is excluded from operator evaluation.
  static ExponentField radial(double p0, double slope, double max_radius) {
    ExponentField f;
    f.kind_ = Kind::radial;
    f.p0_ = p0;
    f.slope_ = slope;
    f.max_radius_ = max_radius;
    double lo = p0, hi = p0;
    const int samples = 4096;
    for (int i = 0; i <= samples; ++i) {
      const double r = max_radius * i / samples;
      const double v = p0 + slope * r;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    f.p_minus_ = lo;
    f.p_plus_ = hi;
    f.check_bounds();
    return f;
  }

  // Nodal p-values interpolated linearly on the mesh.
  static ExponentField tabulated(MeshPtr mesh, std::vector<double> nodal_p) {
    ExponentField f;
    f.kind_ = Kind::tabulated;
    f.table_ = std::make_shared<GridFunction>(std::move(mesh), std::move(nodal_p));
    double lo = f.table_->values[0], hi = lo;
    for (double v : f.table_->values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    // safety check at the quadrature points actually used downstream
    for (int e = 0; e < f.table_->mesh->element_count(); ++e) {
      const double v = f.table_->barycenter_value(e);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    f.p_minus_ = lo;
    f.p_plus_ = hi;
    f.domain_ = f.table_->mesh->extent;
    f.check_bounds();
    return f;
  }

  Kind kind() const { return kind_; }
  double p_minus() const { return p_minus_; }
  double p_plus() const { return p_plus_; }

  double operator()(const Vec& x) const {
    switch (kind_) {
      case Kind::constant:
        return p0_;
      case Kind::affine:
        return p0_ + slope_ * dot(direction_, x);
      case Kind::radial:
        return p0_ + slope_ * norm(x);
      case Kind::tabulated:
        return point_value(*table_, x);
    }
    return p0_;
  }

  Vec grad(const Vec& x) const {
    switch (kind_) {
      case Kind::constant:
        return Vec::zero(x.n);
      case Kind::affine: {
        Vec g = direction_;
        g.n = x.n;
        return slope_ * g;
      }
      case Kind::radial: {
        const double r = norm(x);
        if (r == 0.0) return Vec::zero(x.n);
        return (slope_ / r) * x;
      }
      case Kind::tabulated: {
        const int e = locate_element(x);
        return element_gradient(*table_, e);
      }
    }
    return Vec::zero(x.n);
  }

  // False exactly at points where p is not C1 (the origin of a radial
  // field with nonzero slope). Operators that need Dp refuse them.
  bool c1_at(const Vec& x) const {
    if (kind_ == Kind::radial && slope_ != 0.0) return norm(x) > 0.0;
    return true;
  }

  bool origin_flagged() const { return kind_ == Kind::radial && slope_ != 0.0; }

  // p'(x) = p(x)/(p(x)-1), as a plain evaluator.
  auto conjugate_eval() const {
    return [this](const Vec& x) {
      const double p = (*this)(x);
      return p / (p - 1.0);
    };
  }

 private:
  void check_bounds() const {
    if (!(p_minus_ > 1.0))
      throw Error("exponent field violates p > 1 (sampled minimum " + std::to_string(p_minus_) +
                  ")");
    if (!std::isfinite(p_plus_)) throw Error("exponent field unbounded above");
  }

  void sample_box_bounds() {
    const int per_axis = 256;
    double lo = 0.0, hi = 0.0;
    bool first = true;
    const int dim = domain_.dim();
    const int nj = dim >= 2 ? per_axis : 0;
    for (int i = 0; i <= per_axis; ++i) {
      for (int j = 0; j <= nj; ++j) {
        Vec x = Vec::zero(dim);
        x[0] = domain_.lo[0] + (domain_.hi[0] - domain_.lo[0]) * i / per_axis;
        if (dim >= 2) x[1] = domain_.lo[1] + (domain_.hi[1] - domain_.lo[1]) * j / per_axis;
        const double v = (*this)(x);
        if (first || v < lo) lo = v;
        if (first || v > hi) hi = v;
        first = false;
      }
    }
    p_minus_ = lo;
    p_plus_ = hi;
  }

  int locate_element(const Vec& x) const {
    const Mesh& mesh = *table_->mesh;
    if (mesh.dim == 1) {
      const double a = mesh.extent.lo[0];
      const double h = (mesh.extent.hi[0] - a) / (mesh.nx - 1);
      return std::clamp(static_cast<int>(std::floor((x[0] - a) / h)), 0, mesh.nx - 2);
    }
    const double ax = mesh.extent.lo[0], ay = mesh.extent.lo[1];
    const double hx = (mesh.extent.hi[0] - ax) / (mesh.nx - 1);
    const double hy = (mesh.extent.hi[1] - ay) / (mesh.ny - 1);
    const int ci = std::clamp(static_cast<int>(std::floor((x[0] - ax) / hx)), 0, mesh.nx - 2);
    const int cj = std::clamp(static_cast<int>(std::floor((x[1] - ay) / hy)), 0, mesh.ny - 2);
    const double s = (x[0] - (ax + ci * hx)) / hx;
    const double t = (x[1] - (ay + cj * hy)) / hy;
    const int cell = cj * (mesh.nx - 1) + ci;
    return 2 * cell + (s >= t ? 0 : 1);
  }

  Kind kind_ = Kind::constant;
  double p0_ = 2.0;
  double slope_ = 0.0;
  Vec direction_;
  Box domain_ = Box::unit(1);
  double max_radius_ = 1.0;
  std::shared_ptr<const GridFunction> table_;
  double p_minus_ = 2.0;
  double p_plus_ = 2.0;
};

}  // namespace pxlap
