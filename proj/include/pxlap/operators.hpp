#pragma once

#include <cmath>
#include <limits>

#include "pxlap/exponent.hpp"
#include "pxlap/linalg.hpp"

namespace pxlap {

// Second-order jet: a point, a value, a gradient, and a symmetric Hessian.
struct Jet2 {
  Vec x;
  double value = 0.0;
  Vec xi;
  SymMat X;

  Jet2() = default;
  Jet2(const Vec& x_, double value_, const Vec& xi_, const SymMat& X_)
      : x(x_), value(value_), xi(xi_), X(X_) {}

  static Jet2 from_hessian_entries(const Vec& x, double value, const Vec& xi,
                                   const double* hessian_row_major) {
    return Jet2(x, value, xi, SymMat::from_entries(xi.n, hessian_row_major));
  }
};

enum class Branch { regular, envelope_lambda_min, envelope_lambda_max, singular };

inline const char* branch_name(Branch b) {
  switch (b) {
    case Branch::regular: return "regular";
    case Branch::envelope_lambda_min: return "envelope_lambda_min";
    case Branch::envelope_lambda_max: return "envelope_lambda_max";
    case Branch::singular: return "singular";
  }
  return "regular";
}

struct OperatorValue {
  double value = 0.0;
  Branch branch = Branch::regular;
};

// Below this magnitude log|xi| is not evaluated; the divergence-form
// wrapper reports the singular branch instead of overflowing.
inline constexpr double kGradientFloor = 1e-300;

namespace detail {

inline void require_nonzero_gradient(const Vec& xi, const char* who) {
  if (norm(xi) < kGradientFloor)
    throw Error(std::string(who) + ": gradient vanishes at the evaluation point");
}

inline void require_c1(const ExponentField& p, const Vec& x, const char* who) {
  if (!p.c1_at(x))
    throw Error(std::string(who) + ": exponent is not C1 at the evaluation point");
}

}  // namespace detail

// |xi|^{p(x)-2} xi, extended by 0 at xi = 0 (the limit value, p > 1).
inline Vec flux(const Vec& x, const Vec& xi, const ExponentField& p) {
  const double m = norm(xi);
  if (m == 0.0) return Vec::zero(xi.n);
  return std::pow(m, p(x) - 1.0) * normalized(xi);
}

// Normalized infinity-Laplacian X xi.xi / |xi|^2; requires xi != 0.
inline double infinity_lap(const Jet2& jet) {
  detail::require_nonzero_gradient(jet.xi, "infinity_lap");
  const double m2 = dot(jet.xi, jet.xi);
  return jet.X.quad(jet.xi) / m2;
}

// Expanded divergence-form operator
//   |xi|^{p-2} ( trace X + Dp.xi log|xi| + (p-2) X xi.xi/|xi|^2 ).
// Test functions with vanishing gradient are refused.
inline double pxlap_expanded(const Jet2& jet, const ExponentField& p) {
  detail::require_nonzero_gradient(jet.xi, "pxlap_expanded");
  detail::require_c1(p, jet.x, "pxlap_expanded");
  const double m = norm(jet.xi);
  const double pv = p(jet.x);
  const double lap = jet.X.trace();
  const double inf_lap = jet.X.quad(jet.xi) / (m * m);
  const double log_term = dot(p.grad(jet.x), jet.xi) * std::log(m);
  const double v = std::pow(m, pv - 2.0) * (lap + log_term + (pv - 2.0) * inf_lap);
  if (!std::isfinite(v)) throw Error("pxlap_expanded: overflow");
  return v;
}

// A(x, xi) = |xi|^{p-2} (I + (p-2) xihat o xihat); symmetric positive definite.
inline SymMat matrix_A(const Vec& x, const Vec& xi, const ExponentField& p) {
  detail::require_nonzero_gradient(xi, "matrix_A");
  const double m = norm(xi);
  const double pv = p(x);
  const Vec u = normalized(xi);
  SymMat a = SymMat::identity(xi.n);
  a += (pv - 2.0) * SymMat::outer(u);
  a *= std::pow(m, pv - 2.0);
  return a;
}

// B(x, xi) = |xi|^{p-2} log|xi| (xi . Dp).
inline double scalar_B(const Vec& x, const Vec& xi, const ExponentField& p) {
  detail::require_nonzero_gradient(xi, "scalar_B");
  detail::require_c1(p, x, "scalar_B");
  const double m = norm(xi);
  return std::pow(m, p(x) - 2.0) * std::log(m) * dot(xi, p.grad(x));
}

// F(x, xi, X) = trace(A X) + B; algebraically equal to pxlap_expanded.
inline double jet_form_F(const Jet2& jet, const ExponentField& p) {
  const SymMat a = matrix_A(jet.x, jet.xi, p);
  double tr = 0.0;
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) tr += a.at(i, j) * jet.X.at(j, i);
  return tr + scalar_B(jet.x, jet.xi, p);
}

struct SqrtALambdaMin {
  double closed_form = 0.0;  // min{1, sqrt(p-1)} |xi|^{(p-2)/2}
  double numeric = 0.0;      // smallest eigenvalue of sqrtm(A)
};

inline SqrtALambdaMin sqrt_A_lambda_min_routes(const Vec& x, const Vec& xi,
                                               const ExponentField& p) {
  detail::require_nonzero_gradient(xi, "sqrt_A_lambda_min");
  const double m = norm(xi);
  const double pv = p(x);
  SqrtALambdaMin r;
  r.closed_form = std::min(1.0, std::sqrt(pv - 1.0)) * std::pow(m, 0.5 * (pv - 2.0));
  r.numeric = sym_eigen(sym_sqrt(matrix_A(x, xi, p))).lambda_min();
  return r;
}

// Smallest eigenvalue of A^{1/2}; the closed form and the eigenvalue
// route must agree to 1e-8 relative.
inline double sqrt_A_lambda_min(const Vec& x, const Vec& xi, const ExponentField& p) {
  const SqrtALambdaMin r = sqrt_A_lambda_min_routes(x, xi, p);
  if (std::abs(r.closed_form - r.numeric) > 1e-8 * std::max(1.0, std::abs(r.closed_form)))
    throw Error("sqrt_A_lambda_min: closed-form and eigenvalue routes disagree");
  return r.closed_form;
}

// Normalized operator trace X + (p-2) X xihat.xihat with semicontinuous
// envelope branches at xi = 0: the lambda_min substitution when p < 2
// and lambda_max when p >= 2.
inline OperatorValue normalized_pxlap(const Jet2& jet, const ExponentField& p) {
  const double pv = p(jet.x);
  const double lap = jet.X.trace();
  if (norm(jet.xi) >= kGradientFloor) {
    const double m2 = dot(jet.xi, jet.xi);
    return {lap + (pv - 2.0) * jet.X.quad(jet.xi) / m2, Branch::regular};
  }
  const EigenSym e = sym_eigen(jet.X);
  if (pv < 2.0) return {lap + (pv - 2.0) * e.lambda_min(), Branch::envelope_lambda_min};
  return {lap + (pv - 2.0) * e.lambda_max(), Branch::envelope_lambda_max};
}

// Divergence-form evaluation with the tiny-gradient guard: below the
// floor, p(x) < 2 reports the singular branch; p(x) >= 2 is refused
// like every other vanishing-gradient request.
inline OperatorValue divergence_form(const Jet2& jet, const ExponentField& p) {
  if (norm(jet.xi) < kGradientFloor) {
    if (p(jet.x) < 2.0)
      return {std::numeric_limits<double>::quiet_NaN(), Branch::singular};
    throw Error("divergence_form: gradient vanishes at the evaluation point");
  }
  return {pxlap_expanded(jet, p), Branch::regular};
}

struct MonoGap {
  double lhs = 0.0;
  double bound = 0.0;
};

// Monotonicity gap (flux(xi) - flux(eta)) . (xi - eta) with its lower
// bound: 2^{2-p} |xi-eta|^p for p >= 2, else (p-1)|xi-eta|^2 / (|xi|+|eta|)^{2-p}.
inline MonoGap mono_gap(const Vec& x, const Vec& xi, const Vec& eta, const ExponentField& p) {
  const double pv = p(x);
  MonoGap g;
  const Vec d = xi - eta;
  g.lhs = dot(flux(x, xi, p) - flux(x, eta, p), d);
  const double dn = norm(d);
  if (pv >= 2.0) {
    g.bound = std::pow(2.0, 2.0 - pv) * std::pow(dn, pv);
  } else {
    const double denom = std::pow(norm(xi) + norm(eta), 2.0 - pv);
    g.bound = denom > 0.0 ? (pv - 1.0) * dn * dn / denom : 0.0;
  }
  const double slack = 1e-12 * (1.0 + std::abs(g.lhs));
  if (g.lhs + slack < g.bound) throw Error("mono_gap: lower bound violated");
  if (dn > 0.0 && !(g.lhs > 0.0)) throw Error("mono_gap: gap not strictly positive");
  return g;
}

}  // namespace pxlap
