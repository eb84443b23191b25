#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pxlap/operators.hpp"

using namespace pxlap;

namespace {

Jet2 make_jet(const Vec& x, const Vec& xi, std::initializer_list<double> hessian) {
  std::vector<double> h(hessian);
  return Jet2::from_hessian_entries(x, 0.0, xi, h.data());
}

// p = 2 + x1/4 on [-2.5, 2.5]^2, safely inside (1, infinity)
const ExponentField kAffine2d = ExponentField::affine(
    2.0, 0.25, Vec(1.0, 0.0), Box{Vec(-2.5, -2.5), Vec(2.5, 2.5)});
// p = 2 + x1 on a box that keeps p > 1
const ExponentField kAffineUnitSlope = ExponentField::affine(
    2.0, 1.0, Vec(1.0, 0.0), Box{Vec(-0.5, -0.5), Vec(4.0, 4.0)});

}  // namespace

TEST_CASE("flux values") {
  const ExponentField p2 = ExponentField::constant(2.0);
  const Vec f2 = flux(Vec(0.0, 0.0), Vec(3.0, 4.0), p2);
  CHECK(f2[0] == doctest::Approx(3.0));
  CHECK(f2[1] == doctest::Approx(4.0));

  const ExponentField p15 = ExponentField::constant(1.5);
  const Vec f0 = flux(Vec(0.0, 0.0), Vec::zero(2), p15);
  CHECK(norm(f0) == 0.0);

  const ExponentField p3 = ExponentField::constant(3.0);
  const Vec f3 = flux(Vec(0.0, 0.0), Vec(3.0, 4.0), p3);
  CHECK(f3[0] == doctest::Approx(15.0));
  CHECK(f3[1] == doctest::Approx(20.0));
}

TEST_CASE("expanded operator on hand-checked jets") {
  const ExponentField p2 = ExponentField::constant(2.0);
  const Jet2 j1 = make_jet(Vec(0.2, 0.4), Vec(1.0, -2.0), {3.0, 0.5, 0.5, -1.0});
  CHECK(pxlap_expanded(j1, p2) == doctest::Approx(2.0));  // trace

  // phi = |x|^2/2 at (1,0): xi = (1,0), X = I, p = 3 gives 2 + 1 = 3
  const ExponentField p3 = ExponentField::constant(3.0);
  const Jet2 j2 = make_jet(Vec(1.0, 0.0), Vec(1.0, 0.0), {1.0, 0.0, 0.0, 1.0});
  CHECK(pxlap_expanded(j2, p3) == doctest::Approx(3.0));

  // affine exponent: log|xi| = 0 kills the Dp term at |xi| = 1
  CHECK(pxlap_expanded(j2, kAffineUnitSlope) == doctest::Approx(3.0));

  CHECK_THROWS_AS(pxlap_expanded(make_jet(Vec(1.0, 0.0), Vec::zero(2), {1.0, 0.0, 0.0, 1.0}), p3),
                  Error);
}

TEST_CASE("matrix A eigenstructure") {
  const ExponentField p2 = ExponentField::constant(2.0);
  const SymMat a2 = matrix_A(Vec(0.0, 0.0), Vec(0.3, -0.7), p2);
  CHECK(a2.at(0, 0) == doctest::Approx(1.0));
  CHECK(a2.at(1, 1) == doctest::Approx(1.0));
  CHECK(a2.at(0, 1) == doctest::Approx(0.0));

  const ExponentField p3 = ExponentField::constant(3.0);
  const SymMat a3 = matrix_A(Vec(0.0, 0.0), Vec(1.0, 0.0), p3);
  CHECK(a3.at(0, 0) == doctest::Approx(2.0));
  CHECK(a3.at(1, 1) == doctest::Approx(1.0));

  const ExponentField p15 = ExponentField::constant(1.5);
  const SymMat a15 = matrix_A(Vec(0.0, 0.0), Vec(0.0, 2.0), p15);
  const double scale = std::pow(2.0, -0.5);
  CHECK(a15.at(0, 0) == doctest::Approx(scale));
  CHECK(a15.at(1, 1) == doctest::Approx(0.5 * scale));

  // eigenvalues are |xi|^{p-2} (n-1 fold) and (p-1)|xi|^{p-2}
  const EigenSym e = sym_eigen(a3);
  CHECK(e.lambda_min() == doctest::Approx(1.0));
  CHECK(e.lambda_max() == doctest::Approx(2.0));
  CHECK_THROWS_AS(matrix_A(Vec(0.0, 0.0), Vec::zero(2), p3), Error);
}

TEST_CASE("scalar B term") {
  const ExponentField p3 = ExponentField::constant(3.0);
  CHECK(scalar_B(Vec(0.5, 0.5), Vec(2.0, 1.0), p3) == 0.0);  // Dp = 0
  CHECK(scalar_B(Vec(0.5, 0.5), Vec(0.6, 0.8), kAffineUnitSlope) == doctest::Approx(0.0));  // |xi| = 1
  // p = 2 + x1 at the origin, xi = (e, 0): e^0 * 1 * e = e
  const double e = std::exp(1.0);
  CHECK(scalar_B(Vec(0.0, 0.0), Vec(e, 0.0), kAffineUnitSlope) == doctest::Approx(e));
}

TEST_CASE("jet form equals the expanded operator on random jets") {
  std::mt19937_64 rng(271);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> logmag(std::log(1e-3), std::log(1e3));
  std::uniform_real_distribution<double> entry(-3.0, 3.0);
  std::uniform_real_distribution<double> pconst(1.1, 4.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec x(coord(rng), coord(rng));
    const double mag = std::exp(logmag(rng));
    const double ang = coord(rng);
    const Vec xi = mag * Vec(std::cos(ang), std::sin(ang));
    SymMat X = SymMat::zero(2);
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j) X.at(i, j) = X.at(j, i) = entry(rng);
    const Jet2 jet(x, 0.0, xi, X);
    const ExponentField p = trial % 2 == 0
                                ? ExponentField::constant(pconst(rng))
                                : kAffine2d;
    const double f = jet_form_F(jet, p);
    const double ex = pxlap_expanded(jet, p);
    CHECK(std::abs(f - ex) <= 1e-10 * (1.0 + std::abs(f)));
  }
}

TEST_CASE("sqrt A lambda_min: closed form vs eigen route") {
  const ExponentField p2 = ExponentField::constant(2.0);
  CHECK(sqrt_A_lambda_min(Vec(0.0, 0.0), Vec(0.4, 0.6), p2) == doctest::Approx(1.0));

  const ExponentField p3 = ExponentField::constant(3.0);
  CHECK(sqrt_A_lambda_min(Vec(0.0, 0.0), Vec(1.0, 0.0), p3) == doctest::Approx(1.0));

  const ExponentField p15 = ExponentField::constant(1.5);
  CHECK(sqrt_A_lambda_min(Vec(0.0, 0.0), Vec(0.0, 4.0), p15) ==
        doctest::Approx(std::sqrt(0.5) * std::pow(4.0, -0.25)));

  std::mt19937_64 rng(331);
  std::uniform_real_distribution<double> logmag(std::log(1e-3), std::log(1e3));
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> pconst(1.1, 4.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double mag = std::exp(logmag(rng));
    const Vec xi = mag * Vec(std::cos(ang(rng)), std::sin(ang(rng)));
    const ExponentField p = ExponentField::constant(pconst(rng));
    const SqrtALambdaMin r = sqrt_A_lambda_min_routes(Vec(0.3, 0.1), xi, p);
    CHECK(std::abs(r.closed_form - r.numeric) <= 1e-8 * std::max(1.0, std::abs(r.closed_form)));
  }
}

TEST_CASE("normalized operator envelope branches") {
  const ExponentField p2 = ExponentField::constant(2.0);
  const Jet2 j0 = make_jet(Vec(0.0, 0.0), Vec::zero(2), {1.0, 0.0, 0.0, -1.0});
  CHECK(normalized_pxlap(j0, p2).value == doctest::Approx(0.0));  // trace in all branches

  const ExponentField p3 = ExponentField::constant(3.0);
  const OperatorValue v3 = normalized_pxlap(j0, p3);
  CHECK(v3.value == doctest::Approx(1.0));
  CHECK(v3.branch == Branch::envelope_lambda_max);

  const ExponentField p15 = ExponentField::constant(1.5);
  const OperatorValue v15 = normalized_pxlap(j0, p15);
  CHECK(v15.branch == Branch::envelope_lambda_min);
  CHECK(v15.value == doctest::Approx(0.0 + (1.5 - 2.0) * (-1.0)));

  const ExponentField p4 = ExponentField::constant(4.0);
  const Jet2 j1 = make_jet(Vec(0.0, 0.0), Vec(1.0, 0.0), {1.0, 0.0, 0.0, 1.0});
  const OperatorValue v4 = normalized_pxlap(j1, p4);
  CHECK(v4.value == doctest::Approx(4.0));
  CHECK(v4.branch == Branch::regular);
}

TEST_CASE("envelope branch selection matches the sign of p - 2 on random jets") {
  std::mt19937_64 rng(577);
  std::uniform_real_distribution<double> entry(-3.0, 3.0);
  std::uniform_real_distribution<double> pconst(1.1, 4.0);
  for (int trial = 0; trial < 1000; ++trial) {
    SymMat X = SymMat::zero(2);
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j) X.at(i, j) = X.at(j, i) = entry(rng);
    const double pv = pconst(rng);
    const ExponentField p = ExponentField::constant(pv);
    const Jet2 jet(Vec(0.0, 0.0), 0.0, Vec::zero(2), X);
    const OperatorValue v = normalized_pxlap(jet, p);
    if (pv >= 2.0) CHECK(v.branch == Branch::envelope_lambda_max);
    else CHECK(v.branch == Branch::envelope_lambda_min);
    // the p >= 2 branch dominates the p < 2 branch on the same X
    const EigenSym e = sym_eigen(X);
    CHECK(e.lambda_max() >= e.lambda_min());
  }
}

TEST_CASE("divergence form guard at vanishing gradients") {
  const ExponentField p15 = ExponentField::constant(1.5);
  const Jet2 j0 = make_jet(Vec(0.0, 0.0), Vec::zero(2), {1.0, 0.0, 0.0, 1.0});
  const OperatorValue v = divergence_form(j0, p15);
  CHECK(v.branch == Branch::singular);
  CHECK(std::isnan(v.value));

  const ExponentField p3 = ExponentField::constant(3.0);
  CHECK_THROWS_AS(divergence_form(j0, p3), Error);

  const Jet2 j1 = make_jet(Vec(0.0, 0.0), Vec(1.0, 1.0), {1.0, 0.0, 0.0, 1.0});
  CHECK(divergence_form(j1, p3).branch == Branch::regular);
}

TEST_CASE("monotonicity gap lower bounds") {
  const ExponentField p2 = ExponentField::constant(2.0);
  const MonoGap eq = mono_gap(Vec(0.0, 0.0), Vec(0.7, -0.3), Vec(0.7, -0.3), p2);
  CHECK(eq.lhs == 0.0);
  CHECK(eq.bound == 0.0);

  const MonoGap ortho = mono_gap(Vec(0.0, 0.0), Vec(1.0, 0.0), Vec(0.0, 1.0), p2);
  CHECK(ortho.lhs == doctest::Approx(2.0));
  CHECK(ortho.bound == doctest::Approx(2.0));

  const ExponentField p15 = ExponentField::constant(1.5);
  const MonoGap zz = mono_gap(Vec(0.0, 0.0), Vec::zero(2), Vec::zero(2), p15);
  CHECK(zz.bound == 0.0);

  std::mt19937_64 rng(733);
  std::uniform_real_distribution<double> entry(-3.0, 3.0);
  std::uniform_real_distribution<double> pconst(1.1, 4.5);
  for (int trial = 0; trial < 10000; ++trial) {
    const Vec xi(entry(rng), entry(rng));
    const Vec eta(entry(rng), entry(rng));
    const ExponentField p = ExponentField::constant(pconst(rng));
    const MonoGap g = mono_gap(Vec(0.0, 0.0), xi, eta, p);  // throws on violation
    CHECK(g.lhs >= g.bound - 1e-12 * (1.0 + std::abs(g.lhs)));
    CHECK(g.bound >= 0.0);
    if (norm(xi - eta) > 0.0) CHECK(g.lhs > 0.0);
  }
}

TEST_CASE("infinity laplacian stays between the extreme eigenvalues") {
  const Jet2 ji = make_jet(Vec(0.0, 0.0), Vec(0.3, 0.9), {1.0, 0.0, 0.0, 1.0});
  CHECK(infinity_lap(ji) == doctest::Approx(1.0));

  const Jet2 je = make_jet(Vec(0.0, 0.0), Vec(1.0, 0.0), {2.0, 0.0, 0.0, -1.0});
  CHECK(infinity_lap(je) == doctest::Approx(2.0));

  std::mt19937_64 rng(997);
  std::uniform_real_distribution<double> entry(-3.0, 3.0);
  for (int trial = 0; trial < 1000; ++trial) {
    SymMat X = SymMat::zero(2);
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j) X.at(i, j) = X.at(j, i) = entry(rng);
    const Vec xi(entry(rng), entry(rng));
    if (norm(xi) == 0.0) continue;
    const double v = infinity_lap(Jet2(Vec(0.0, 0.0), 0.0, xi, X));
    const EigenSym e = sym_eigen(X);
    CHECK(v >= e.lambda_min() - 1e-12);
    CHECK(v <= e.lambda_max() + 1e-12);
  }
  CHECK_THROWS_AS(infinity_lap(make_jet(Vec(0.0, 0.0), Vec::zero(2), {1.0, 0.0, 0.0, 1.0})),
                  Error);
}

TEST_CASE("central-difference divergence of the flux matches the expanded operator") {
  // phi = sin(x1) + cos(x2) + 0.25 x1 x2, gradient bounded away from zero
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
  const ExponentField p = kAffine2d;

  const auto fd_divergence = [&](double h) {
    double div = 0.0;
    for (int k = 0; k < 2; ++k) {
      Vec xp = x0, xm = x0;
      xp[k] += h;
      xm[k] -= h;
      div += (flux(xp, grad_phi(xp), p)[k] - flux(xm, grad_phi(xm), p)[k]) / (2.0 * h);
    }
    return div;
  };
  const double exact = pxlap_expanded(Jet2(x0, 0.0, grad_phi(x0), hess_phi(x0)), p);
  const double e1 = std::abs(fd_divergence(1e-2) - exact);
  const double e2 = std::abs(fd_divergence(5e-3) - exact);
  const double order = std::log(e1 / e2) / std::log(2.0);
  CHECK(order >= 1.9);
}

TEST_CASE("jets reject asymmetric Hessians") {
  const double bad[4] = {1.0, 0.5, 0.5 + 1e-6, 1.0};
  CHECK_THROWS_AS(Jet2::from_hessian_entries(Vec(0.0, 0.0), 0.0, Vec(1.0, 0.0), bad), Error);
}

TEST_CASE("operators refuse the non-C1 origin of a radial exponent") {
  const ExponentField rad = ExponentField::radial(1.5, 0.3, 2.0);
  const Jet2 at_origin = make_jet(Vec(0.0, 0.0), Vec(1.0, 0.0), {1.0, 0.0, 0.0, 1.0});
  CHECK_THROWS_AS(pxlap_expanded(at_origin, rad), Error);
  const Jet2 off_origin = make_jet(Vec(0.5, 0.0), Vec(1.0, 0.0), {1.0, 0.0, 0.0, 1.0});
  CHECK(std::isfinite(pxlap_expanded(off_origin, rad)));
}
