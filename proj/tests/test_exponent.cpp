#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pxlap/exponent.hpp"
#include "pxlap/mesh.hpp"

using namespace pxlap;

TEST_CASE("constant field") {
  const ExponentField p = ExponentField::constant(2.0);
  CHECK(p(Vec(0.3)) == 2.0);
  CHECK(norm(p.grad(Vec(0.3))) == 0.0);
  CHECK(p.p_minus() == 2.0);
  CHECK(p.p_plus() == 2.0);
}

TEST_CASE("affine field on the unit square") {
  const ExponentField p =
      ExponentField::affine(2.0, 0.5, Vec(1.0, 0.0), Box::unit(2));
  CHECK(p.p_minus() == doctest::Approx(2.0));
  CHECK(p.p_plus() == doctest::Approx(2.5));
  const Vec g = p.grad(Vec(0.3, 0.7));
  CHECK(g[0] == doctest::Approx(0.5));
  CHECK(g[1] == doctest::Approx(0.0));
}

TEST_CASE("radial field bounds on the unit disk") {
  const ExponentField p = ExponentField::radial(1.5, 0.3, 1.0);
  CHECK(p.p_minus() == doctest::Approx(1.5));
  CHECK(p.p_plus() == doctest::Approx(1.8));
  const Vec x(0.3, 0.4);
  const Vec g = p.grad(x);
  const Vec expected = (0.3 / norm(x)) * x;
  CHECK(norm(g - expected) <= 1e-12);
  CHECK(p.origin_flagged());
  CHECK_FALSE(p.c1_at(Vec(0.0, 0.0)));
  CHECK(norm(p.grad(Vec(0.0, 0.0))) == 0.0);
}

TEST_CASE("fields violating p > 1 are rejected") {
  CHECK_THROWS_AS(ExponentField::constant(1.0), Error);
  CHECK_THROWS_AS(ExponentField::constant(0.5), Error);
  // dips to 2 - 1.5 = 0.5 at the right edge
  CHECK_THROWS_AS(ExponentField::affine(2.0, -1.5, Vec(1.0), Box::unit(1)), Error);
  CHECK_THROWS_AS(ExponentField::radial(1.2, -0.5, 1.0), Error);
}

TEST_CASE("bound sandwich over random domain points") {
  const ExponentField fields[] = {
      ExponentField::affine(2.0, 0.5, Vec(1.0, 0.0), Box::unit(2)),
      ExponentField::radial(1.5, 0.3, std::sqrt(2.0)),
  };
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const ExponentField& p : fields) {
    for (int i = 0; i < 10000; ++i) {
      const Vec x(unit(rng), unit(rng));
      const double v = p(x);
      CHECK(v >= p.p_minus() - 1e-12);
      CHECK(v <= p.p_plus() + 1e-12);
    }
  }
}

TEST_CASE("gradient matches central differences at second order") {
  // affine: finite differences are exact
  const ExponentField aff = ExponentField::affine(2.0, 0.5, Vec(0.6, 0.8), Box::unit(2));
  const Vec x0(0.4, 0.3);
  for (double h : {1e-2, 1e-3}) {
    for (int k = 0; k < 2; ++k) {
      Vec xp = x0, xm = x0;
      xp[k] += h;
      xm[k] -= h;
      const double fd = (aff(xp) - aff(xm)) / (2.0 * h);
      CHECK(std::abs(fd - aff.grad(x0)[k]) <= 1e-11);
    }
  }

  // radial: error must shrink at observed order >= 1.9
  const ExponentField rad = ExponentField::radial(1.5, 0.3, 2.0);
  const Vec y0(0.37, 0.21);
  double errs[2];
  int idx = 0;
  for (double h : {1e-2, 1e-3}) {
    double worst = 0.0;
    for (int k = 0; k < 2; ++k) {
      Vec xp = y0, xm = y0;
      xp[k] += h;
      xm[k] -= h;
      const double fd = (rad(xp) - rad(xm)) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - rad.grad(y0)[k]));
    }
    errs[idx++] = worst;
  }
  const double order = std::log10(errs[0] / errs[1]);
  CHECK(order >= 1.9);
}

TEST_CASE("tabulated field interpolates nodal values") {
  MeshPtr mesh = make_mesh(1, Box::unit(1), 17);
  std::vector<double> pv;
  for (const Vec& x : mesh->nodes) pv.push_back(2.0 + 0.3 * std::sin(2.0 * M_PI * x[0]));
  const ExponentField p = ExponentField::tabulated(mesh, pv);
  CHECK(p.p_minus() > 1.0);
  CHECK(p(mesh->nodes[3]) == doctest::Approx(pv[3]));
  // midpoint of element 3 interpolates linearly
  const double mid = 0.5 * (mesh->nodes[3][0] + mesh->nodes[4][0]);
  CHECK(p(Vec(mid)) == doctest::Approx(0.5 * (pv[3] + pv[4])));

  std::vector<double> bad(pv);
  bad[5] = 0.9;
  CHECK_THROWS_AS(ExponentField::tabulated(mesh, bad), Error);
}
