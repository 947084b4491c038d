#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qdx/errors.hpp"
#include "qdx/quad.hpp"

using namespace qdx;

namespace {

const double kPi = std::numbers::pi;

// Area moment of f(D) by brute-force polar quadrature of f^k |f'|^2.
cplx bruteMoment(const ComplexPoly& f, int k) {
  const int nr = 400, nt = 400;
  ComplexPoly fp = f.derivative();
  cplx acc = 0.0;
  for (int i = 0; i < nr; ++i) {
    double r = (i + 0.5) / nr;
    for (int j = 0; j < nt; ++j) {
      cplx w = std::polar(r, 2 * kPi * j / nt);
      cplx fw = f(w);
      cplx p = 1.0;
      for (int e = 0; e < k; ++e) p *= fw;
      acc += p * std::norm(fp(w)) * r;
    }
  }
  return acc * (1.0 / nr) * (2 * kPi / nt);
}

}  // namespace

TEST_CASE("series inverse of z + z^2/2") {
  auto g = seriesInverse(ComplexPoly{0.0, 1.0, 0.5}, 5);
  // w = sqrt(1 + 2z) - 1: z - z^2/2 + z^3/2 - 5 z^4/8 + 7 z^5/8
  CHECK(std::abs(g[1] - 1.0) < 1e-15);
  CHECK(std::abs(g[2] + 0.5) < 1e-15);
  CHECK(std::abs(g[3] - 0.5) < 1e-15);
  CHECK(std::abs(g[4] + 0.625) < 1e-15);
  CHECK(std::abs(g[5] - 0.875) < 1e-15);
  CHECK_THROWS_AS(seriesInverse(ComplexPoly{1.0, 1.0}, 3), InputError);
}

TEST_CASE("disk: principal part 1/z") {
  auto q = schwarzPrincipalPart(ComplexPoly{0.0, 1.0});
  REQUIRE(q.nodes.size() == 1);
  CHECK(std::abs(q.nodes[0].principal[0] - 1.0) < 1e-15);
}

TEST_CASE("cardioid: principal part 3/(2z) + 1/(2z^2)") {
  auto q = schwarzPrincipalPart(ComplexPoly{0.0, 1.0, 0.5});
  REQUIRE(q.nodes[0].principal.size() == 2);
  CHECK(std::abs(q.nodes[0].principal[0] - 1.5) < 1e-15);
  CHECK(std::abs(q.nodes[0].principal[1] - 0.5) < 1e-15);
  auto m = verifyQuadratureIdentity(ComplexPoly{0.0, 1.0, 0.5}, 3);
  CHECK(std::abs(m[0].areaSide - 1.5 * kPi) < 1e-14);
  CHECK(std::abs(m[0].contourSide - 1.5 * kPi) < 1e-14);
  CHECK(std::abs(m[1].contourSide - 0.5 * kPi) < 1e-14);
  CHECK(std::abs(m[1].areaSide - 0.5 * kPi) < 1e-14);
  CHECK(areaTheorem(ComplexPoly{0.0, 1.0, 0.5}) == doctest::Approx(1.5 * kPi));
}

TEST_CASE("moments agree with brute-force quadrature") {
  ComplexPoly f{0.0, 1.0, cplx(0.2, 0.1), cplx(-0.05, 0.08)};
  auto m = verifyQuadratureIdentity(f, 3);
  for (int k = 0; k <= 3; ++k) CHECK(std::abs(m[k].areaSide - bruteMoment(f, k)) < 1e-4);
}

TEST_CASE("property: quadrature identity holds for random small polynomials") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    int d = 1 + trial % 6;
    std::vector<cplx> a(d + 1, 0.0);
    a[1] = cplx(1.0 + 0.3 * U(rng), 0.3 * U(rng));
    for (int k = 2; k <= d; ++k) a[k] = cplx(U(rng), U(rng)) * (0.3 / (k * d));
    auto m = verifyQuadratureIdentity(ComplexPoly(a), 2 * d);
    for (const auto& r : m) CHECK(r.residual <= 1e-12);
  }
}
