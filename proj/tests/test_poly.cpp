#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qdx/errors.hpp"
#include "qdx/poly.hpp"

using namespace qdx;

namespace {

// Greedy nearest matching; returns the largest pairing distance.
double matchDistance(std::vector<cplx> a, std::vector<cplx> b) {
  if (a.size() != b.size()) return 1e300;
  double worst = 0.0;
  for (const auto& x : a) {
    auto it = std::min_element(b.begin(), b.end(), [&](cplx p, cplx q) { return std::abs(p - x) < std::abs(q - x); });
    worst = std::max(worst, std::abs(*it - x));
    b.erase(it);
  }
  return worst;
}

}  // namespace

TEST_CASE("roots of z^2 + 1") {
  auto r = allRoots(ComplexPoly{1.0, 0.0, 1.0});
  CHECK(matchDistance(r, {cplx(0, 1), cplx(0, -1)}) < 1e-14);
}

TEST_CASE("derivative of the cubic extreme polynomial has unit-circle roots") {
  const double s2 = std::sqrt(2.0);
  auto info = rootsWithCircleFlag(ComplexPoly{1.0, 4.0 * s2 / 3.0, 1.0});
  // quadratic formula: z = (-b +- sqrt(b^2 - 4)) / 2 with b = 4 sqrt2 / 3
  double b = 4.0 * s2 / 3.0;
  cplx disc = std::sqrt(cplx(b * b - 4.0, 0.0));
  std::vector<cplx> oracle{(-b + disc) / 2.0, (-b - disc) / 2.0};
  std::vector<cplx> got;
  for (const auto& ri : info) {
    got.push_back(ri.z);
    CHECK(ri.onUnitCircle);
  }
  CHECK(matchDistance(got, oracle) < 1e-14);
  CHECK(matchDistance(got, {cplx(-2 * s2, 1) / 3.0, cplx(-2 * s2, -1) / 3.0}) < 1e-14);
}

TEST_CASE("z^4 - (2/3) z^2 + 1 has four unit roots") {
  auto r = allRoots(ComplexPoly{1.0, 0.0, -2.0 / 3.0, 0.0, 1.0});
  REQUIRE(r.size() == 4);
  cplx w1(1.0 / 3.0, 2.0 * std::sqrt(2.0) / 3.0);
  cplx w2 = std::conj(w1);
  std::vector<cplx> oracle{std::sqrt(w1), -std::sqrt(w1), std::sqrt(w2), -std::sqrt(w2)};
  CHECK(matchDistance(r, oracle) < 1e-13);
  for (const auto& z : r) CHECK(std::abs(std::abs(z) - 1.0) < 1e-13);
}

TEST_CASE("root finder rejects constants") {
  CHECK_THROWS_AS(allRoots(ComplexPoly{3.0}), InputError);
}

TEST_CASE("multiple roots are located") {
  // (z-1)^3 (z+2)
  ComplexPoly p = ComplexPoly{-1.0, 1.0} * ComplexPoly{-1.0, 1.0} * ComplexPoly{-1.0, 1.0} * ComplexPoly{2.0, 1.0};
  auto r = allRoots(p);
  CHECK(matchDistance(r, {1.0, 1.0, 1.0, -2.0}) < 1e-4);
}

TEST_CASE("property: roots are invariant under monic rescaling") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  std::uniform_int_distribution<int> deg(1, 10);
  for (int trial = 0; trial < 200; ++trial) {
    int n = deg(rng);
    std::vector<cplx> c(n + 1);
    for (auto& a : c) a = {U(rng), U(rng)};
    if (std::abs(c.back()) < 0.1) c.back() = 1.0;
    ComplexPoly p(c);
    ComplexPoly monic = p * (1.0 / p.leading());
    auto r1 = allRoots(p), r2 = allRoots(monic);
    CHECK(r1.size() == static_cast<size_t>(n));
    CHECK(matchDistance(r1, r2) < 1e-8);
    for (const auto& z : r1) CHECK(std::abs(p(z)) <= 1e-10 * p.absEval(std::abs(z)));
  }
}

TEST_CASE("dualize examples") {
  CHECK(isSelfDual(ComplexPoly{1.0, 1.0}, 1, 1e-15));
  ComplexPoly d = dualize(ComplexPoly{1.0, 2.0}, 1);
  CHECK(d.coeff(0) == cplx(2.0));
  CHECK(d.coeff(1) == cplx(1.0));
  CHECK_FALSE(isSelfDual(ComplexPoly{1.0, 2.0}, 1, 1e-12));
  CHECK_THROWS_AS(dualize(ComplexPoly{1.0, 0.0, 1.0}, 1), InputError);
}

TEST_CASE("derivative of the cubic extreme polynomial is self-dual in slot 2") {
  const double s2 = std::sqrt(2.0);
  ComplexPoly f{0.0, 1.0, 2.0 * s2 / 3.0, 1.0 / 3.0};
  CHECK(isSelfDual(f.derivative(), 2, 1e-15));
}

TEST_CASE("deltoid cleared derivative z^3 + 1 is self-dual in slot 3") {
  // f(z) = z - 1/(2 z^2): f'(z) = 1 + z^{-3}, and z^3 f'(z) = z^3 + 1.
  LaurentPoly f(-2, {-0.5, 0.0, 0.0, 1.0});
  ComplexPoly cleared = (f.derivative() * 1.0).clearedNumerator();
  // derivative has low power -3: coefficients of z^-3..z^0
  CHECK(cleared.degree() == 3);
  CHECK(isSelfDual(cleared, 3, 1e-15));
}

TEST_CASE("property: dualize is an involution") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    int k = 1 + trial % 9;
    int deg = trial % (k + 1);
    std::vector<cplx> c(deg + 1);
    for (auto& a : c) a = {U(rng), U(rng)};
    ComplexPoly p(c);
    ComplexPoly back = dualize(dualize(p, k), k);
    for (int j = 0; j <= k; ++j) CHECK(std::abs(back.coeff(j) - p.coeff(j)) <= 1e-14);
  }
}

TEST_CASE("property: unit-circle critical points with the product rule give self-dual derivatives") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(0.0, 2.0 * std::numbers::pi);
  for (int trial = 0; trial < 100; ++trial) {
    int d = 2 + trial % 6;
    std::vector<double> th(d - 1);
    double sum = 0.0;
    for (int j = 0; j + 1 < d - 1; ++j) {
      th[j] = U(rng);
      sum += th[j];
    }
    // product of roots (-1)^{d-1} e^{i sum} must equal (-1)^{d-1} * f'(0)/lead = (-1)^{d-1}
    th[d - 2] = std::numbers::pi * (d - 1) - sum;
    ComplexPoly fp{1.0};
    for (double t : th) fp = fp * ComplexPoly{-std::polar(1.0, t), 1.0};
    CHECK(std::abs(fp.coeff(0) - 1.0) < 1e-12);
    CHECK(isSelfDual(fp, d - 1, 1e-12));
  }
}

TEST_CASE("rational map bookkeeping") {
  RationalMap r(ComplexPoly{0.0, 2.0}, ComplexPoly{-1.0, 0.0, 1.0});
  CHECK(r.degree() == 2);
  CHECK(r.finitePoles().size() == 2);
  CHECK(r.distinctPoles() == 2);
  CHECK(r.infinityPoleOrder() == 0);

  RationalMap sq(ComplexPoly{0.0, 0.0, 1.0}, ComplexPoly{1.0});
  CHECK(sq.distinctPoles() == 1);
  CHECK(sq.infinityPoleOrder() == 2);

  RationalMap dbl(ComplexPoly{1.0}, ComplexPoly{1.0, -2.0, 1.0});
  REQUIRE(dbl.finitePoles().size() == 1);
  CHECK(dbl.finitePoles()[0].multiplicity == 2);

  CHECK_THROWS_AS(RationalMap(ComplexPoly{-1.0, 1.0}, ComplexPoly{-1.0, 0.0, 1.0}), InputError);
}

TEST_CASE("rational syntax parses") {
  RationalMap r = parseRational("[[0,0],[2,0]]/[[ -1,0],[0,0],[1,0]]");
  CHECK(r.degree() == 2);
  CHECK(std::abs(r(cplx(2.0)) - cplx(4.0 / 3.0)) < 1e-15);
  CHECK_THROWS_AS(parseRational("[[0,0],[2,0]/[1]"), InputError);
}
