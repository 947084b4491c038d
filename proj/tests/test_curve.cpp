#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qdx/curve.hpp"
#include "qdx/errors.hpp"

using namespace qdx;

namespace {

const double kPi = std::numbers::pi;
const double kS2 = std::sqrt(2.0);

BoundaryMap cardioid() { return BoundaryMap::fromTaylor({0.0, 1.0, 0.5}); }
BoundaryMap deltoid() { return BoundaryMap::fromLaurentTail({0.0, -0.5}); }
BoundaryMap cubicExtreme() { return BoundaryMap::fromTaylor({0.0, 1.0, 2 * kS2 / 3, 1.0 / 3}); }
BoundaryMap quarticExtreme() {
  double A = 0.5 * std::sqrt(3 * (std::sqrt(15.0) - 3));
  double t = std::acos(3.0 / 16 * std::sqrt(9 + 5 * std::sqrt(15.0))) / 3;
  return BoundaryMap::fromTaylor({0.0, 1.0, 1.5 * A * std::polar(1.0, t), A * std::polar(1.0, -t), 0.25});
}
BoundaryMap talbot() { return BoundaryMap::fromLaurentTail({2.0 / 3, 0.0, -1.0 / 3}); }
BoundaryMap sigma4() { return BoundaryMap::fromLaurentTail({-5.0 / 8, -5.0 / 16, 0.0, -0.25}); }
BoundaryMap sigma5() { return BoundaryMap::fromLaurentTail({0.0, 2 * kS2 / 5, 0.0, 0.0, -0.2}); }

}  // namespace

TEST_CASE("boundary derivatives match finite differences") {
  for (const auto& f : {cubicExtreme(), sigma4()}) {
    for (double t : {0.1, 1.3, 4.0}) {
      double h = 1e-5;
      cplx fd = (f.at(t + h) - f.at(t - h)) / (2 * h);
      CHECK(std::abs(fd - f.velocity(t)) < 1e-8);
      cplx fd2 = (f.velocity(t + h) - f.velocity(t - h)) / (2 * h);
      CHECK(std::abs(fd2 - f.acceleration(t)) < 1e-7);
    }
  }
}

TEST_CASE("cardioid has one cusp at t = pi") {
  auto cusps = findCusps(cardioid());
  REQUIRE(cusps.size() == 1);
  CHECK(std::abs(cusps[0].t - kPi) < 1e-12);
  CHECK(std::abs(cusps[0].point - cplx(-0.5)) < 1e-12);
}

TEST_CASE("deltoid has three cusps at the cube roots of -1") {
  auto cusps = findCusps(deltoid());
  REQUIRE(cusps.size() == 3);
  for (const auto& c : cusps) {
    cplx z = std::polar(1.0, c.t);
    CHECK(std::abs(z * z * z + 1.0) < 1e-12);
  }
}

TEST_CASE("double point counts on catalog curves") {
  CHECK(findDoublePoints(cardioid()).empty());
  CHECK(findDoublePoints(deltoid()).empty());
  auto dp3 = findDoublePoints(cubicExtreme());
  REQUIRE(dp3.size() == 1);
  CHECK(dp3[0].tangential);
  CHECK(dp3[0].tMinus < dp3[0].tPlus);
  CHECK(std::abs(cubicExtreme().at(dp3[0].tMinus) - cubicExtreme().at(dp3[0].tPlus)) < 1e-9);
  auto dp5 = findDoublePoints(sigma5());
  CHECK(dp5.size() == 3);
  for (const auto& p : dp5) CHECK(p.tangential);
}

TEST_CASE("constant conformal curvature") {
  CHECK(conformalCurvature(cardioid(), 0.0) == doctest::Approx(1.5).epsilon(1e-14));
  for (double t : {0.0, 0.5, 2.0, 4.0}) CHECK(conformalCurvature(deltoid(), t) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(starredCurvature(Family::S, 2) == 1.5);
  CHECK(starredCurvature(Family::Sigma, 2) == -0.5);
  // starred S_3 curve: kappa = 2 wherever regular
  for (double t : {0.3, 1.0, 2.2}) CHECK(conformalCurvature(cubicExtreme(), t) == doctest::Approx(2.0).epsilon(1e-10));
  for (double t : {0.3, 1.0, 2.2}) CHECK(conformalCurvature(sigma5(), t) == doctest::Approx(-2.0).epsilon(1e-10));
}

TEST_CASE("double point angle relation") {
  auto c5 = analyzeCurve(sigma5());
  CHECK(verifyDoubleAngleRelation(c5) <= 1e-6);
  auto c3 = analyzeCurve(cubicExtreme());
  CHECK(verifyDoubleAngleRelation(c3) <= 1e-6);
  CHECK(verifyDoubleAngleRelation(analyzeCurve(cardioid())) == 0.0);
}

TEST_CASE("univalence verdicts") {
  CHECK((isUnivalent(cardioid()).verdict == Verdict::True));
  CHECK((isUnivalent(deltoid()).verdict == Verdict::True));
  CHECK((isUnivalent(cubicExtreme()).verdict == Verdict::True));
  CHECK((isUnivalent(sigma4()).verdict == Verdict::True));
  auto bad = isUnivalent(BoundaryMap::fromTaylor({0.0, 1.0, 1.0}));
  CHECK((bad.verdict == Verdict::False));
  BoundaryMap g = BoundaryMap::fromTaylor({0.0, 1.0, 1.0});
  CHECK(std::abs(g.at(bad.witnessT1) - g.at(bad.witnessT2)) < 1e-6);
}

TEST_CASE("singularity census of the catalog") {
  auto c = census(quarticExtreme());
  CHECK(c.cuspCount == 3);
  CHECK(c.doublePointCount == 2);
  CHECK(c.isExtreme);

  auto t = census(talbot());
  CHECK(t.cuspCount == 4);
  CHECK(t.doublePointCount == 1);
  CHECK(t.isExtreme);

  auto id = census(BoundaryMap::fromTaylor({0.0, 1.0}));
  CHECK(id.cuspCount == 0);
  CHECK(id.doublePointCount == 0);
  CHECK_FALSE(id.isExtreme);

  auto s5 = census(BoundaryMap::fromTaylor({0.0, 1.0, 1.6 * std::sqrt(2.0 / 3), 1.2, 0.8 * std::sqrt(2.0 / 3), 0.2}));
  CHECK(s5.cuspCount == 4);
  CHECK(s5.doublePointCount == 3);
  CHECK(s5.isExtreme);
}

TEST_CASE("complement faces of the quartic exterior curve are deltoid-like") {
  auto curve = analyzeCurve(sigma4());
  auto faces = componentAnalysis(sigma4(), curve);
  int bounded = 0;
  for (const auto& f : faces) {
    if (f.isDomain || !f.bounded) continue;
    ++bounded;
    CHECK(f.cusps + f.doublePoints == 3);
    CHECK(f.classification == "deltoid-like");
  }
  CHECK(bounded == 3);
}

TEST_CASE("cardioid complement is a single cardioid-like face") {
  auto curve = analyzeCurve(cardioid());
  auto faces = componentAnalysis(cardioid(), curve);
  int complement = 0;
  for (const auto& f : faces) {
    if (f.isDomain) {
      CHECK(f.classification == "cardioid-like");
      continue;
    }
    ++complement;
    CHECK_FALSE(f.bounded);
    CHECK(f.cusps == 1);
  }
  CHECK(complement == 1);
}

TEST_CASE("caps") {
  CHECK(cuspCap(Family::S, 4) == 3);
  CHECK(doublePointCap(Family::S, 4) == 2);
  CHECK(cuspCap(Family::Sigma, 4) == 5);
  CHECK(doublePointCap(Family::Sigma, 4) == 2);
}

TEST_CASE("property: census is invariant under rotation") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 2 * kPi);
  for (int i = 0; i < 4; ++i) {
    double phi = U(rng);
    auto c = census(cubicExtreme().rotated(phi));
    CHECK(c.cuspCount == 2);
    CHECK(c.doublePointCount == 1);
    auto s = census(talbot().rotated(phi));
    CHECK(s.cuspCount == 4);
    CHECK(s.doublePointCount == 1);
  }
}

TEST_CASE("property: winding number of random small perturbations of z stays 1") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    int d = 2 + trial % 5;
    std::vector<cplx> a(d + 1, 0.0);
    a[1] = 1.0;
    // sum k |a_k| < 1 keeps f' nonvanishing on the closed disk
    for (int k = 2; k <= d; ++k) a[k] = cplx(U(rng), U(rng)) * (0.4 / (k * (d - 1)));
    BoundaryMap f = BoundaryMap::fromTaylor(a);
    CHECK(windingNumber(samplePolyline(f, 512), f(0.0)) == 1);
    CHECK((isUnivalent(f, 512).verdict == Verdict::True));
  }
}

TEST_CASE("map json round trip") {
  auto f = sigma4();
  auto g = boundaryMapFromJson(toJson(f));
  CHECK((g.family() == Family::Sigma));
  CHECK(g.degree() == 4);
  CHECK(std::abs(g.at(0.7) - f.at(0.7)) < 1e-15);
}
