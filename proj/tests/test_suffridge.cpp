#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qdx/curve.hpp"
#include "qdx/errors.hpp"
#include "qdx/suffridge.hpp"

using namespace qdx;

namespace {

const double kPi = std::numbers::pi;

// One tangential double point in S*_4: z - (3/2)c z^2 - c z^3 + z^4/4, c = (sqrt 5 - 1)/4.
BoundaryMap quarticOneContact() {
  double c = (std::sqrt(5.0) - 1) / 4;
  return BoundaryMap::fromTaylor({0.0, 1.0, -1.5 * c, -c, 0.25});
}

double lineGap(cplx a, cplx b) {
  double cr = (std::conj(a) * b).imag(), dt = (std::conj(a) * b).real();
  return std::atan2(std::abs(cr), std::abs(dt));
}

void checkExtreme(const ExtremalizeResult& r, Family fam, int d) {
  CHECK(r.extreme);
  CHECK(r.cusps == cuspCap(fam, d));
  CHECK(r.doublePoints == d - 2);
  CHECK(r.curvatureDeviation <= 1e-8);
  CHECK(r.doubleAngleResidual <= 1e-6);
  CHECK(satisfiesSelfDuality(r.f, 1e-10));
  CHECK((isUnivalent(r.f, 4096).verdict == Verdict::True));
  auto c = census(r.f);
  CHECK(c.isExtreme);
}

}  // namespace

TEST_CASE("catalog coefficients") {
  auto s2 = knownSuffridge(Family::S, 2);
  CHECK(s2.laurent().coeff(2) == cplx(0.5));
  auto s4 = knownSuffridge(Family::S, 4);
  double A = 0.5 * std::sqrt(3 * (std::sqrt(15.0) - 3));
  CHECK(std::abs(s4.laurent().coeff(3)) == doctest::Approx(A));
  CHECK(std::abs(s4.laurent().coeff(2)) == doctest::Approx(1.5 * A));
  auto g4 = knownSuffridge(Family::Sigma, 4);
  CHECK(g4.laurent().coeff(-1) == cplx(-5.0 / 8));
  CHECK(g4.laurent().coeff(-2) == cplx(-5.0 / 16));
  CHECK(g4.laurent().coeff(-4) == cplx(-0.25));
  CHECK_THROWS_AS(knownSuffridge(Family::S, 6), InputError);
  CHECK_THROWS_AS(knownSuffridge(Family::Sigma, 1), InputError);
}

TEST_CASE("catalog maps are extreme with constant conformal curvature") {
  for (Family fam : {Family::S, Family::Sigma}) {
    for (int d = 2; d <= 5; ++d) {
      auto f = knownSuffridge(fam, d);
      CHECK(satisfiesSelfDuality(f, 1e-12));
      auto c = census(f);
      CHECK(c.cuspCount == cuspCap(fam, d));
      CHECK(c.doublePointCount == d - 2);
      CHECK(c.isExtreme);
    }
  }
}

TEST_CASE("self-dual perturbation basis") {
  auto b3 = selfDualBasis(Family::S, 3);
  REQUIRE(b3.size() == 1);
  CHECK(b3[0].coeff(2) == cplx(1.0));
  CHECK(b3[0].coeff(3) == cplx(0.0));

  auto b4 = selfDualBasis(Family::S, 4);
  REQUIRE(b4.size() == 2);
  CHECK(std::abs(b4[0].coeff(2) - 0.5) < 1e-15);
  CHECK(std::abs(b4[0].coeff(3) - 1.0 / 3) < 1e-15);
  CHECK(std::abs(b4[1].coeff(2) - cplx(0, 0.5)) < 1e-15);
  CHECK(std::abs(b4[1].coeff(3) - cplx(0, -1.0 / 3)) < 1e-15);

  auto s4 = selfDualBasis(Family::Sigma, 4);
  REQUIRE(s4.size() == 2);
  for (const auto& r : s4) CHECK(r.coeff(-3) == cplx(0.0));

  for (Family fam : {Family::S, Family::Sigma})
    for (int d = 3; d <= 8; ++d) {
      auto b = selfDualBasis(fam, d);
      CHECK(static_cast<int>(b.size()) == d - 2);
      for (const auto& r : b) CHECK(directionSatisfiesSelfDuality(fam, d, r));
    }
  CHECK_THROWS_AS(selfDualBasis(Family::S, 2), InputError);
}

TEST_CASE("property: random basis combinations keep the derivative self-dual") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    Family fam = trial % 2 ? Family::S : Family::Sigma;
    int d = 3 + trial % 5;
    LaurentPoly r;
    for (const auto& b : selfDualBasis(fam, d)) r = r + b * U(rng);
    BoundaryMap g = perturbed(symmetricStart(fam, d), r, U(rng));
    CHECK(satisfiesSelfDuality(g, 1e-12));
  }
}

TEST_CASE("perturbation direction with no double points is the first basis element") {
  auto st = perturbationDirection(symmetricStart(Family::S, 3), {});
  REQUIRE(st.coefficients.size() == 1);
  CHECK(st.coefficients[0] == 1.0);
  CHECK(st.direction.coeff(2) == cplx(1.0));
}

TEST_CASE("perturbation direction keeps the tangent lines of a double point together") {
  BoundaryMap f = quarticOneContact();
  auto dps = findDoublePoints(f);
  REQUIRE(dps.size() == 1);
  CHECK(dps[0].tangential);
  auto st = perturbationDirection(f, dps);
  CHECK(st.nullity == 1);
  CHECK(std::abs(st.r2Residuals[0]) <= 1e-10);
  CHECK(directionSatisfiesSelfDuality(Family::S, 4, st.direction));
  // The chord between the two preimage points stays along the common tangent.
  for (double delta : {0.05, -0.2}) {
    BoundaryMap g = perturbed(f, st.direction, delta);
    cplx chord = g.at(dps[0].tPlus) - g.at(dps[0].tMinus);
    CHECK(std::abs(chord) > 1e-4);
    CHECK(lineGap(chord, g.velocity(dps[0].tPlus)) < 1e-10);
    CHECK(lineGap(chord, g.velocity(dps[0].tMinus)) < 1e-10);
  }
}

TEST_CASE("perturbation direction signals an extreme map") {
  auto f = knownSuffridge(Family::S, 3);
  CHECK_THROWS_AS(perturbationDirection(f, findDoublePoints(f)), AlreadyExtreme);
}

TEST_CASE("univalence interval of the cubic family matches the extreme coefficient") {
  // z + a z^2 + z^3/3 is univalent iff |a| <= 2 sqrt 2 / 3, the extreme cubic.
  BoundaryMap f = symmetricStart(Family::S, 3);
  LaurentPoly r = selfDualBasis(Family::S, 3)[0];
  auto iv = maxUnivalentDelta(f, r);
  const double a = 2 * std::sqrt(2.0) / 3;
  CHECK(iv.deltaMax == doctest::Approx(a).epsilon(1e-8));
  CHECK(iv.deltaMin == doctest::Approx(-a).epsilon(1e-8));
  CHECK((isUnivalent(perturbed(f, r, iv.deltaMax)).verdict == Verdict::True));
  auto beyond = isUnivalent(perturbed(f, r, 1.001 * iv.deltaMax));
  CHECK((beyond.verdict == Verdict::False));
  // The failing map has a new contact near the witness.
  BoundaryMap g = perturbed(f, r, 1.001 * iv.deltaMax);
  CHECK(std::abs(g.at(beyond.witnessT1) - g.at(beyond.witnessT2)) < 1e-3);
}

TEST_CASE("univalence interval around a map with a double point") {
  BoundaryMap f = quarticOneContact();
  auto st = perturbationDirection(f, findDoublePoints(f));
  auto iv = maxUnivalentDelta(f, st.direction);
  CHECK(iv.deltaMin < 0);
  CHECK(iv.deltaMax > 0);
  for (double delta : {iv.deltaMin, iv.deltaMax}) {
    BoundaryMap g = perturbed(f, st.direction, delta);
    CHECK(findCusps(g).size() == 3);
    CHECK((isUnivalent(g).verdict == Verdict::True));
    CHECK((isUnivalent(perturbed(f, st.direction, 1.01 * delta)).verdict == Verdict::False));
  }
}

TEST_CASE("extremalize reaches the quartic extreme polynomial") {
  auto r = extremalize(symmetricStart(Family::S, 4));
  checkExtreme(r, Family::S, 4);
  CHECK(r.catalogDistance >= 0);
  REQUIRE_FALSE(r.trace.empty());
  size_t lastN = 0;
  for (const auto& rec : r.trace) {
    CHECK(rec.contains("round"));
    CHECK(rec.contains("delta"));
    if (rec["accepted"].get<bool>()) {
      CHECK(rec["census"]["cusps"] == 3);
      CHECK(rec["census"]["doublePoints"].get<size_t>() > rec["N"].get<size_t>());
      CHECK(rec["N"].get<size_t>() >= lastN);
      lastN = rec["N"].get<size_t>();
    }
  }
}

TEST_CASE("extremalize in degree six") {
  auto r = extremalize(symmetricStart(Family::S, 6));
  checkExtreme(r, Family::S, 6);
}

TEST_CASE("extremalize in the exterior class, degree five") {
  auto r = extremalize(symmetricStart(Family::Sigma, 5));
  checkExtreme(r, Family::Sigma, 5);
}

TEST_CASE("extremalize rejects a non-univalent start") {
  CHECK_THROWS_AS(extremalize(BoundaryMap::fromTaylor({0.0, 1.0, 1.0, 1.0 / 3})), InputError);
}

TEST_CASE("symmetry distance") {
  auto f = knownSuffridge(Family::S, 4);
  CHECK(distanceUpToSymmetry(f.rotated(2 * kPi / 3), f) < 1e-14);
  CHECK(distanceUpToSymmetry(f, f) == 0.0);
}
