#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qdx/errors.hpp"
#include "qdx/lens.hpp"

using namespace qdx;

namespace {

bool hasPoint(const FixedPointReport& rep, cplx z, FixedClass cls, double tol) {
  for (const auto& p : rep.points)
    if (!p.atInfinity && std::abs(p.z - z) <= tol && p.cls == cls) return true;
  return false;
}

}  // namespace

TEST_CASE("fixed-point polynomial of z/2 has the single root 0") {
  RationalMap r(ComplexPoly{0.0, 0.5}, ComplexPoly{1.0});
  ComplexPoly p = buildFixedPointPoly(r);
  REQUIRE(p.degree() == 1);
  CHECK(std::abs(allRoots(p)[0]) < 1e-15);
}

TEST_CASE("fixed-point polynomial of z^2") {
  RationalMap r(ComplexPoly{0.0, 0.0, 1.0}, ComplexPoly{1.0});
  ComplexPoly p = buildFixedPointPoly(r);
  CHECK(p.degree() == 4);
  // |z| in {0,1} and e^{-i t} = e^{2 i t}: the cube roots of unity and 0
  auto roots = allRoots(p);
  for (cplx w : {cplx(0.0), cplx(1.0), std::polar(1.0, 2 * std::numbers::pi / 3), std::polar(1.0, 4 * std::numbers::pi / 3)}) {
    double best = 1e9;
    for (const auto& z : roots) best = std::min(best, std::abs(z - w));
    CHECK(best < 1e-12);
  }
}

TEST_CASE("1/z gives a continuum of solutions") {
  RationalMap r(ComplexPoly{1.0}, ComplexPoly{0.0, 1.0});
  CHECK_THROWS_AS(buildFixedPointPoly(r), InputError);
}

TEST_CASE("z/2: attracting 0, repelling infinity") {
  RationalMap r(ComplexPoly{0.0, 0.5}, ComplexPoly{1.0});
  auto rep = solveLens(r);
  CHECK(rep.F == 1);
  CHECK(rep.Fhat == 2);
  CHECK(rep.Ahat == 1);
  CHECK(verifyLefschetz(rep) == 0);
  auto hs = heleShawLocalMin(r, 0.0, 0.1);
  CHECK(hs.hessianDet == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(hs.strictLocalMin);
  CHECK(std::abs(hs.qAtCenter) < 1e-15);
}

TEST_CASE("z^2 attains the sharp bound") {
  RationalMap r(ComplexPoly{0.0, 0.0, 1.0}, ComplexPoly{1.0});
  auto rep = solveLens(r);
  CHECK(rep.F == 4);
  CHECK(rep.Fhat == 5);
  CHECK(rep.Ahat == 2);
  CHECK(rep.n == 1);
  CHECK(verifyLefschetz(rep) == 0);
  CHECK(checkSharpBound(rep));
  CHECK(rep.Fhat == sharpBound(2, 1));
  auto hs = heleShawLocalMin(r, 1.0, 0.05);
  CHECK(hs.hessianDet == doctest::Approx(-3.0));
  CHECK_FALSE(hs.strictLocalMin);
}

TEST_CASE("2z/(z^2-1): superattracting +-i") {
  RationalMap r(ComplexPoly{0.0, 2.0}, ComplexPoly{-1.0, 0.0, 1.0});
  auto rep = solveLens(r);
  CHECK(hasPoint(rep, {0, 1}, FixedClass::Superattracting, 1e-10));
  CHECK(hasPoint(rep, {0, -1}, FixedClass::Superattracting, 1e-10));
  CHECK(verifyLefschetz(rep) == 0);
  CHECK(checkSharpBound(rep));
  CHECK(sharpBound(2, 2) == 5);
  auto hs = heleShawLocalMin(r, {0, 1}, 0.05);
  CHECK(hs.hessianDet == doctest::Approx(1.0));
  CHECK(hs.strictLocalMin);
}

TEST_CASE("z/2 + 1/z: superattracting +-sqrt 2") {
  RationalMap r(ComplexPoly{1.0, 0.0, 0.5}, ComplexPoly{0.0, 1.0});
  auto rep = solveLens(r);
  CHECK(hasPoint(rep, std::sqrt(2.0), FixedClass::Superattracting, 1e-10));
  CHECK(hasPoint(rep, -std::sqrt(2.0), FixedClass::Superattracting, 1e-10));
  CHECK(verifyLefschetz(rep) == 0);
}

TEST_CASE("z^2/2 + c^3/z: superattracting cube-root family") {
  const double c = 2.0 / 3.0;
  RationalMap r(ComplexPoly{c * c * c, 0.0, 0.0, 0.5}, ComplexPoly{0.0, 1.0});
  auto rep = solveLens(r);
  for (int j = 0; j < 3; ++j)
    CHECK(hasPoint(rep, std::polar(c, 2 * std::numbers::pi * j / 3), FixedClass::Superattracting, 1e-10));
  CHECK(verifyLefschetz(rep) == 0);
  CHECK(checkSharpBound(rep));
}

TEST_CASE("3z/2 - z^3/2: superattracting +-1") {
  RationalMap r(ComplexPoly{0.0, 1.5, 0.0, -0.5}, ComplexPoly{1.0});
  auto rep = solveLens(r);
  CHECK(hasPoint(rep, 1.0, FixedClass::Superattracting, 1e-10));
  CHECK(hasPoint(rep, -1.0, FixedClass::Superattracting, 1e-10));
  CHECK(verifyLefschetz(rep) == 0);
}

TEST_CASE("nonhyperbolic points refuse the Lefschetz check") {
  RationalMap id(ComplexPoly{0.0, 1.0, 0.5}, ComplexPoly{1.0});  // r'(0) = 1
  auto rep = solveLens(id);
  CHECK_FALSE(rep.hyperbolic);
  CHECK_THROWS_AS(verifyLefschetz(rep), InputError);
}

TEST_CASE("property: rotation equivariance") {
  // Conjugating by z -> e^{i t} z: r_t(z) = e^{i t} r(e^{i t} z) keeps conj-fixed points rotated by e^{-i t}.
  RationalMap r(ComplexPoly{0.3, 0.0, 0.5}, ComplexPoly{cplx(0.2, 0.1), 1.0});
  auto base = solveLens(r);
  for (double t : {0.3, 1.1, 2.5}) {
    cplx w = std::polar(1.0, t);
    std::vector<cplx> num, den;
    for (int k = 0; k <= r.numerator().degree(); ++k) num.push_back(w * r.numerator().coeff(k) * std::pow(w, k));
    for (int k = 0; k <= r.denominator().degree(); ++k) den.push_back(r.denominator().coeff(k) * std::pow(w, k));
    auto rot = solveLens(RationalMap(ComplexPoly(num), ComplexPoly(den)));
    CHECK(rot.F == base.F);
    for (const auto& p : base.points) {
      if (p.atInfinity) continue;
      cplx target = p.z * std::conj(w);
      bool found = false;
      for (const auto& q : rot.points)
        if (!q.atInfinity && std::abs(q.z - target) < 1e-8) found = true;
      CHECK(found);
    }
  }
}

TEST_CASE("lens map construction") {
  LensConfig one{0.0, 0.0, {1.0}, {0.0}};
  RationalMap r1 = lensFromMasses(one);
  CHECK(r1.degree() == 1);
  CHECK(std::abs(r1(cplx(2.0)) - 0.5) < 1e-15);

  LensConfig two{0.5, 0.0, {1.0, 1.0}, {1.0, -1.0}};
  RationalMap r2 = lensFromMasses(two);
  CHECK(r2.degree() == 3);
  CHECK(r2.distinctPoles() == 3);
  // residue at z = 1 is the mass
  double h = 1e-6;
  CHECK(std::abs(h * r2(1.0 + h) - 1.0) < 1e-5);

  LensConfig bad{0.5, 0.0, {1.0, 1.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(lensFromMasses(bad), InputError);
}

TEST_CASE("two-disk seed reproduces the image count and the threshold") {
  CHECK(std::abs(ellipseFeasibilityGamma() - 0.171573) < 5e-7);
  auto seed = twoDiskEllipseSeed(2, 0.5);
  LensConfig cfg{0.5, 0.0, {seed.radii[0] * seed.radii[0], seed.radii[1] * seed.radii[1]}, seed.centers};
  auto rep = solveLens(lensFromMasses(cfg));
  CHECK(checkSharpBound(rep));
  CHECK(verifyLefschetz(rep) == 0);
  auto res = searchMaxImages(2, seed, 10000, 1);
  CHECK(res.images == 9);
  CHECK_FALSE(res.shortfall);
  CHECK(res.config.gamma > ellipseFeasibilityGamma());
  CHECK(res.config.gamma < 1.0);
}

TEST_CASE("lens config json round trip") {
  LensConfig cfg{0.25, cplx(0.1, -0.2), {1.0, 2.0}, {cplx(0, 1), cplx(0, -1)}};
  LensConfig back = lensConfigFromJson(toJson(cfg));
  CHECK(back.gamma == cfg.gamma);
  CHECK(back.source == cfg.source);
  CHECK(back.masses == cfg.masses);
  CHECK(back.positions == cfg.positions);
}
