#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qdx/curve.hpp"
#include "qdx/errors.hpp"
#include "qdx/inscribe.hpp"

using namespace qdx;

namespace {

const double kPi = std::numbers::pi;

double lineAngle(cplx a, cplx b) {
  double c = std::abs((std::conj(a) * b).imag()), d = std::abs((std::conj(a) * b).real());
  return std::atan2(c, d);
}

PlaneArc circleArc(double radius, double t0, double t1, bool clockwise) {
  PlaneArc a;
  a.s0 = t0;
  a.s1 = t1;
  double sgn = clockwise ? -1.0 : 1.0;
  a.pos = [=](double s) { return radius * std::polar(1.0, sgn * s); };
  a.vel = [=](double s) { return radius * sgn * cplx(0, 1) * std::polar(1.0, sgn * s); };
  a.acc = [=](double s) { return -radius * std::polar(1.0, sgn * s); };
  return a;
}

}  // namespace

TEST_CASE("similarity transforms compose and invert") {
  SimilarityTransform a{0.3, 2.0, cplx(1, -1)}, b{-1.1, 0.5, cplx(0.2, 0.7)};
  cplx z(0.4, 0.9);
  CHECK(std::abs(a.compose(b).apply(z) - a.apply(b.apply(z))) < 1e-15);
  CHECK(std::abs(a.inverse().apply(a.apply(z)) - z) < 1e-15);
}

TEST_CASE("classification of the genuine curves") {
  PlaneCurve c = genuineCardioid();
  CHECK(c.classification == "cardioid-like");
  REQUIRE(c.cusps.size() == 1);
  CHECK((c.cusps[0].kind == CuspKind::Inward));
  CHECK(std::abs(c.cusps[0].point - cplx(-0.5)) < 1e-12);

  PlaneCurve d = genuineDeltoid();
  CHECK(d.classification == "deltoid-like");
  REQUIRE(d.cusps.size() == 3);
  for (const auto& v : d.cusps) CHECK((v.kind == CuspKind::Outward));
  CHECK(d.concArc >= 0);

  CHECK(unitCircle().classification == "other");
}

TEST_CASE("bounded faces of the quartic exterior curve classify as deltoid-like") {
  BoundaryMap f = BoundaryMap::fromLaurentTail({-5.0 / 8, -5.0 / 16, 0.0, -0.25});
  BoundaryCurve curve = analyzeCurve(f);
  int n = 0;
  for (const auto& face : componentAnalysis(f, curve)) {
    if (face.isDomain || !face.bounded) continue;
    ++n;
    CHECK(faceCurve(f, curve, face).classification == "deltoid-like");
  }
  CHECK(n == 3);
}

TEST_CASE("two-tangent cardioid on a circular arc is symmetric") {
  // Concave arc: clockwise circle of radius 2 around the origin seen from outside,
  // traversed so that the region (outside the disk) is on the left.
  PlaneArc gamma = circleArc(2.0, -kPi / 2 - 0.6, -kPi / 2 + 0.6, false);
  gamma = reversed(gamma);
  // region left of travel: the disk exterior; tangent turns right.
  double mid = 0.5 * (gamma.s0 + gamma.s1);
  auto r = twoTangentCardioid(gamma, mid - 0.3, mid + 0.3, genuineCardioid());
  CHECK(r.positionGap < 1e-9);
  CHECK(r.tangentGap < 1e-9);
  // The cusp lands on the perpendicular bisector of p and q (the imaginary axis).
  cplx cusp = r.transform.apply(cplx(-0.5));
  CHECK(std::abs(cusp.real()) < 1e-9);
  CHECK_THROWS_AS(twoTangentCardioid(gamma, mid, mid, genuineCardioid()), InputError);
}

TEST_CASE("two-tangent cardioid on a deltoid arc") {
  PlaneCurve T = genuineDeltoid();
  const PlaneArc& g = T.arcs[T.concArc];
  double mid = 0.5 * (g.s0 + g.s1);
  auto r = twoTangentCardioid(g, mid - 0.3, mid + 0.3, genuineCardioid());
  CHECK(r.positionGap <= 1e-9);
  CHECK(r.tangentGap <= 1e-9);
  // Independent tangency check: placed template near p has the arc's tangent.
  cplx p = g.pos(mid - 0.3);
  cplx q = g.pos(mid + 0.3);
  auto placed = placedCurve(genuineCardioid(), r.transform, 20000);
  double dp = 1e9, dq = 1e9;
  for (const auto& x : placed) {
    dp = std::min(dp, std::abs(x - p));
    dq = std::min(dq, std::abs(x - q));
  }
  CHECK(dp < 1e-3);
  CHECK(dq < 1e-3);
  (void)lineAngle;
}

TEST_CASE("circle inscribed in the deltoid is the incircle") {
  PlaneCurve T = genuineDeltoid();
  auto res = inscribeCircle(T);
  CHECK(std::abs(res.transform.translation) < 1e-8);
  CHECK(std::abs(res.transform.scale - 0.5) < 1e-8);
  CHECK(res.penetration <= 1e-8 * T.scale);
  for (int k = 0; k < 3; ++k) CHECK(res.contactCountPerSide[k] >= 1);
  CHECK(res.labelSwitches >= 1);
}

TEST_CASE("cardioid inscribed in the deltoid") {
  PlaneCurve T = genuineDeltoid();
  auto res = inscribeCardioid(T, genuineCardioid());
  CHECK(res.tangencyGap <= 1e-6);
  CHECK(res.penetration <= 1e-8 * T.scale);
  CHECK(res.contactCountPerSide[res.concArc] >= 2);
  int total = 0;
  for (int k = 0; k < 3; ++k) {
    CHECK(res.contactCountPerSide[k] >= 1);
    total += res.contactCountPerSide[k];
  }
  CHECK(total >= 4);
  CHECK(res.labelSwitches >= 1);
}

TEST_CASE("inscription rejects curves that are not deltoid-like") {
  CHECK_THROWS_AS(inscribeCircle(genuineCardioid()), InputError);
}
