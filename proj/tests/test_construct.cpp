#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qdx/construct.hpp"
#include "qdx/errors.hpp"
#include "qdx/suffridge.hpp"

using namespace qdx;

namespace {

const double kPi = std::numbers::pi;

int faces(const ConstructionPlan& p, bool oracle = true) {
  auto r = countComplementComponents(p, oracle ? 4096 : 0);
  if (oracle) CHECK(r.oracle.agrees);
  return r.faceCount;
}

ConstructionPlan lone(PlacedPiece p) {
  ConstructionPlan plan;
  addPiece(plan, std::move(p));
  return plan;
}

}  // namespace

TEST_CASE("single pieces leave one complement face") {
  CHECK(faces(lone(extremePiece(knownSuffridge(Family::S, 2), {}))) == 1);
  CHECK(faces(lone(diskPiece(0.0, 1.0))) == 1);
  CHECK(faces(lone(diskExteriorPiece(0.0, 1.0))) == 1);
}

TEST_CASE("two disjoint disks leave one face") {
  ConstructionPlan p;
  addPiece(p, diskPiece(0.0, 1.0));
  addPiece(p, diskPiece(3.0, 1.0));
  CHECK(p.contacts.empty());
  CHECK(faces(p) == 1);
}

TEST_CASE("extreme maps with holes") {
  // The bounded complement of an extreme map of order d has d - 2 holes.
  for (int d = 3; d <= 5; ++d) CHECK(faces(lone(extremePiece(knownSuffridge(Family::S, d), {}))) == d - 1);
  // Exterior maps: d - 1 bounded faces, no unbounded one.
  for (int d = 2; d <= 5; ++d) CHECK(faces(lone(extremePiece(knownSuffridge(Family::Sigma, d), {}))) == d - 1);
}

TEST_CASE("cardioid in its enclosing disk") {
  auto plan = buildUnboundedConfig({2});
  REQUIRE(plan.pieces.size() == 2);
  // The farthest points of w + w^2/2 from 1/4 are w = exp(+-i pi/3), at distance 3 sqrt 3 / 4.
  CHECK(plan.pieces[1].transform.translation.real() == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(std::abs(plan.pieces[1].transform.translation.imag()) < 1e-10);
  CHECK(plan.pieces[1].transform.scale == doctest::Approx(3 * std::sqrt(3.0) / 4).epsilon(1e-10));
  REQUIRE(plan.contacts.size() == 2);
  for (const auto& c : plan.contacts) CHECK(std::abs(std::arg(c.point - 0.25)) == doctest::Approx(kPi / 2).epsilon(1e-8));
  auto r = countComplementComponents(plan);
  CHECK(r.faceCount == 2);
  CHECK(r.targetCount == 2);
  CHECK(r.achieved);
  CHECK(r.oracle.agrees);
}

TEST_CASE("unbounded configurations from the worked examples") {
  auto a = buildUnboundedConfig({1, 1, 1}, 1);
  CHECK((a.kind == PlanKind::UqdNodeAtInfinity));
  CHECK(faces(a) == 4);
  // Two disks of radius x0 = b sqrt(a^2 - b^2) / a at +-x0 touch each other and the ellipse.
  const double ea = 1.5, eb = 0.5, x0 = eb * std::sqrt(ea * ea - eb * eb) / ea;
  CHECK(a.pieces[1].transform.scale == doctest::Approx(x0).epsilon(1e-12));
  CHECK(a.contacts.size() == 5);

  auto b = buildUnboundedConfig({2, 1});
  CHECK((b.kind == PlanKind::UqdFiniteNodes));
  CHECK(b.targetCount == 4);
  CHECK(faces(b) == 4);
  REQUIRE(b.stages.size() == 2);
  CHECK(b.stages[1].hostFace >= 0);
  CHECK(b.stages[1].facesAfter == 4);
}

TEST_CASE("bounded configurations from the worked examples") {
  auto a = buildBoundedConfig({2, 2});
  CHECK(faces(a) == 3);
  auto b = buildBoundedConfig({2, 1});
  CHECK(faces(b) == 2);
  auto c = buildBoundedConfig({3});
  CHECK(faces(c) == 2);
  // Three unit disks centred on a circle of radius 2/sqrt 3 touch pairwise.
  auto d = buildBoundedConfig({1, 1, 1});
  CHECK(d.contacts.size() == 3);
  CHECK(faces(d) == 2);
}

TEST_CASE("theorem counts for small partitions") {
  // d <= 4 here; the acceptance run covers d <= 6.
  const std::vector<std::vector<int>> parts{{2}, {1, 1}, {3}, {2, 1}, {1, 1, 1}, {4}, {3, 1}, {2, 2}, {2, 1, 1}, {1, 1, 1, 1}};
  for (const auto& p : parts) {
    int d = 0;
    for (int m : p) d += m;
    const int n = static_cast<int>(p.size());
    CAPTURE(d);
    CAPTURE(n);
    CHECK(faces(buildUnboundedConfig(p)) == std::min(d + n - 1, 2 * d - 2));
    CHECK(faces(buildUnboundedConfig(p, p.back())) == d + n - 2);
    if (d >= 3) {
      int expect = p.front() >= 3 ? d + n - 2 : std::min(d + n - 3, 2 * d - 4);
      CHECK(faces(buildBoundedConfig(p)) == expect);
    }
  }
}

TEST_CASE("face report details") {
  auto plan = buildUnboundedConfig({2});
  auto r = countComplementComponents(plan, 0);
  int deltoid = 0;
  for (const auto& f : r.faces) {
    CHECK(f.bounded);
    CHECK(f.singularPoints >= 2);
    if (f.classification == "deltoid-like") ++deltoid;
  }
  CHECK(deltoid >= 1);
  auto C = complementFaceCurve(plan, 0);
  CHECK(C.arcs.size() >= 2);
  CHECK_THROWS_AS(complementFaceCurve(plan, 7), InputError);
}

TEST_CASE("input errors") {
  CHECK_THROWS_AS(buildUnboundedConfig({}), InputError);
  CHECK_THROWS_AS(buildUnboundedConfig({1}), InputError);
  CHECK_THROWS_AS(buildUnboundedConfig({2, 0}), InputError);
  CHECK_THROWS_AS(buildUnboundedConfig({2, 1}, 3), InputError);
  CHECK_THROWS_AS(buildBoundedConfig({1, 1}), InputError);
  ConstructOptions o;
  o.gamma = 0.1;
  CHECK_THROWS_AS(buildUnboundedConfig({1, 1, 1}, 1, o), InputError);
  o.gamma = 1.0;
  CHECK_THROWS_AS(buildUnboundedConfig({1, 1, 1}, 1, o), InputError);
  CHECK_THROWS_AS(diskPiece(0.0, -1.0), InputError);
  CHECK(ellipseGammaThreshold() == doctest::Approx(0.171573).epsilon(3e-6));
}

TEST_CASE("overlapping and nearly touching pieces are rejected") {
  ConstructionPlan p;
  addPiece(p, diskPiece(0.0, 1.0));
  CHECK_THROWS_AS(addPiece(p, diskPiece(1.5, 1.0)), InvariantViolation);
  // A gap of 5e-6 relative to the scale is neither a contact nor a clear separation.
  ConstructionPlan q;
  addPiece(q, diskPiece(0.0, 1.0));
  CHECK_THROWS_AS(addPiece(q, diskPiece(2.0 + 2e-5, 1.0)), NumericalError);
  // A tangency within tolerance is recorded as one contact.
  ConstructionPlan t;
  addPiece(t, diskPiece(0.0, 1.0));
  addPiece(t, diskPiece(2.0, 1.0));
  REQUIRE(t.contacts.size() == 1);
  CHECK(std::abs(t.contacts[0].point - 1.0) < 1e-12);
}

TEST_CASE("face count above the theorem bound is an invariant violation") {
  auto plan = buildUnboundedConfig({2, 1});
  plan.upperBound = 3;
  CHECK_THROWS_AS(countComplementComponents(plan, 0), InvariantViolation);
}

TEST_CASE("property: rings of tangent disks enclose one bounded face") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    const int k = 3 + static_cast<int>(U(rng) * 6);
    const double R = 0.5 + 2 * U(rng), phase = 2 * kPi * U(rng);
    const cplx shift(4 * U(rng) - 2, 4 * U(rng) - 2);
    const double r = R * std::sin(kPi / k);
    ConstructionPlan p;
    for (int j = 0; j < k; ++j) addPiece(p, diskPiece(shift + std::polar(R, phase + 2 * kPi * j / k), r));
    CAPTURE(k);
    CHECK(static_cast<int>(p.contacts.size()) == k);
    CHECK(faces(p) == 2);
  }
}

TEST_CASE("property: random disjoint disks leave one face") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    ConstructionPlan p;
    std::vector<std::pair<cplx, double>> placed;
    while (placed.size() < 5) {
      cplx c(10 * U(rng), 10 * U(rng));
      double r = 0.3 + U(rng);
      bool clear = true;
      for (const auto& [c2, r2] : placed)
        if (std::abs(c - c2) < r + r2 + 0.1) clear = false;
      if (!clear) continue;
      placed.push_back({c, r});
      addPiece(p, diskPiece(c, r));
    }
    CHECK(p.contacts.empty());
    CHECK(faces(p) == 1);
  }
}

TEST_CASE("serialization is deterministic and the figure has one layer per stage") {
  auto a = buildUnboundedConfig({2, 1});
  auto b = buildUnboundedConfig({2, 1});
  CHECK(toJson(a).dump() == toJson(b).dump());
  auto j = toJson(a);
  CHECK(j["schema"] == 1);
  CHECK(j["kind"] == "UQD-finite-nodes");
  CHECK(j["stages"].size() == 2);
  auto r = toJson(countComplementComponents(a));
  CHECK(r["faceCount"] == 4);
  CHECK(r["oracle"]["agrees"] == true);
  std::string svg = constructionSvg(a, "manifest-line");
  CHECK(svg.find("manifest-line") != std::string::npos);
  CHECK(svg.find("stage-0") != std::string::npos);
  CHECK(svg.find("stage-1") != std::string::npos);
}
