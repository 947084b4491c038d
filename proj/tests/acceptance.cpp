// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qdx/construct.hpp"
#include "qdx/curve.hpp"
#include "qdx/errors.hpp"
#include "qdx/inscribe.hpp"
#include "qdx/lens.hpp"
#include "qdx/quad.hpp"
#include "qdx/suffridge.hpp"

using namespace qdx;

namespace {

const double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Random hyperbolic maps, degrees 2..6, shared by the first two criteria.
std::vector<RationalMap> randomMaps() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<RationalMap> maps;
  int drawn = 0;
  while (maps.size() < 100) {
    const int d = 2 + static_cast<int>(maps.size() % 5);
    // Alternate polynomial-like maps and maps with finite poles.
    const int shape = static_cast<int>(rng() % 3);
    const int dn = shape == 0 ? d : (shape == 1 ? d : static_cast<int>(rng() % d));
    const int dd = shape == 0 ? 0 : (shape == 1 ? static_cast<int>(rng() % (d + 1)) : d);
    std::vector<cplx> num(dn + 1), den(dd + 1);
    for (auto& c : num) c = cplx(U(rng), U(rng));
    for (auto& c : den) c = cplx(U(rng), U(rng));
    num.back() += cplx(num.back().real() >= 0 ? 0.5 : -0.5, 0);
    den.back() += cplx(den.back().real() >= 0 ? 0.5 : -0.5, 0);
    ++drawn;
    try {
      RationalMap r{ComplexPoly(num), ComplexPoly(den)};
      if (r.degree() != d) continue;
      if (!solveLens(r).hyperbolic) continue;
      maps.push_back(r);
    } catch (const InputError&) {
    }
  }
  return maps;
}

std::vector<RationalMap> closedFormMaps() {
  const double c = 2.0 / 3.0;
  return {RationalMap(ComplexPoly{0.0, 2.0}, ComplexPoly{-1.0, 0.0, 1.0}),
          RationalMap(ComplexPoly{1.0, 0.0, 0.5}, ComplexPoly{0.0, 1.0}),
          RationalMap(ComplexPoly{c * c * c, 0.0, 0.0, 0.5}, ComplexPoly{0.0, 1.0}),
          RationalMap(ComplexPoly{0.0, 1.5, 0.0, -0.5}, ComplexPoly{1.0}),
          RationalMap(ComplexPoly{0.0, 0.0, 1.0}, ComplexPoly{1.0})};
}

Outcome lefschetz(const std::vector<RationalMap>& maps) {
  int bad = 0, thrown = 0;
  for (const auto& r : maps) {
    try {
      if (verifyLefschetz(solveLens(r)) != 0) ++bad;
    } catch (const std::exception&) {
      ++thrown;
    }
  }
  std::ostringstream s;
  s << maps.size() << " maps, " << bad << " nonzero defects, " << thrown << " failures";
  return {bad == 0 && thrown == 0 && maps.size() == 100, s.str()};
}

Outcome sharpBoundNeverExceeded(const std::vector<RationalMap>& maps) {
  auto all = maps;
  for (auto& r : closedFormMaps()) all.push_back(r);
  int over = 0, tight = 0;
  for (const auto& r : all) {
    auto rep = solveLens(r);
    if (rep.Fhat > sharpBound(rep.d, rep.n)) ++over;
    if (rep.Fhat == sharpBound(rep.d, rep.n)) ++tight;
  }
  std::ostringstream s;
  s << all.size() << " maps, " << over << " above the bound, " << tight << " attain it";
  return {over == 0, s.str()};
}

// Distance from target to the nearest finite fixed point of the given class.
double nearest(const FixedPointReport& rep, cplx target, FixedClass cls, double* residual) {
  double best = 1e300;
  for (const auto& p : rep.points) {
    if (p.atInfinity || p.cls != cls) continue;
    double e = std::abs(p.z - target);
    if (e < best) {
      best = e;
      *residual = p.residual;
    }
  }
  return best;
}

Outcome explicitExamples() {
  const double c = 2.0 / 3.0;
  struct Case {
    RationalMap r;
    std::vector<cplx> points;
  };
  std::vector<Case> cases{
      {closedFormMaps()[0], {cplx(0, 1), cplx(0, -1)}},
      {closedFormMaps()[1], {std::sqrt(2.0), -std::sqrt(2.0)}},
      {closedFormMaps()[2], {std::polar(c, 0.0), std::polar(c, 2 * kPi / 3), std::polar(c, 4 * kPi / 3)}},
      {closedFormMaps()[3], {1.0, -1.0}},
  };
  double worstPos = 0, worstRes = 0;
  for (const auto& cs : cases) {
    auto rep = solveLens(cs.r);
    for (cplx z : cs.points) {
      double res = 1e300;
      worstPos = std::max(worstPos, nearest(rep, z, FixedClass::Superattracting, &res));
      worstRes = std::max(worstRes, res);
    }
  }
  std::ostringstream s;
  s << "9 superattracting points, position error " << worstPos << ", residual " << worstRes;
  return {worstPos <= 1e-10 && worstRes <= 1e-10, s.str()};
}

Outcome tightness() {
  auto rep = solveLens(closedFormMaps()[4]);
  // |z|^2 = |z| forces |z| in {0, 1}; on the circle z^3 = 1.
  std::vector<cplx> expect{0.0, 1.0, std::polar(1.0, 2 * kPi / 3), std::polar(1.0, -2 * kPi / 3)};
  int finite = 0;
  bool infinity = false;
  double worst = 0;
  for (const auto& p : rep.points) {
    if (p.atInfinity) {
      infinity = true;
      continue;
    }
    ++finite;
    double e = 1e300;
    for (cplx z : expect) e = std::min(e, std::abs(p.z - z));
    worst = std::max(worst, e);
  }
  std::ostringstream s;
  s << "Fhat " << rep.Fhat << ", bound " << sharpBound(2, 1) << ", finite points " << finite << ", max error " << worst;
  return {rep.Fhat == 5 && sharpBound(2, 1) == 5 && finite == 4 && infinity && worst <= 1e-10, s.str()};
}

Outcome catalogCensus() {
  int ok = 0, total = 0;
  double worstKappa = 0, worstAngle = 0;
  for (Family fam : {Family::S, Family::Sigma}) {
    for (int d = 2; d <= 5; ++d) {
      ++total;
      auto f = knownSuffridge(fam, d);
      auto curve = analyzeCurve(f);
      auto c = censusOf(curve);
      const double target = starredCurvature(fam, d);
      double dev = 0;
      for (const auto& [t, k] : curve.curvatureSamples) dev = std::max(dev, std::abs(k - target));
      double angle = verifyDoubleAngleRelation(curve);
      worstKappa = std::max(worstKappa, dev);
      worstAngle = std::max(worstAngle, angle);
      const int cusps = fam == Family::S ? d - 1 : d + 1;
      if (c.cuspCount == cusps && c.doublePointCount == d - 2 && curve.curvatureSamples.size() == 256 && dev <= 1e-8 &&
          angle <= 1e-6)
        ++ok;
    }
  }
  std::ostringstream s;
  s << ok << "/" << total << " maps, curvature deviation " << worstKappa << ", angle residual " << worstAngle;
  return {ok == total, s.str()};
}

Outcome quadratureIdentity() {
  double worst = 0;
  for (const auto& f : {ComplexPoly{0.0, 1.0}, ComplexPoly{0.0, 1.0, 0.5}})
    for (const auto& m : verifyQuadratureIdentity(f, 5)) worst = std::max(worst, m.residual);
  ComplexPoly card{0.0, 1.0, 0.5};
  auto q = schwarzPrincipalPart(card);
  bool principal = q.nodes.size() == 1 && q.nodes[0].multiplicity == 2 &&
                   std::abs(q.nodes[0].principal[0] - 1.5) <= 1e-12 && std::abs(q.nodes[0].principal[1] - 0.5) <= 1e-12;
  double area = areaTheorem(card);
  auto k0 = verifyQuadratureIdentity(card, 0)[0];
  double cross = std::abs(k0.contourSide - area);
  std::ostringstream s;
  s << "max moment residual " << worst << ", area " << area << ", k = 0 cross-check " << cross;
  return {worst <= 1e-10 && principal && std::abs(area - 1.5 * kPi) <= 1e-12 && cross <= 1e-10, s.str()};
}

Outcome inscription() {
  PlaneCurve T = genuineDeltoid();
  auto card = inscribeCardioid(T, genuineCardioid());
  int tangencies = 0, total = 0;
  bool everySide = true;
  for (const auto& c : card.contacts)
    if (c.tangency && c.side == card.concArc) ++tangencies;
  for (int k = 0; k < 3; ++k) {
    total += card.contactCountPerSide[k];
    if (card.contactCountPerSide[k] < 1) everySide = false;
  }
  auto circ = inscribeCircle(T);
  double center = std::abs(circ.transform.translation), radius = circ.transform.scale;
  std::ostringstream s;
  s << "cardioid: " << total << " contacts, " << tangencies << " tangencies on the concave arc, tangency gap "
    << card.tangencyGap << ", penetration " << card.penetration << "; circle: center " << center << ", radius "
    << radius;
  bool ok = total >= 4 && tangencies >= 2 && everySide && card.tangencyGap <= 1e-6 && card.penetration <= 1e-8 &&
            center <= 1e-8 && std::abs(radius - 0.5) <= 1e-8;
  return {ok, s.str()};
}

Outcome extremalization() {
  std::ostringstream s;
  bool ok = true;
  for (int d : {4, 6}) {
    auto t0 = std::chrono::steady_clock::now();
    auto r = extremalize(symmetricStart(Family::S, d));
    double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool good = r.cusps == d - 1 && r.doublePoints == d - 2 && r.extreme && sec <= 600;
    ok = ok && good;
    s << "S" << d << ": census (" << r.cusps << ", " << r.doublePoints << ") in " << r.rounds << " rounds, "
      << static_cast<int>(sec) << " s";
    if (r.catalogDistance >= 0) s << ", catalog distance " << r.catalogDistance;
    s << (d == 4 ? "; " : "");
  }
  return {ok, s.str()};
}

void partitions(int d, int maxPart, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (d == 0) {
    out.push_back(cur);
    return;
  }
  for (int m = std::min(d, maxPart); m >= 1; --m) {
    cur.push_back(m);
    partitions(d - m, m, cur, out);
    cur.pop_back();
  }
}

Outcome sharpness() {
  int plans = 0, hit = 0, agree = 0;
  std::string firstMiss;
  auto check = [&](const std::string& label, const std::function<ConstructionPlan()>& build, int expect) {
    ++plans;
    try {
      auto plan = build();
      auto rep = countComplementComponents(plan, 4096);
      if (rep.oracle.agrees) ++agree;
      if (rep.faceCount == expect && rep.oracle.agrees) {
        ++hit;
        return;
      }
      if (firstMiss.empty())
        firstMiss = label + " gave " + std::to_string(rep.faceCount) + " (oracle " +
                    std::to_string(rep.oracle.faceCount) + "), expected " + std::to_string(expect);
    } catch (const std::exception& e) {
      if (firstMiss.empty()) firstMiss = label + ": " + e.what();
    }
  };
  for (int d = 2; d <= 6; ++d) {
    std::vector<std::vector<int>> parts;
    std::vector<int> cur;
    partitions(d, d, cur, parts);
    for (const auto& p : parts) {
      const int n = static_cast<int>(p.size());
      std::string name;
      for (int m : p) name += (name.empty() ? "" : ",") + std::to_string(m);
      check("uqd {" + name + "}", [&] { return buildUnboundedConfig(p); }, std::min(d + n - 1, 2 * d - 2));
      for (int m : std::set<int>(p.begin(), p.end()))
        check("uqd {" + name + "} with " + std::to_string(m) + " at infinity",
              [&] { return buildUnboundedConfig(p, m); }, d + n - 2);
      if (d >= 3)
        check("bqd {" + name + "}", [&] { return buildBoundedConfig(p); },
              p.front() >= 3 ? d + n - 2 : std::min(d + n - 3, 2 * d - 4));
    }
  }
  std::ostringstream s;
  s << hit << "/" << plans << " plans reach the target, oracle agrees on " << agree;
  if (!firstMiss.empty()) s << "; first miss: " << firstMiss;
  return {hit == plans, s.str()};
}

Outcome lensing() {
  const double g0 = ellipseFeasibilityGamma();
  auto res = searchMaxImages(2, twoDiskEllipseSeed(2, 0.5), 10000, 1);
  bool positive = true;
  for (double m : res.config.masses) positive = positive && m > 0;
  bool gammaOk = res.config.gamma > g0 && res.config.gamma < 1;
  std::ostringstream s;
  s.precision(9);
  s << "gamma0 " << g0 << "; N = 2 search: " << res.images << " images (target " << res.target << ") after "
    << res.evaluations << " evaluations, gamma " << res.config.gamma;
  if (res.shortfall) s << ", shortfall " << res.target - res.images;
  return {std::abs(g0 - 0.171573) <= 5e-7 && res.images == 9 && !res.shortfall && res.evaluations <= 10000 && positive &&
              gammaOk,
          s.str()};
}

}  // namespace

int main() {
  int failed = 0;
  std::vector<RationalMap> maps;
  auto run = [&](int id, const char* name, double limit, const std::function<Outcome()>& fn) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit > 0 && sec > limit) {
      o.pass = false;
      o.detail += " (over the time limit)";
    }
    if (!o.pass) ++failed;
    std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), sec);
    std::fflush(stdout);
  };
  run(1, "Lefschetz identity", 60, [&] {
    maps = randomMaps();
    return lefschetz(maps);
  });
  run(2, "sharp bound never exceeded", 0, [&] { return sharpBoundNeverExceeded(maps); });
  run(3, "explicit superattracting examples", 0, explicitExamples);
  run(4, "tightness of the bound for z^2", 0, tightness);
  run(5, "catalog census and curvature", 30, catalogCensus);
  run(6, "quadrature identity", 0, quadratureIdentity);
  run(7, "inscription in the deltoid", 0, inscription);
  run(8, "extremalization", 1200, extremalization);
  run(9, "sharpness constructions", 300, sharpness);
  run(10, "lensing threshold and image search", 0, lensing);
  return failed == 0 ? 0 : 1;
}
