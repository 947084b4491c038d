#include "qdx/inscribe.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

#include "qdx/errors.hpp"
#include "qdx/svg.hpp"

namespace qdx {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double cross(cplx a, cplx b) { return (std::conj(a) * b).imag(); }
double dot(cplx a, cplx b) { return (std::conj(a) * b).real(); }
double lineGap(cplx a, cplx b) { return std::atan2(std::abs(cross(a, b)), std::abs(dot(a, b))); }

// Unit tangent leaving the start of the arc or arriving at its end; at a
// cusp endpoint the velocity vanishes and the acceleration gives the direction.
cplx endTangent(const PlaneArc& a, bool atEnd) {
  double s = atEnd ? a.s1 : a.s0;
  cplx v = a.vel(s);
  double typical = std::abs(a.vel(0.5 * (a.s0 + a.s1)));
  if (std::abs(v) > 1e-8 * std::max(typical, 1e-300)) return v / std::abs(v);
  cplx w = atEnd ? -a.acc(s) : a.acc(s);
  if (std::abs(w) <= 1e-12 * std::max(typical, 1e-300)) {
    double h = 1e-6 * (a.s1 - a.s0);
    w = atEnd ? a.pos(a.s1) - a.pos(a.s1 - h) : a.pos(a.s0 + h) - a.pos(a.s0);
  }
  return w / std::abs(w);
}

// Tangent direction at s, robust at cusp endpoints.
cplx tangentAt(const PlaneArc& a, double s) {
  cplx v = a.vel(s);
  double typical = std::abs(a.vel(0.5 * (a.s0 + a.s1)));
  if (std::abs(v) > 1e-8 * std::max(typical, 1e-300)) return v / std::abs(v);
  if (s - a.s0 < a.s1 - s) return endTangent(a, false);
  return endTangent(a, true);
}

struct Sampled {
  std::vector<cplx> pts;
  std::vector<double> s;
  // Bounding boxes of runs of kChunk segments, for pruning nearest queries.
  static constexpr size_t kChunk = 8;
  std::vector<std::array<double, 4>> boxes;
};

Sampled sampleArc(const PlaneArc& a, int n) {
  Sampled out;
  out.pts.reserve(n + 1);
  out.s.reserve(n + 1);
  for (int k = 0; k <= n; ++k) {
    double s = a.s0 + (a.s1 - a.s0) * k / n;
    out.s.push_back(s);
    out.pts.push_back(a.pos(s));
  }
  for (size_t i = 0; i + 1 < out.pts.size(); i += Sampled::kChunk) {
    std::array<double, 4> b{1e300, -1e300, 1e300, -1e300};
    for (size_t j = i; j <= std::min(i + Sampled::kChunk, out.pts.size() - 1); ++j) {
      b[0] = std::min(b[0], out.pts[j].real());
      b[1] = std::max(b[1], out.pts[j].real());
      b[2] = std::min(b[2], out.pts[j].imag());
      b[3] = std::max(b[3], out.pts[j].imag());
    }
    out.boxes.push_back(b);
  }
  return out;
}

struct Nearest {
  double dist = std::numeric_limits<double>::infinity();
  double s = 0;
  double sign = 1;
};

Nearest nearestOnPolyline(const Sampled& P, cplx x) {
  Nearest best;
  size_t bestIndex = 0;
  auto lowerBound = [&](size_t c) {
    const auto& b = P.boxes[c];
    double dx = std::max({b[0] - x.real(), 0.0, x.real() - b[1]});
    double dy = std::max({b[2] - x.imag(), 0.0, x.imag() - b[3]});
    return dx * dx + dy * dy;
  };
  auto scanChunk = [&](size_t c) {
    const size_t end = std::min((c + 1) * Sampled::kChunk, P.pts.size() - 1);
    for (size_t i = c * Sampled::kChunk; i < end; ++i) {
      cplx a = P.pts[i], d = P.pts[i + 1] - a;
      double L2 = std::norm(d);
      double u = L2 > 0 ? std::clamp(dot(d, x - a) / L2, 0.0, 1.0) : 0.0;
      cplx proj = a + u * d;
      double d2 = std::norm(x - proj);
      // Ties go to the lowest segment index, as in a plain sequential scan.
      if (d2 < best.dist || (d2 == best.dist && i < bestIndex)) {
        best.dist = d2;
        bestIndex = i;
        best.s = P.s[i] + u * (P.s[i + 1] - P.s[i]);
        best.sign = cross(d, x - proj) >= 0 ? 1.0 : -1.0;
      }
    }
  };
  const size_t nc = P.boxes.size();
  size_t first = 0;
  double firstLower = std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < nc; ++c) {
    double l = lowerBound(c);
    if (l < firstLower) {
      firstLower = l;
      first = c;
    }
  }
  if (nc > 0) scanChunk(first);
  for (size_t c = 0; c < nc; ++c)
    if (c != first && lowerBound(c) <= best.dist) scanChunk(c);
  best.dist = std::sqrt(best.dist);
  return best;
}

// Newton on d/ds |a(s) - x|^2 / 2, clamped to the arc.
double refineFoot(const PlaneArc& a, cplx x, double s) {
  for (int it = 0; it < 40; ++it) {
    cplx r = a.pos(s) - x, v = a.vel(s), w = a.acc(s);
    double g = dot(v, r);
    double h = std::norm(v) + dot(w, r);
    if (h <= 0) break;
    double ns = std::clamp(s - g / h, a.s0, a.s1);
    bool done = std::abs(ns - s) <= 1e-15 * (1.0 + std::abs(s));
    s = ns;
    if (done) break;
  }
  return s;
}

// Signed distance from x to the arc, positive on its left.
Nearest signedDistance(const PlaneArc& a, const Sampled& P, cplx x) {
  Nearest n = nearestOnPolyline(P, x);
  double s = refineFoot(a, x, n.s);
  cplx foot = a.pos(s);
  double dist = std::abs(x - foot);
  // Chords of a concave side sit closer than the curve, so the polyline
  // distance can undercut the true one by up to a sagitta.
  const double slack = P.s.size() > 1 ? std::abs(a.vel(n.s)) * std::abs(P.s[1] - P.s[0]) : 0.0;
  if (dist <= n.dist + slack) {
    n.dist = dist;
    n.s = s;
    bool interior = s > a.s0 && s < a.s1;
    if (interior && dist > 0) n.sign = cross(tangentAt(a, s), x - foot) >= 0 ? 1.0 : -1.0;
  }
  return n;
}

struct PairResult {
  double sa, sb, dist;
};

// Closest pair between two arcs by Newton on the squared distance.
PairResult closestPair(const PlaneArc& A, const PlaneArc& B, double sa, double sb) {
  for (int it = 0; it < 50; ++it) {
    cplx D = A.pos(sa) - B.pos(sb);
    cplx a1 = A.vel(sa), a2 = A.acc(sa), b1 = B.vel(sb), b2 = B.acc(sb);
    double g1 = dot(a1, D), g2 = -dot(b1, D);
    double h11 = std::norm(a1) + dot(a2, D), h12 = -dot(a1, b1), h22 = std::norm(b1) - dot(b2, D);
    double det = h11 * h22 - h12 * h12;
    double da, db;
    if (h11 > 0 && det > 1e-14 * h11 * h22) {
      da = -(h22 * g1 - h12 * g2) / det;
      db = -(-h12 * g1 + h11 * g2) / det;
    } else {
      // Alternate foot projections when the Hessian is not positive definite.
      double nb = refineFoot(B, A.pos(sa), sb);
      double na = refineFoot(A, B.pos(nb), sa);
      da = na - sa;
      db = nb - sb;
    }
    double na = std::clamp(sa + da, A.s0, A.s1), nb = std::clamp(sb + db, B.s0, B.s1);
    bool done = std::abs(na - sa) + std::abs(nb - sb) <= 1e-15 * (1.0 + std::abs(sa) + std::abs(sb));
    sa = na;
    sb = nb;
    if (done) break;
  }
  return {sa, sb, std::abs(A.pos(sa) - B.pos(sb))};
}

double polylineArea(const std::vector<cplx>& p) {
  double a = 0;
  for (size_t i = 0; i < p.size(); ++i) a += cross(p[i], p[(i + 1) % p.size()]);
  return 0.5 * a;
}

// Point on the arc at distance rho from its start or end point.
cplx pointNearEnd(const PlaneArc& a, bool atEnd, double rho) {
  cplx tip = a.pos(atEnd ? a.s1 : a.s0);
  auto at = [&](double h) { return a.pos(atEnd ? a.s1 - h : a.s0 + h); };
  double h = 0.5 * (a.s1 - a.s0);
  while (std::abs(at(h) - tip) > rho && h > 1e-14) h *= 0.5;
  double lo = h, hi = std::min(2 * h, a.s1 - a.s0);
  for (int k = 0; k < 60; ++k) {
    double mid = 0.5 * (lo + hi);
    if (std::abs(at(mid) - tip) < rho)
      lo = mid;
    else
      hi = mid;
  }
  return at(lo);
}

// Unwrapped tangent angle along a convex template arc.
struct TemplateTable {
  PlaneArc arc;
  std::vector<double> s, th;

  double theta(double x) const {
    auto it = std::upper_bound(s.begin(), s.end(), x);
    size_t k = it == s.begin() ? 0 : static_cast<size_t>(it - s.begin()) - 1;
    return th[k] + std::arg(arc.vel(x) / arc.vel(s[k]));
  }
  double inverse(double t) const {
    auto it = std::lower_bound(th.begin(), th.end(), t);
    size_t k = std::clamp<size_t>(static_cast<size_t>(it - th.begin()), 1, th.size() - 1);
    double lo = s[k - 1], hi = s[k];
    double x = lo + (hi - lo) * std::clamp((t - th[k - 1]) / (th[k] - th[k - 1]), 0.0, 1.0);
    // Safeguarded Newton with theta' = cross(v, a) / |v|^2.
    for (int i = 0; i < 60; ++i) {
      double f = theta(x) - t;
      if (f < 0)
        lo = x;
      else
        hi = x;
      cplx v = arc.vel(x), a = arc.acc(x);
      double d = (std::conj(v) * a).imag() / std::norm(v);
      double nx = d > 0 ? x - f / d : 0.5 * (lo + hi);
      if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
      if (std::abs(nx - x) <= 1e-16 * (1.0 + std::abs(x)) || hi - lo <= 1e-16 * (1.0 + std::abs(x))) return nx;
      x = nx;
    }
    return x;
  }
};

TemplateTable buildTable(const PlaneCurve& C) {
  if (C.classification != "cardioid-like" || C.arcs.size() != 1)
    throw InputError("template must be a cardioid-like curve with a single arc");
  TemplateTable t;
  t.arc = C.arcs[0];
  const int n = 2048;
  const double margin = 1e-9 * (t.arc.s1 - t.arc.s0);
  for (int k = 0; k < n; ++k) t.s.push_back(t.arc.s0 + margin + (t.arc.s1 - t.arc.s0 - 2 * margin) * k / (n - 1));
  t.th.push_back(std::arg(t.arc.vel(t.s[0])));
  for (int k = 1; k < n; ++k) {
    t.th.push_back(t.th.back() + std::arg(t.arc.vel(t.s[k]) / t.arc.vel(t.s[k - 1])));
    if (t.th[k] <= t.th[k - 1]) throw InputError("template tangent angle is not increasing: curve is not convex");
  }
  return t;
}

TwoTangentResult twoTangentWithTable(const PlaneArc& gamma, double sp, double sq, const TemplateTable& tab) {
  if (!(sp < sq) || sp < gamma.s0 || sq > gamma.s1) throw InputError("two-tangent placement needs s0 <= sp < sq <= s1");
  const cplx p = gamma.pos(sp), q = gamma.pos(sq);
  const double span = std::abs(gamma.pos(gamma.s1) - gamma.pos(gamma.s0)) + std::abs(gamma.pos(0.5 * (gamma.s0 + gamma.s1)) - gamma.pos(gamma.s0));
  if (std::abs(p - q) <= 1e-9 * std::max(span, 1e-300)) throw InputError("degenerate pair: p and q coincide");

  // Tangent turning of gamma from p to q.
  const int m = 64;
  double delta = 0.0;
  cplx prev = tangentAt(gamma, sp);
  for (int k = 1; k <= m; ++k) {
    cplx v = tangentAt(gamma, sp + (sq - sp) * k / m);
    delta += std::arg(v / prev);
    prev = v;
  }
  if (delta >= 0.0) throw InputError("arc is not concave between p and q");
  if (delta <= -kPi) throw InputError("tangent variation between p and q is not below pi");
  const double argP = std::arg(tangentAt(gamma, sp));

  const double lo0 = tab.th.front() + kTwoPi - delta, hi0 = tab.th.back();
  if (!(lo0 < hi0)) throw InputError("infeasible pair: template turning too small");
  const double eps = 1e-9 * (hi0 - lo0);
  const double lo = lo0 + eps, hi = hi0 - eps;

  struct Eval {
    double g, s1, s2, phi;
  };
  auto eval = [&](double th1) {
    Eval e;
    e.s1 = tab.inverse(th1);
    e.s2 = tab.inverse(th1 - kTwoPi + delta);
    e.phi = argP - th1;
    cplx chord = std::polar(1.0, e.phi) * (tab.arc.pos(e.s1) - tab.arc.pos(e.s2));
    e.g = std::arg(chord / (p - q));
    return e;
  };

  const int grid = 16;
  std::vector<double> xs(grid + 1);
  std::vector<Eval> es(grid + 1);
  for (int k = 0; k <= grid; ++k) {
    xs[k] = lo + (hi - lo) * k / grid;
    es[k] = eval(xs[k]);
  }
  // Unwrapped g must be monotone with exactly one admissible root.
  std::vector<double> unwrapped(grid + 1);
  unwrapped[0] = es[0].g;
  for (int k = 1; k <= grid; ++k) unwrapped[k] = unwrapped[k - 1] + std::remainder(es[k].g - es[k - 1].g, kTwoPi);
  bool inc = true, dec = true;
  for (int k = 1; k <= grid; ++k) {
    if (unwrapped[k] <= unwrapped[k - 1]) inc = false;
    if (unwrapped[k] >= unwrapped[k - 1]) dec = false;
  }
  std::vector<int> roots;
  for (int k = 0; k < grid; ++k)
    if (std::abs(es[k].g) < kPi / 2 && std::abs(es[k + 1].g) < kPi / 2 && (es[k].g <= 0) != (es[k + 1].g <= 0))
      roots.push_back(k);
  if (roots.size() > 1 || (!roots.empty() && !inc && !dec))
    throw NumericalError(
        "two-tangent placement is not monotone in the template parameter; uniqueness is only established for the "
        "genuine cardioid");
  if (roots.empty()) throw InputError("infeasible pair: no two-tangent placement of the template");

  // Illinois regula falsi on the bracketing grid cell.
  double a = xs[roots[0]], b = xs[roots[0] + 1];
  double fa = es[roots[0]].g, fb = es[roots[0] + 1].g;
  double x = a;
  int side = 0;
  for (int i = 0; i < 100; ++i) {
    x = (a * fb - b * fa) / (fb - fa);
    if (!(x > a && x < b)) x = 0.5 * (a + b);
    double fx = eval(x).g;
    if (fx == 0.0 || b - a <= 1e-14 * std::abs(b)) break;
    if ((fx < 0) == (fa < 0)) {
      a = x;
      fa = fx;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      b = x;
      fb = fx;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
    if (std::abs(fx) <= 1e-15) break;
  }
  Eval e = eval(x);
  TwoTangentResult r;
  cplx c1 = tab.arc.pos(e.s1), c2 = tab.arc.pos(e.s2);
  r.transform.rotation = std::remainder(e.phi, kTwoPi);
  r.transform.scale = std::abs(p - q) / std::abs(c1 - c2);
  r.transform.translation = p - r.transform.scale * std::polar(1.0, r.transform.rotation) * c1;
  r.templateP = e.s1;
  r.templateQ = e.s2;
  r.positionGap = std::max(std::abs(r.transform.apply(c1) - p), std::abs(r.transform.apply(c2) - q));
  r.tangentGap = std::max(lineGap(r.transform.applyVector(tab.arc.vel(e.s1)), tangentAt(gamma, sp)),
                          lineGap(r.transform.applyVector(tab.arc.vel(e.s2)), tangentAt(gamma, sq)));
  return r;
}

// Minimum value of h on [a, b] by golden-section search.
template <class F>
double goldenMin(F&& h, double a, double b) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = h(x1), f2 = h(x2);
  for (int i = 0; i < 80 && b - a > 1e-14 * (1.0 + std::abs(a)); ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = h(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = h(x2);
    }
  }
  return std::min({f1, f2, h(a), h(b)});
}

double arcLength(const PlaneArc& a) {
  auto P = sampleArc(a, 256);
  double L = 0;
  for (size_t i = 0; i + 1 < P.pts.size(); ++i) L += std::abs(P.pts[i + 1] - P.pts[i]);
  return L;
}

// Shared state for the two inscription sweeps.
struct Region {
  const PlaneCurve* T;
  int conc;
  std::vector<int> others;
  std::vector<Sampled> coarse, fine;

  explicit Region(const PlaneCurve& t, const InscribeOptions& opt) : T(&t), conc(t.concArc) {
    if (t.classification != "deltoid-like" || t.arcs.size() != 3 || t.concArc < 0)
      throw InputError("inscription target must be deltoid-like" + (t.reason.empty() ? "" : ": " + t.reason));
    for (int k = 0; k < 3; ++k) {
      if (k != conc) others.push_back(k);
      coarse.push_back(sampleArc(t.arcs[k], opt.sideSamples));
      fine.push_back(sampleArc(t.arcs[k], 512));
    }
  }

  // Signed distance from x to the curve T, positive inside, with the nearest side.
  std::pair<double, int> signedToT(cplx x) const {
    double best = std::numeric_limits<double>::infinity();
    int side = -1;
    double sign = 1;
    for (int k = 0; k < 3; ++k) {
      Nearest n = signedDistance(T->arcs[k], fine[k], x);
      if (n.dist < best) {
        best = n.dist;
        side = k;
        sign = n.sign;
      }
    }
    return {sign * best, side};
  }
};

void finishVerification(const Region& R, const PlaneArc& placed, InscriptionResult& res, const InscribeOptions& opt,
                        bool circle) {
  const double scale = R.T->scale;
  // Containment on verification samples.
  double worst = 0.0;
  for (int k = 0; k < opt.verifySamples; ++k) {
    double s = placed.s0 + (placed.s1 - placed.s0) * (k + 0.5) / opt.verifySamples;
    double d = R.signedToT(placed.pos(s)).first;
    worst = std::max(worst, -d);
  }
  // Closest approach to each side, refined; the tangencies on T_conc are declared.
  auto placedSamples = sampleArc(placed, 1024);
  for (int k = 0; k < 3; ++k) {
    const PlaneArc& side = R.T->arcs[k];
    if (k == R.conc) {
      res.contacts.push_back({k, res.p, 0.0, true});
      if (!circle) res.contacts.push_back({k, res.q, 0.0, true});
      continue;
    }
    double bestD = std::numeric_limits<double>::infinity();
    double bs = 0, ba = 0;
    for (size_t i = 0; i < placedSamples.pts.size(); ++i) {
      Nearest n = nearestOnPolyline(R.fine[k], placedSamples.pts[i]);
      if (n.dist < bestD) {
        bestD = n.dist;
        bs = n.s;
        ba = placedSamples.s[i];
      }
    }
    PairResult pr = closestPair(placed, side, ba, bs);
    cplx foot = side.pos(pr.sb);
    double sign = cross(tangentAt(side, pr.sb), placed.pos(pr.sa) - foot) >= 0 ? 1.0 : -1.0;
    double d = sign * pr.dist;
    worst = std::max(worst, -d);
    if (std::abs(d) <= opt.contactTol * scale) res.contacts.push_back({k, foot, d, false});
  }
  for (const auto& c : res.contacts) res.contactCountPerSide[c.side]++;
  for (int k = 0; k < 3; ++k) res.contactCountPerSide.emplace(k, 0);
  res.penetration = worst;
}

}  // namespace

cplx SimilarityTransform::apply(cplx z) const { return scale * std::polar(1.0, rotation) * z + translation; }
cplx SimilarityTransform::applyVector(cplx v) const { return scale * std::polar(1.0, rotation) * v; }
SimilarityTransform SimilarityTransform::compose(const SimilarityTransform& inner) const {
  SimilarityTransform r;
  r.rotation = std::remainder(rotation + inner.rotation, kTwoPi);
  r.scale = scale * inner.scale;
  r.translation = apply(inner.translation);
  return r;
}
SimilarityTransform SimilarityTransform::inverse() const {
  if (!(scale > 0)) throw InputError("similarity scale must be positive");
  SimilarityTransform r;
  r.rotation = -rotation;
  r.scale = 1.0 / scale;
  r.translation = -(r.scale * std::polar(1.0, r.rotation) * translation);
  return r;
}

PlaneArc reversed(const PlaneArc& a) {
  PlaneArc r;
  r.s0 = a.s0;
  r.s1 = a.s1;
  const double sum = a.s0 + a.s1;
  r.pos = [a, sum](double s) { return a.pos(sum - s); };
  r.vel = [a, sum](double s) { return -a.vel(sum - s); };
  r.acc = [a, sum](double s) { return a.acc(sum - s); };
  return r;
}

PlaneArc transformed(const PlaneArc& a, const SimilarityTransform& T) {
  PlaneArc r;
  r.s0 = a.s0;
  r.s1 = a.s1;
  r.pos = [a, T](double s) { return T.apply(a.pos(s)); };
  r.vel = [a, T](double s) { return T.applyVector(a.vel(s)); };
  r.acc = [a, T](double s) { return T.applyVector(a.acc(s)); };
  return r;
}

PlaneArc concatenate(const std::vector<PlaneArc>& arcs) {
  if (arcs.empty()) throw InputError("concatenate: no arcs");
  if (arcs.size() == 1) return arcs[0];
  auto parts = std::make_shared<std::vector<PlaneArc>>(arcs);
  auto starts = std::make_shared<std::vector<double>>();
  double acc = 0.0;
  for (const auto& a : arcs) {
    starts->push_back(acc);
    acc += a.s1 - a.s0;
  }
  auto locate = [parts, starts](double s) {
    auto it = std::upper_bound(starts->begin(), starts->end(), s);
    size_t k = it == starts->begin() ? 0 : static_cast<size_t>(it - starts->begin()) - 1;
    const PlaneArc& a = (*parts)[k];
    return std::pair<const PlaneArc*, double>(&a, std::min(a.s0 + (s - (*starts)[k]), a.s1));
  };
  PlaneArc r;
  r.s0 = 0.0;
  r.s1 = acc;
  r.pos = [locate](double s) {
    auto [a, t] = locate(s);
    return a->pos(t);
  };
  r.vel = [locate](double s) {
    auto [a, t] = locate(s);
    return a->vel(t);
  };
  r.acc = [locate](double s) {
    auto [a, t] = locate(s);
    return a->acc(t);
  };
  return r;
}

PlaneArc arcOfMap(const BoundaryMap& f, double t0, double t1) {
  PlaneArc a;
  a.s0 = t0;
  a.s1 = t1;
  a.pos = [f](double t) { return f.at(t); };
  a.vel = [f](double t) { return f.velocity(t); };
  a.acc = [f](double t) { return f.acceleration(t); };
  return a;
}

std::string toString(CuspKind k) { return k == CuspKind::Inward ? "inward" : "outward"; }

PlaneCurve classifyJordanCurve(std::vector<PlaneArc> arcs) {
  if (arcs.empty()) throw InputError("curve has no arcs");
  PlaneCurve c;
  std::vector<cplx> poly;
  for (const auto& a : arcs)
    for (int k = 0; k < 128; ++k) poly.push_back(a.pos(a.s0 + (a.s1 - a.s0) * k / 128.0));
  double xmn = 1e300, xmx = -1e300, ymn = 1e300, ymx = -1e300;
  for (const auto& p : poly) {
    xmn = std::min(xmn, p.real());
    xmx = std::max(xmx, p.real());
    ymn = std::min(ymn, p.imag());
    ymx = std::max(ymx, p.imag());
  }
  c.scale = std::hypot(xmx - xmn, ymx - ymn);
  const size_t n = arcs.size();
  for (size_t k = 0; k < n; ++k) {
    double gap = std::abs(arcs[k].pos(arcs[k].s1) - arcs[(k + 1) % n].pos(arcs[(k + 1) % n].s0));
    if (gap > 1e-7 * c.scale) {
      std::ostringstream os;
      os << "curve is not closed: gap " << gap << " after arc " << k;
      throw InputError(os.str());
    }
  }
  if (polylineArea(poly) < 0) {
    std::reverse(arcs.begin(), arcs.end());
    for (auto& a : arcs) a = reversed(a);
  }

  // Junctions: smooth, cusp (tangent reversal) or corner.
  std::vector<int> type(n);
  for (size_t k = 0; k < n; ++k) {
    cplx tin = endTangent(arcs[k], true), tout = endTangent(arcs[(k + 1) % n], false);
    double ang = std::abs(std::arg(tout / tin));
    type[k] = ang < 0.05 ? 0 : (ang > kPi - 0.05 ? 1 : 2);
    if (type[k] == 2) {
      std::ostringstream os;
      os << "corner of angle " << ang << " at junction " << k;
      c.arcs = arcs;
      c.reason = os.str();
      return c;
    }
  }
  // Merge smoothly joined arcs so that arcs run from cusp to cusp.
  int first = -1;
  for (size_t k = 0; k < n; ++k)
    if (type[k] == 1) {
      first = static_cast<int>(k);
      break;
    }
  if (first < 0) {
    c.arcs.push_back(concatenate(arcs));
  } else {
    std::vector<PlaneArc> group;
    for (size_t i = 1; i <= n; ++i) {
      size_t k = (first + i) % n;
      group.push_back(arcs[k]);
      if (type[k] == 1) {
        c.arcs.push_back(concatenate(group));
        group.clear();
      }
    }
  }
  const size_t m = c.arcs.size();
  if (first >= 0) {
    const double rho = 1e-3 * c.scale;
    for (size_t k = 0; k < m; ++k) {
      const PlaneArc& in = c.arcs[k];
      const PlaneArc& out = c.arcs[(k + 1) % m];
      cplx pin = pointNearEnd(in, true, rho), pout = pointNearEnd(out, false, rho);
      cplx u = endTangent(in, true);
      CuspKind kind = cross(u, pout - pin) > 0 ? CuspKind::Outward : CuspKind::Inward;
      c.cusps.push_back({static_cast<int>(k), kind, in.pos(in.s1)});
    }
  }

  // Curvature sign, tangent variation and length per arc.
  std::vector<int> sign(m);
  std::vector<double> variation(m), length(m);
  for (size_t k = 0; k < m; ++k) {
    const PlaneArc& a = c.arcs[k];
    int pos = 0, neg = 0;
    for (int i = 0; i < 64; ++i) {
      double s = a.s0 + (a.s1 - a.s0) * (i + 0.5) / 64;
      double kap = cross(a.vel(s), a.acc(s));
      if (kap > 0)
        ++pos;
      else if (kap < 0)
        ++neg;
    }
    sign[k] = neg == 0 ? 1 : (pos == 0 ? -1 : 0);
    double tot = 0;
    const double off = 1e-9 * (a.s1 - a.s0);
    cplx prev = a.vel(a.s0 + off);
    for (int i = 1; i <= 400; ++i) {
      cplx v = a.vel(a.s0 + off + (a.s1 - a.s0 - 2 * off) * i / 400.0);
      tot += std::abs(std::arg(v / prev));
      prev = v;
    }
    variation[k] = tot;
    length[k] = arcLength(a);
  }

  int inward = 0, outward = 0;
  for (const auto& v : c.cusps) (v.kind == CuspKind::Inward ? inward : outward)++;
  std::ostringstream why;
  if (c.cusps.size() == 1 && inward == 1) {
    bool convex = std::all_of(sign.begin(), sign.end(), [](int s) { return s == 1; });
    if (convex)
      c.classification = "cardioid-like";
    else
      why << "single inward cusp but curvature is not positive on every arc";
  } else if (c.cusps.size() == 3 && outward == 3) {
    int best = -1;
    for (size_t k = 0; k < m; ++k)
      if (sign[k] == -1 && variation[k] < kPi && (best < 0 || length[k] > length[best])) best = static_cast<int>(k);
    if (best >= 0) {
      c.classification = "deltoid-like";
      c.concArc = best;
    } else {
      why << "three outward cusps but no concave arc with tangent variation below pi";
    }
  } else {
    why << c.cusps.size() << " cusps (" << inward << " inward, " << outward << " outward)";
  }
  c.reason = why.str();
  return c;
}

PlaneCurve genuineCardioid() {
  BoundaryMap f = BoundaryMap::fromTaylor({0.0, 1.0, 0.5});
  return classifyJordanCurve({arcOfMap(f, kPi, 3 * kPi)});
}

PlaneCurve genuineDeltoid() {
  BoundaryMap f = BoundaryMap::fromLaurentTail({0.0, -0.5});
  return classifyJordanCurve(
      {arcOfMap(f, kPi / 3, kPi), arcOfMap(f, kPi, 5 * kPi / 3), arcOfMap(f, 5 * kPi / 3, 7 * kPi / 3)});
}

PlaneCurve unitCircle() {
  PlaneArc a;
  a.s0 = 0;
  a.s1 = kTwoPi;
  a.pos = [](double s) { return std::polar(1.0, s); };
  a.vel = [](double s) { return cplx(0, 1) * std::polar(1.0, s); };
  a.acc = [](double s) { return -std::polar(1.0, s); };
  return classifyJordanCurve({a});
}

PlaneCurve faceCurve(const BoundaryMap& f, const BoundaryCurve& curve, const FaceInfo& face) {
  auto all = singularArcs(curve);
  // The complement lies left of travel for Sigma and right of travel for S.
  bool reverse = face.isDomain ? f.family() == Family::Sigma : f.family() == Family::S;
  std::vector<PlaneArc> pieces;
  for (int ai : face.arcs) {
    PlaneArc a = arcOfMap(f, all.at(ai).t0, all.at(ai).t1);
    pieces.push_back(reverse ? reversed(a) : a);
  }
  if (pieces.empty()) throw InputError("face has no boundary arcs");
  // Chain end to start.
  std::vector<PlaneArc> chain{pieces[0]};
  std::vector<char> used(pieces.size(), 0);
  used[0] = 1;
  for (size_t step = 1; step < pieces.size(); ++step) {
    cplx end = chain.back().pos(chain.back().s1);
    int best = -1;
    double bd = 1e300;
    for (size_t k = 0; k < pieces.size(); ++k) {
      if (used[k]) continue;
      double d = std::abs(pieces[k].pos(pieces[k].s0) - end);
      if (d < bd) {
        bd = d;
        best = static_cast<int>(k);
      }
    }
    used[best] = 1;
    chain.push_back(pieces[best]);
  }
  return classifyJordanCurve(chain);
}

std::vector<cplx> sampleCurve(const PlaneCurve& c, int n) {
  std::vector<cplx> out;
  const int per = std::max(2, n / static_cast<int>(c.arcs.size()));
  for (const auto& a : c.arcs)
    for (int k = 0; k < per; ++k) out.push_back(a.pos(a.s0 + (a.s1 - a.s0) * k / per));
  return out;
}

std::vector<cplx> placedCurve(const PlaneCurve& C, const SimilarityTransform& T, int n) {
  auto pts = sampleCurve(C, n);
  for (auto& p : pts) p = T.apply(p);
  return pts;
}

TwoTangentResult twoTangentCardioid(const PlaneArc& gamma, double sp, double sq, const PlaneCurve& C) {
  return twoTangentWithTable(gamma, sp, sq, buildTable(C));
}

InscriptionResult inscribeCardioid(const PlaneCurve& T, const PlaneCurve& C, const InscribeOptions& opt) {
  Region R(T, opt);
  const TemplateTable tab = buildTable(C);
  const PlaneArc& G = T.arcs[R.conc];
  std::vector<cplx> tmpl;
  for (int k = 0; k < opt.templateSamples; ++k)
    tmpl.push_back(tab.arc.pos(tab.arc.s0 + (tab.arc.s1 - tab.arc.s0) * (k + 0.5) / opt.templateSamples));

  // Smallest signed clearance of the placed template from the two other sides.
  auto clearance = [&](double sp, double sq) {
    TwoTangentResult tt = twoTangentWithTable(G, sp, sq, tab);
    double best = std::numeric_limits<double>::infinity();
    int side = -1;
    for (const auto& x0 : tmpl) {
      cplx x = tt.transform.apply(x0);
      for (int k : R.others) {
        Nearest n = nearestOnPolyline(R.coarse[k], x);
        double d = n.sign * n.dist;
        if (d < best) {
          best = d;
          side = k;
        }
      }
    }
    return std::pair<double, int>(best, side);
  };
  // Same with the deepest point of the placed curve refined by golden section.
  auto clearanceFine = [&](double sp, double sq) {
    TwoTangentResult tt = twoTangentWithTable(G, sp, sq, tab);
    PlaneArc placed = transformed(tab.arc, tt.transform);
    double best = std::numeric_limits<double>::infinity();
    int side = -1;
    const double ds = (tab.arc.s1 - tab.arc.s0) / tmpl.size();
    for (int k : R.others) {
      auto h = [&](double sa) {
        Nearest n = signedDistance(T.arcs[k], R.coarse[k], placed.pos(sa));
        return n.sign * n.dist;
      };
      double bd = std::numeric_limits<double>::infinity();
      size_t bi = 0;
      for (size_t i = 0; i < tmpl.size(); ++i) {
        Nearest n = nearestOnPolyline(R.coarse[k], tt.transform.apply(tmpl[i]));
        if (n.sign * n.dist < bd) {
          bd = n.sign * n.dist;
          bi = i;
        }
      }
      double center = tab.arc.s0 + ds * (bi + 0.5);
      double d = goldenMin(h, std::max(tab.arc.s0, center - ds), std::min(tab.arc.s1, center + ds));
      if (d < best) {
        best = d;
        side = k;
      }
    }
    return std::pair<double, int>(best, side);
  };
  const double margin = 1e-3 * (G.s1 - G.s0);
  const double a = G.s0 + margin, b = G.s1 - margin;
  // First q beyond p where the placed template touches another side.
  auto qStar = [&](double sp, int steps, double* sqOut, bool fine) {
    auto clear = [&](double x, double y) { return fine ? clearanceFine(x, y) : clearance(x, y); };
    const int scan = 16;
    double lo = sp + 1e-3 * (b - sp), hi = -1;
    int side = -1;
    for (int j = 1; j <= scan; ++j) {
      double sq = lo + (b - lo) * j / scan;
      auto c = clear(sp, sq);
      if (c.first < 0) {
        hi = sq;
        side = c.second;
        break;
      }
      lo = sq;
    }
    if (hi < 0) {
      *sqOut = b;
      return -1;
    }
    for (int i = 0; i < steps; ++i) {
      double mid = 0.5 * (lo + hi);
      auto c = clear(sp, mid);
      if (c.first < 0) {
        hi = mid;
        side = c.second;
      } else {
        lo = mid;
      }
    }
    *sqOut = lo;
    return side;
  };

  InscriptionResult res;
  res.concArc = R.conc;
  std::vector<double> grid(opt.pGrid);
  for (int i = 0; i < opt.pGrid; ++i) {
    grid[i] = a + (b - a) * i / (opt.pGrid - 1) * 0.999;
    double sq;
    res.sideTrace.push_back(qStar(grid[i], 30, &sq, false));
  }
  int sw = -1;
  for (int i = 0; i + 1 < opt.pGrid; ++i)
    if (res.sideTrace[i] >= 0 && res.sideTrace[i + 1] >= 0 && res.sideTrace[i] != res.sideTrace[i + 1]) {
      ++res.labelSwitches;
      if (sw < 0) sw = i;
    }
  if (sw < 0) throw NumericalError("touched-side label never changes along T_conc; refine the p grid");
  double lo = grid[sw], hi = grid[sw + 1];
  const int labelLo = res.sideTrace[sw];
  for (int i = 0; i < opt.bisectSteps; ++i) {
    double mid = 0.5 * (lo + hi), sq;
    if (qStar(mid, 50, &sq, true) == labelLo)
      lo = mid;
    else
      hi = mid;
  }
  double sq;
  qStar(lo, 60, &sq, true);
  TwoTangentResult tt = twoTangentWithTable(G, lo, sq, tab);
  res.transform = tt.transform;
  res.sp = lo;
  res.sq = sq;
  res.p = G.pos(lo);
  res.q = G.pos(sq);
  res.tangencyGap = std::max(tt.positionGap, tt.tangentGap);
  finishVerification(R, transformed(tab.arc, tt.transform), res, opt, false);
  return res;
}

InscriptionResult inscribeCircle(const PlaneCurve& T, const InscribeOptions& opt) {
  Region R(T, opt);
  const PlaneArc& G = T.arcs[R.conc];
  auto center = [&](double sp, double r) { return G.pos(sp) + r * cplx(0, 1) * tangentAt(G, sp); };
  auto clearance = [&](double sp, double r) {
    cplx c = center(sp, r);
    double best = std::numeric_limits<double>::infinity();
    int side = -1;
    for (int k : R.others) {
      Nearest n = signedDistance(T.arcs[k], R.coarse[k], c);
      if (n.dist - r < best) {
        best = n.dist - r;
        side = k;
      }
    }
    return std::pair<double, int>(best, side);
  };
  auto rStar = [&](double sp, double* rOut) {
    double lo = 0.0, hi = T.scale;
    int side = clearance(sp, hi).second;
    for (int i = 0; i < 100 && hi - lo > 1e-15 * hi; ++i) {
      double mid = 0.5 * (lo + hi);
      auto c = clearance(sp, mid);
      if (c.first < 0) {
        hi = mid;
        side = c.second;
      } else {
        lo = mid;
      }
    }
    *rOut = lo;
    return side;
  };
  const double margin = 1e-3 * (G.s1 - G.s0);
  const double a = G.s0 + margin, b = G.s1 - margin;
  InscriptionResult res;
  res.circle = true;
  res.concArc = R.conc;
  std::vector<double> grid(opt.pGrid);
  for (int i = 0; i < opt.pGrid; ++i) {
    grid[i] = a + (b - a) * i / (opt.pGrid - 1);
    double r;
    res.sideTrace.push_back(rStar(grid[i], &r));
  }
  int sw = -1;
  for (int i = 0; i + 1 < opt.pGrid; ++i)
    if (res.sideTrace[i] != res.sideTrace[i + 1]) {
      ++res.labelSwitches;
      if (sw < 0) sw = i;
    }
  if (sw < 0) throw NumericalError("touched-side label never changes along T_conc; refine the p grid");
  double lo = grid[sw], hi = grid[sw + 1];
  const int labelLo = res.sideTrace[sw];
  for (int i = 0; i < opt.bisectSteps; ++i) {
    double mid = 0.5 * (lo + hi), r;
    if (rStar(mid, &r) == labelLo)
      lo = mid;
    else
      hi = mid;
  }
  double r;
  rStar(lo, &r);
  cplx c = center(lo, r);
  res.transform.rotation = 0.0;
  res.transform.scale = r;
  res.transform.translation = c;
  res.sp = res.sq = lo;
  res.p = res.q = G.pos(lo);
  res.tangencyGap = std::max(std::abs(std::abs(c - res.p) - r), lineGap(c - res.p, cplx(0, 1) * tangentAt(G, lo)));
  finishVerification(R, transformed(unitCircle().arcs[0], res.transform), res, opt, true);
  return res;
}

nlohmann::json toJson(const SimilarityTransform& t) {
  return {{"rotation", t.rotation}, {"scale", t.scale}, {"translation", toJson(t.translation)}};
}

nlohmann::json toJson(const InscriptionResult& r) {
  nlohmann::json j;
  j["schema"] = 1;
  j["kind"] = r.circle ? "circle" : "cardioid";
  j["transform"] = toJson(r.transform);
  j["concArc"] = r.concArc;
  j["p"] = toJson(r.p);
  j["q"] = toJson(r.q);
  auto contacts = nlohmann::json::array();
  for (const auto& c : r.contacts)
    contacts.push_back({{"side", c.side}, {"point", toJson(c.point)}, {"distance", c.distance}, {"tangency", c.tangency}});
  j["contacts"] = contacts;
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [side, n] : r.contactCountPerSide) per[std::to_string(side)] = n;
  j["contactCountPerSide"] = per;
  j["penetration"] = r.penetration;
  j["tangencyGap"] = r.tangencyGap;
  j["labelSwitches"] = r.labelSwitches;
  j["sideTrace"] = r.sideTrace;
  return j;
}

std::string inscriptionSvg(const PlaneCurve& T, const PlaneCurve& C, const InscriptionResult& r,
                           const std::string& manifest) {
  auto outer = sampleCurve(T, 1536);
  auto inner = placedCurve(C, r.transform, 1536);
  double x0, y0, x1, y1;
  boundingBox({outer, inner}, 0.05, x0, y0, x1, y1);
  SvgWriter w(x0, y0, x1, y1, 600, manifest);
  w.beginGroup("region");
  w.polyline(outer, true, "#1f4e79", 1.5, "#eef3f8");
  w.endGroup();
  w.beginGroup("placed");
  w.polyline(inner, true, "#b03a2e", 1.5);
  w.endGroup();
  w.beginGroup("contacts");
  for (const auto& c : r.contacts) w.marker(c.point, 3.0, c.tangency ? "#b03a2e" : "#2e7d32");
  w.endGroup();
  return w.str();
}

}  // namespace qdx
