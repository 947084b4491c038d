#include "qdx/curve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "qdx/errors.hpp"
#include "qdx/svg.hpp"

namespace qdx {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double t) {
  t = std::fmod(t, kTwoPi);
  if (t < 0) t += kTwoPi;
  if (t >= kTwoPi) t -= kTwoPi;
  return t;
}

// Distance between parameters on the circle.
double circDist(double a, double b) {
  double d = std::abs(wrap(a - b));
  return std::min(d, kTwoPi - d);
}

double cross(cplx a, cplx b) { return (std::conj(a) * b).imag(); }
double dot(cplx a, cplx b) { return (std::conj(a) * b).real(); }

// Angle between the lines spanned by a and b, in [0, pi/2].
double lineAngle(cplx a, cplx b) { return std::atan2(std::abs(cross(a, b)), std::abs(dot(a, b))); }

}  // namespace

std::string toString(Family f) { return f == Family::S ? "S" : "Sigma"; }

Family familyFromString(const std::string& s) {
  if (s == "S" || s == "s") return Family::S;
  if (s == "Sigma" || s == "sigma" || s == "Σ") return Family::Sigma;
  throw InputError("unknown family '" + s + "' (expected S or Sigma)");
}

BoundaryMap::BoundaryMap(Family family, LaurentPoly f) : family_(family), f_(std::move(f)) {
  if (family_ == Family::S) {
    if (f_.lowPower() < 0) throw InputError("S-class map must be a polynomial");
    d_ = f_.highPower();
    while (d_ > 0 && f_.coeff(d_) == cplx(0.0)) --d_;
  } else {
    if (f_.highPower() > 1) throw InputError("Sigma-class map may not have powers above z");
    d_ = -f_.lowPower();
    while (d_ > 0 && f_.coeff(-d_) == cplx(0.0)) --d_;
  }
  if (d_ < 1) throw InputError("boundary map must have degree >= 1");
  f1_ = f_.derivative();
  f2_ = f1_.derivative();
}

BoundaryMap BoundaryMap::fromTaylor(std::vector<cplx> a) { return BoundaryMap(Family::S, LaurentPoly(0, std::move(a))); }

BoundaryMap BoundaryMap::fromLaurentTail(const std::vector<cplx>& tail) {
  const int d = static_cast<int>(tail.size());
  std::vector<cplx> c(static_cast<size_t>(d) + 2, 0.0);
  for (int j = 1; j <= d; ++j) c[d - j] = tail[j - 1];
  c[d + 1] = 1.0;
  return BoundaryMap(Family::Sigma, LaurentPoly(-d, std::move(c)));
}

cplx BoundaryMap::at(double t) const { return f_(std::polar(1.0, t)); }

cplx BoundaryMap::velocity(double t) const {
  cplx z = std::polar(1.0, t);
  return cplx(0.0, 1.0) * z * f1_(z);
}

cplx BoundaryMap::acceleration(double t) const {
  cplx z = std::polar(1.0, t);
  return -z * f1_(z) - z * z * f2_(z);
}

ComplexPoly BoundaryMap::criticalPoly() const {
  std::vector<cplx> v;
  if (family_ == Family::S) {
    for (int k = 0; k <= f1_.highPower(); ++k) v.push_back(f1_.coeff(k));
  } else {
    for (int k = 0; k <= d_ + 1; ++k) v.push_back(f1_.coeff(k - d_ - 1));
  }
  return ComplexPoly(std::move(v));
}

double BoundaryMap::scale() const {
  double s = 0.0;
  for (const auto& c : f_.coeffs()) s += std::abs(c);
  return std::max(s, 1.0);
}

BoundaryMap BoundaryMap::rotated(double phi) const {
  std::vector<cplx> c(f_.coeffs());
  for (size_t i = 0; i < c.size(); ++i) {
    int k = f_.lowPower() + static_cast<int>(i);
    c[i] *= std::polar(1.0, (k - 1) * phi);
  }
  return BoundaryMap(family_, LaurentPoly(f_.lowPower(), std::move(c)));
}

// ---------------------------------------------------------------------------

std::vector<CuspPoint> findCusps(const BoundaryMap& f, const CurveOptions& opt, std::vector<std::string>* warnings) {
  std::vector<CuspPoint> out;
  ComplexPoly q = f.criticalPoly();
  if (q.degree() < 1) return out;
  for (const auto& z : allRoots(q)) {
    double off = std::abs(std::abs(z) - 1.0);
    if (off < opt.cuspSnap) {
      double t = wrap(std::arg(z));
      out.push_back({t, f(z)});
    } else if (off < 10.0 * opt.cuspSnap && warnings) {
      std::ostringstream os;
      os << "critical point at modulus " << std::abs(z) << " is ambiguously close to the unit circle";
      warnings->push_back(os.str());
    }
  }
  std::sort(out.begin(), out.end(), [](const CuspPoint& a, const CuspPoint& b) { return a.t < b.t; });
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void fillGeometry(const BoundaryMap& f, ContactSolve& s) {
  s.t1 = wrap(s.t1);
  s.t2 = wrap(s.t2);
  cplx P1 = f.at(s.t1), P2 = f.at(s.t2);
  cplx T1 = f.velocity(s.t1), T2 = f.velocity(s.t2);
  cplx A1 = f.acceleration(s.t1), A2 = f.acceleration(s.t2);
  s.distance = std::abs(P1 - P2);
  s.angle = lineAngle(T1, T2);
  double n1 = std::abs(T1);
  if (n1 == 0.0 || std::abs(T2) == 0.0) {
    s.separation = s.distance;
    return;
  }
  cplx u = T1 / n1;
  cplx v = cplx(0.0, 1.0) * u;
  double g = dot(v, P2 - P1);
  double k1 = cross(T1, A1) / (n1 * n1 * n1);
  double du = dot(u, T2);
  double k2 = du == 0.0 ? 0.0 : cross(T2, A2) / (du * du * du);
  double dk = k2 - k1;
  // The arcs y = k1 x^2/2 and y = g + k2 x^2/2 meet iff g and dk differ in sign.
  s.separation = dk == 0.0 ? std::abs(g) : (dk > 0 ? g : -g);
}

}  // namespace

ContactSolve solveContact(const BoundaryMap& f, double t1, double t2) {
  ContactSolve s;
  for (int it = 0; it < 80; ++it) {
    cplx P1 = f.at(t1), P2 = f.at(t2);
    cplx T1 = f.velocity(t1), T2 = f.velocity(t2);
    cplx A1 = f.acceleration(t1), A2 = f.acceleration(t2);
    cplx D = P1 - P2;
    // E1: D orthogonal to T2; E2: T1 parallel to T2.
    double e1 = dot(D, T2);
    double e2 = cross(T2, T1);
    double j11 = dot(T1, T2);
    double j12 = -std::norm(T2) + dot(D, A2);
    double j21 = cross(T2, A1);
    double j22 = cross(A2, T1);
    double det = j11 * j22 - j12 * j21;
    if (det == 0.0 || !std::isfinite(det)) break;
    double d1 = -(e1 * j22 - j12 * e2) / det;
    double d2 = -(j11 * e2 - e1 * j21) / det;
    double m = std::max(std::abs(d1), std::abs(d2));
    if (m > 0.2) {
      d1 *= 0.2 / m;
      d2 *= 0.2 / m;
    }
    t1 += d1;
    t2 += d2;
    if (m < 1e-15) {
      s.converged = true;
      break;
    }
    if (it > 10 && m < 1e-13) {
      s.converged = true;
    }
  }
  s.t1 = t1;
  s.t2 = t2;
  fillGeometry(f, s);
  return s;
}

ContactSolve solveCrossing(const BoundaryMap& f, double t1, double t2) {
  ContactSolve s;
  double scale = f.scale();
  for (int it = 0; it < 60; ++it) {
    cplx G = f.at(t1) - f.at(t2);
    if (std::abs(G) <= 1e-15 * scale) {
      s.converged = true;
      break;
    }
    cplx T1 = f.velocity(t1), T2 = f.velocity(t2);
    // [T1, -T2] (d1, d2)^T = -G as a real 2x2 system.
    double a = T1.real(), b = -T2.real(), c = T1.imag(), d = -T2.imag();
    double det = a * d - b * c;
    if (det == 0.0 || !std::isfinite(det)) break;
    double d1 = -(G.real() * d - b * G.imag()) / det;
    double d2 = -(a * G.imag() - c * G.real()) / det;
    double m = std::max(std::abs(d1), std::abs(d2));
    if (m > 0.2) {
      d1 *= 0.2 / m;
      d2 *= 0.2 / m;
    }
    t1 += d1;
    t2 += d2;
    if (m < 1e-15) {
      s.converged = true;
      break;
    }
  }
  s.t1 = t1;
  s.t2 = t2;
  fillGeometry(f, s);
  if (s.distance > 1e-12 * scale) s.converged = false;
  return s;
}

std::vector<cplx> samplePolyline(const BoundaryMap& f, int n) {
  std::vector<cplx> p(n);
  for (int i = 0; i < n; ++i) p[i] = f.at(kTwoPi * i / n);
  return p;
}

std::vector<std::pair<double, double>> proximityCandidates(const BoundaryMap& f, int M, double thresholdFactor) {
  std::vector<cplx> P = samplePolyline(f, M);
  double h = 0.0;
  for (int i = 0; i < M; ++i) h = std::max(h, std::abs(P[(i + 1) % M] - P[i]));
  const double th2 = thresholdFactor * thresholdFactor * h * h;
  auto D = [&](int i, int j) { return std::norm(P[((i % M) + M) % M] - P[((j % M) + M) % M]); };
  std::vector<std::pair<double, double>> out;
  for (int i = 0; i < M; ++i) {
    for (int j = i + 4; j < M; ++j) {
      if (M - (j - i) < 4) break;
      double dij = std::norm(P[i] - P[j]);
      if (dij >= th2) continue;
      bool isMin = true;
      for (int a = -1; a <= 1 && isMin; ++a)
        for (int b = -1; b <= 1; ++b) {
          if (a == 0 && b == 0) continue;
          double dn = D(i + a, j + b);
          // Strict on one half of the neighbourhood so plateaus yield one candidate.
          bool later = (a > 0) || (a == 0 && b > 0);
          if (later ? dn < dij : dn <= dij) {
            isMin = false;
            break;
          }
        }
      if (isMin) out.push_back({kTwoPi * i / M, kTwoPi * j / M});
    }
  }
  return out;
}

std::vector<DoublePoint> findDoublePoints(const BoundaryMap& f, const CurveOptions& opt,
                                          std::vector<std::string>* log) {
  const double scale = f.scale();
  const double band = 2.0 * kTwoPi / opt.gridSize;
  auto cusps = findCusps(f, opt);
  std::vector<DoublePoint> out;
  for (const auto& [ta, tb] : proximityCandidates(f, opt.gridSize)) {
    ContactSolve s = solveCrossing(f, ta, tb);
    bool ok = s.converged && s.angle > 10.0 * opt.collinearTol;
    if (!ok) {
      s = solveContact(f, ta, tb);
      ok = s.converged && s.distance <= 1e-9 * scale;
    }
    if (!ok) {
      if (log) {
        std::ostringstream os;
        os << "dropped proximity candidate (" << ta << ", " << tb << "): no convergence, gap " << s.distance;
        log->push_back(os.str());
      }
      continue;
    }
    if (circDist(s.t1, s.t2) <= band) continue;
    bool atCusp = false;
    for (const auto& c : cusps)
      if (circDist(c.t, s.t1) < 1e-6 && circDist(c.t, s.t2) < 1e-6) atCusp = true;
    if (atCusp) continue;
    double lo = std::min(s.t1, s.t2), hi = std::max(s.t1, s.t2);
    bool dup = false;
    for (const auto& q : out)
      if (circDist(q.tMinus, lo) < 1e-7 && circDist(q.tPlus, hi) < 1e-7) dup = true;
    if (dup) continue;
    DoublePoint dp;
    dp.tMinus = lo;
    dp.tPlus = hi;
    dp.point = 0.5 * (f.at(lo) + f.at(hi));
    dp.tangentGap = s.angle;
    dp.tangential = s.angle <= opt.collinearTol;
    if (!dp.tangential && s.angle <= 10.0 * opt.collinearTol && log)
      log->push_back("near-tangency below resolution at a double point");
    out.push_back(dp);
  }
  std::sort(out.begin(), out.end(), [](const DoublePoint& a, const DoublePoint& b) { return a.tMinus < b.tMinus; });
  return out;
}

// ---------------------------------------------------------------------------

double conformalCurvature(const BoundaryMap& f, double t) {
  cplx z = std::polar(1.0, t);
  cplx d1 = f.d1(z);
  if (std::abs(d1) < 1e-12 * f.scale()) {
    std::ostringstream os;
    os << "conformal curvature undefined at cusp parameter t = " << t;
    throw InputError(os.str());
  }
  return (1.0 + z * f.d2(z) / d1).real();
}

double starredCurvature(Family fam, int d) { return fam == Family::S ? 0.5 * (1 + d) : 0.5 * (1 - d); }

double verifyDoubleAngleRelation(const BoundaryCurve& curve) {
  const int m = curve.family == Family::S ? curve.d + 1 : curve.d - 1;
  double worst = 0.0;
  for (const auto& dp : curve.doublePoints) {
    double x = m * (dp.tPlus - dp.tMinus) / kTwoPi;
    worst = std::max(worst, std::abs(x - std::round(x)));
  }
  return worst;
}

// ---------------------------------------------------------------------------

std::string toString(Verdict v) {
  switch (v) {
    case Verdict::True: return "true";
    case Verdict::False: return "false";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

int windingNumber(const std::vector<cplx>& poly, cplx p) {
  double total = 0.0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    cplx a = poly[i] - p, b = poly[(i + 1) % n] - p;
    total += std::arg(b / a);
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

namespace {

bool segmentsCross(cplx a, cplx b, cplx c, cplx d, double& s, double& u) {
  cplx r = b - a, q = d - c;
  double den = cross(r, q);
  if (den == 0.0) return false;
  s = cross(c - a, q) / den;
  u = cross(c - a, r) / den;
  return s >= 0.0 && s <= 1.0 && u >= 0.0 && u <= 1.0;
}

double distanceToPolyline(const std::vector<cplx>& poly, cplx p) {
  double best = std::numeric_limits<double>::infinity();
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    cplx a = poly[i], b = poly[(i + 1) % n];
    cplx ab = b - a;
    double t = std::norm(ab) == 0 ? 0.0 : std::clamp(dot(ab, p - a) / std::norm(ab), 0.0, 1.0);
    best = std::min(best, std::abs(p - (a + t * ab)));
  }
  return best;
}

// Classifies a local contact: 0 harmless, 1 overlap (crossing), -1 unresolved.
int judgeContact(const ContactSolve& s, const BoundaryMap& f, double collinearTol) {
  if (!s.converged) return -1;
  if (s.separation >= 0.0) return 0;
  // Overlapping arcs cross at angle ~ sqrt(2 |sep| |dk|); recover dk from geometry.
  cplx T1 = f.velocity(s.t1), A1 = f.acceleration(s.t1);
  cplx T2 = f.velocity(s.t2), A2 = f.acceleration(s.t2);
  double n1 = std::abs(T1);
  cplx u = T1 / n1;
  double du = dot(u, T2);
  double k1 = cross(T1, A1) / (n1 * n1 * n1);
  double k2 = du == 0.0 ? 0.0 : cross(T2, A2) / (du * du * du);
  double ang = std::sqrt(2.0 * std::abs(s.separation) * std::abs(k2 - k1));
  // Overlap depth at round-off level is a closed tangency, not a crossing.
  return ang > collinearTol && std::abs(s.separation) > 1e-12 * f.scale() ? 1 : 0;
}

}  // namespace

UnivalenceResult isUnivalent(const BoundaryMap& f, int M, const CurveOptions& opt) {
  UnivalenceResult res;
  res.verdict = Verdict::True;
  if (M < 64) {
    res.verdict = Verdict::Inconclusive;
    res.reason = "sample count too small";
    return res;
  }
  std::vector<cplx> P = samplePolyline(f, M);
  const double dt = kTwoPi / M;
  bool unresolved = false;

  // Transversal crossings of the polyline, confirmed on the true curve.
  std::vector<double> xmin(M), xmax(M), ymin(M), ymax(M);
  for (int i = 0; i < M; ++i) {
    cplx a = P[i], b = P[(i + 1) % M];
    xmin[i] = std::min(a.real(), b.real());
    xmax[i] = std::max(a.real(), b.real());
    ymin[i] = std::min(a.imag(), b.imag());
    ymax[i] = std::max(a.imag(), b.imag());
  }
  for (int i = 0; i < M; ++i) {
    for (int j = i + 2; j < M; ++j) {
      if (i == 0 && j == M - 1) continue;
      if (xmax[i] < xmin[j] || xmax[j] < xmin[i] || ymax[i] < ymin[j] || ymax[j] < ymin[i]) continue;
      double s, u;
      if (!segmentsCross(P[i], P[(i + 1) % M], P[j], P[(j + 1) % M], s, u)) continue;
      double t1 = (i + s) * dt, t2 = (j + u) * dt;
      ContactSolve c = solveCrossing(f, t1, t2);
      if (c.converged && circDist(c.t1, c.t2) > 2 * dt && c.angle > opt.collinearTol) {
        res.verdict = Verdict::False;
        res.witnessT1 = c.t1;
        res.witnessT2 = c.t2;
        res.reason = "transversal self-crossing";
        return res;
      }
      ContactSolve k = solveContact(f, t1, t2);
      int j2 = judgeContact(k, f, opt.collinearTol);
      if (j2 == 1) {
        res.verdict = Verdict::False;
        res.witnessT1 = k.t1;
        res.witnessT2 = k.t2;
        res.reason = "overlapping arcs";
        return res;
      }
      if (j2 == -1 && !c.converged) unresolved = true;
    }
  }

  // Near-contacts that the polyline cannot resolve.
  double h = 0.0;
  for (int i = 0; i < M; ++i) h = std::max(h, std::abs(P[(i + 1) % M] - P[i]));
  for (const auto& [ta, tb] : proximityCandidates(f, M)) {
    ContactSolve k = solveContact(f, ta, tb);
    int j2 = judgeContact(k, f, opt.collinearTol);
    if (j2 == 1 && circDist(k.t1, k.t2) > 2 * dt) {
      res.verdict = Verdict::False;
      res.witnessT1 = k.t1;
      res.witnessT2 = k.t2;
      res.reason = "overlapping arcs";
      return res;
    }
    if (j2 == -1 && std::abs(f.at(ta) - f.at(tb)) < 0.5 * h) unresolved = true;
  }

  // Winding number about an interior probe.
  cplx probe;
  if (f.family() == Family::S) {
    probe = f(0.0);
  } else {
    // Complement is bounded: take the candidate with nonzero winding farthest from the curve.
    double xmn = 1e300, xmx = -1e300, ymn = 1e300, ymx = -1e300;
    cplx centroid = 0.0;
    for (const auto& p : P) {
      xmn = std::min(xmn, p.real());
      xmx = std::max(xmx, p.real());
      ymn = std::min(ymn, p.imag());
      ymx = std::max(ymx, p.imag());
      centroid += p;
    }
    centroid /= static_cast<double>(M);
    std::vector<cplx> cands{f.laurent().coeff(0), centroid};
    for (int a = 1; a < 16; ++a)
      for (int b = 1; b < 16; ++b) cands.push_back({xmn + (xmx - xmn) * a / 16.0, ymn + (ymx - ymn) * b / 16.0});
    double bestDist = -1.0;
    probe = cands[0];
    std::vector<cplx> coarse = samplePolyline(f, 512);
    for (const auto& c : cands) {
      if (windingNumber(coarse, c) == 0) continue;
      double dd = distanceToPolyline(coarse, c);
      if (dd > bestDist) {
        bestDist = dd;
        probe = c;
      }
    }
  }
  res.winding = windingNumber(P, probe);
  if (res.winding != 1) {
    res.verdict = Verdict::False;
    res.reason = "winding number " + std::to_string(res.winding) + " about the interior probe";
    return res;
  }
  if (unresolved) {
    res.verdict = Verdict::Inconclusive;
    res.reason = "unresolved near-contact at this sample count";
  }
  return res;
}

// ---------------------------------------------------------------------------

int cuspCap(Family fam, int d) { return fam == Family::S ? d - 1 : d + 1; }
int doublePointCap(Family, int d) { return std::max(0, d - 2); }

BoundaryCurve analyzeCurve(const BoundaryMap& f, const CurveOptions& opt) {
  BoundaryCurve c;
  c.family = f.family();
  c.d = f.degree();
  const int ns = 512;
  for (int i = 0; i < ns; ++i) {
    double t = kTwoPi * i / ns;
    c.samples.push_back({t, f.at(t)});
  }
  c.cusps = findCusps(f, opt, &c.log);
  c.doublePoints = findDoublePoints(f, opt, &c.log);
  const int nk = opt.curvatureSamples;
  for (int i = 0; i < nk; ++i) {
    double t = kTwoPi * (i + 0.5) / nk;
    for (const auto& cp : c.cusps)
      if (circDist(cp.t, t) < opt.cuspExclusion) t = wrap(t + 3.0 * opt.cuspExclusion);
    c.curvatureSamples.push_back({t, conformalCurvature(f, t)});
  }
  return c;
}

SingularityCensus censusOf(const BoundaryCurve& curve) {
  SingularityCensus s;
  s.cuspCount = static_cast<int>(curve.cusps.size());
  s.doublePointCount = static_cast<int>(curve.doublePoints.size());
  const int cc = cuspCap(curve.family, curve.d), dc = doublePointCap(curve.family, curve.d);
  if (s.cuspCount > cc || s.doublePointCount > dc) {
    std::ostringstream os;
    os << "singularity cap exceeded for " << toString(curve.family) << "-class degree " << curve.d << ": "
       << s.cuspCount << " cusps (cap " << cc << "), " << s.doublePointCount << " double points (cap " << dc << ")";
    throw InvariantViolation(os.str());
  }
  s.isExtreme = curve.d >= 2 && s.cuspCount == cc && s.doublePointCount == dc;
  return s;
}

SingularityCensus census(const BoundaryMap& f, const CurveOptions& opt) {
  BoundaryCurve c = analyzeCurve(f, opt);
  SingularityCensus s = censusOf(c);
  s.perComponent = componentAnalysis(f, c);
  return s;
}

// ---------------------------------------------------------------------------

namespace {

struct Raster {
  int n;
  double x0, y0, px;
  std::vector<int> label;  // -1 curve, >= 0 face id
  int at(cplx p) const {
    int ix = static_cast<int>(std::floor((p.real() - x0) / px));
    int iy = static_cast<int>(std::floor((p.imag() - y0) / px));
    if (ix < 0 || iy < 0 || ix >= n || iy >= n) return -2;
    return label[static_cast<size_t>(iy) * n + ix];
  }
};

Raster rasterizeFaces(const BoundaryMap& f, int n, std::vector<char>& touchesBorder) {
  std::vector<cplx> dense = samplePolyline(f, 4096);
  double xmn = 1e300, xmx = -1e300, ymn = 1e300, ymx = -1e300;
  for (const auto& p : dense) {
    xmn = std::min(xmn, p.real());
    xmx = std::max(xmx, p.real());
    ymn = std::min(ymn, p.imag());
    ymx = std::max(ymx, p.imag());
  }
  double span = std::max(xmx - xmn, ymx - ymn);
  Raster r;
  r.n = n;
  r.px = span * 1.1 / n;
  r.x0 = 0.5 * (xmn + xmx) - 0.5 * n * r.px;
  r.y0 = 0.5 * (ymn + ymx) - 0.5 * n * r.px;
  r.label.assign(static_cast<size_t>(n) * n, 0);
  // Mark the curve with steps below half a pixel.
  double len = 0.0;
  for (size_t i = 0; i < dense.size(); ++i) len += std::abs(dense[(i + 1) % dense.size()] - dense[i]);
  const int steps = static_cast<int>(std::ceil(len / (0.25 * r.px))) + 16;
  for (int k = 0; k < steps; ++k) {
    cplx p = f.at(kTwoPi * k / steps);
    int ix = static_cast<int>(std::floor((p.real() - r.x0) / r.px));
    int iy = static_cast<int>(std::floor((p.imag() - r.y0) / r.px));
    if (ix >= 0 && iy >= 0 && ix < n && iy < n) r.label[static_cast<size_t>(iy) * n + ix] = -1;
  }
  // 4-connected flood fill.
  int next = 0;
  std::vector<int> stack;
  std::vector<char> seen(static_cast<size_t>(n) * n, 0);
  touchesBorder.clear();
  for (size_t start = 0; start < r.label.size(); ++start) {
    if (r.label[start] == -1 || seen[start]) continue;
    int id = next++;
    bool border = false;
    stack.push_back(static_cast<int>(start));
    seen[start] = 1;
    while (!stack.empty()) {
      int c = stack.back();
      stack.pop_back();
      r.label[c] = id;
      int cx = c % n, cy = c / n;
      if (cx == 0 || cy == 0 || cx == n - 1 || cy == n - 1) border = true;
      const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
      for (const auto& d : nb) {
        int x = cx + d[0], y = cy + d[1];
        if (x < 0 || y < 0 || x >= n || y >= n) continue;
        size_t k = static_cast<size_t>(y) * n + x;
        if (seen[k] || r.label[k] == -1) continue;
        seen[k] = 1;
        stack.push_back(static_cast<int>(k));
      }
    }
    touchesBorder.push_back(border ? 1 : 0);
  }
  return r;
}

}  // namespace

std::vector<SingularParameter> singularParameters(const BoundaryCurve& curve) {
  std::vector<SingularParameter> sing;
  int nid = 0;
  for (const auto& c : curve.cusps) sing.push_back({c.t, nid++, true});
  for (const auto& dp : curve.doublePoints) {
    sing.push_back({dp.tMinus, nid, false});
    sing.push_back({dp.tPlus, nid, false});
    ++nid;
  }
  std::sort(sing.begin(), sing.end(), [](const SingularParameter& a, const SingularParameter& b) { return a.t < b.t; });
  return sing;
}

std::vector<CurveArc> singularArcs(const BoundaryCurve& curve) {
  auto sing = singularParameters(curve);
  std::vector<CurveArc> arcs;
  if (sing.empty()) {
    arcs.push_back({0.0, kTwoPi, -1, -1});
    return arcs;
  }
  for (size_t i = 0; i < sing.size(); ++i) {
    size_t j = (i + 1) % sing.size();
    double t1 = sing[j].t;
    if (j == 0) t1 += kTwoPi;
    arcs.push_back({sing[i].t, t1, static_cast<int>(i), static_cast<int>(j)});
  }
  return arcs;
}

std::vector<FaceInfo> componentAnalysis(const BoundaryMap& f, const BoundaryCurve& curve, int raster) {
  // Singular parameters: cusps, and both parameters of every double point.
  const auto sing = singularParameters(curve);
  using Arc = CurveArc;
  const auto arcs = singularArcs(curve);

  std::vector<char> border;
  Raster R = rasterizeFaces(f, raster, border);
  const double sideSign = f.family() == Family::S ? -1.0 : 1.0;  // complement on the right for S

  auto faceAt = [&](double t, double side) {
    cplx p = f.at(t);
    cplx T = f.velocity(t);
    if (std::abs(T) == 0.0) return -2;
    cplx nrm = cplx(0.0, side) * T / std::abs(T);
    for (double k : {3.0, 5.0, 8.0, 12.0}) {
      int l = R.at(p + k * R.px * nrm);
      if (l >= 0) return l;
    }
    return -2;
  };
  auto majorityFace = [&](const Arc& a, double side) {
    std::map<int, int> votes;
    for (double fr : {0.25, 0.4, 0.5, 0.6, 0.75}) {
      int l = faceAt(a.t0 + fr * (a.t1 - a.t0), side);
      if (l >= 0) votes[l]++;
    }
    int best = -2, cnt = 0;
    for (const auto& [l, c] : votes)
      if (c > cnt) {
        best = l;
        cnt = c;
      }
    return best;
  };

  std::map<int, FaceInfo> faces;
  auto turning = [&](const Arc& a) {
    const int m = 200;
    double tot = 0.0;
    cplx prev = f.velocity(a.t0 + 1e-6 * (a.t1 - a.t0));
    for (int k = 1; k <= m; ++k) {
      double t = a.t0 + (a.t1 - a.t0) * (k / static_cast<double>(m)) * (1.0 - 2e-6) + 1e-6 * (a.t1 - a.t0);
      cplx v = f.velocity(t);
      tot += std::abs(std::arg(v / prev));
      prev = v;
    }
    return tot;
  };
  // Sign of the boundary curvature seen from the complement face: concave iff
  // the curve turns left (S) or right (Sigma) throughout the arc.
  auto concaveFromComplement = [&](const Arc& a) {
    for (int k = 1; k < 40; ++k) {
      double t = a.t0 + (a.t1 - a.t0) * k / 40.0;
      double kappa = cross(f.velocity(t), f.acceleration(t));
      if (f.family() == Family::S ? kappa <= 0 : kappa >= 0) return false;
    }
    return true;
  };

  std::map<int, std::set<int>> singOfFace;
  std::map<int, bool> concave;
  std::map<int, double> maxTurn;
  std::map<int, double> minTurn;
  int domainLabel = -3;
  for (size_t ai = 0; ai < arcs.size(); ++ai) {
    const Arc& a = arcs[ai];
    int lc = majorityFace(a, sideSign);
    int ld = majorityFace(a, -sideSign);
    if (ld >= 0) domainLabel = ld;
    for (int l : {lc, ld}) {
      if (l < 0) continue;
      auto& fi = faces[l];
      fi.id = l;
      fi.arcs.push_back(static_cast<int>(ai));
      if (a.s0 >= 0) {
        singOfFace[l].insert(a.s0);
        singOfFace[l].insert(a.s1);
      }
    }
    if (lc >= 0) {
      bool cc = concaveFromComplement(a);
      concave[lc] = concave.count(lc) ? (concave[lc] && cc) : cc;
      double tv = turning(a);
      maxTurn[lc] = std::max(maxTurn[lc], tv);
      minTurn[lc] = minTurn.count(lc) ? std::min(minTurn[lc], tv) : tv;
    }
  }

  std::vector<FaceInfo> out;
  for (auto& [l, fi] : faces) {
    fi.bounded = !border[l];
    fi.isDomain = (l == domainLabel);
    std::set<int> ids;
    int cusps = 0, doubles = 0;
    for (int si : singOfFace[l]) {
      if (ids.insert(sing[si].id).second) {
        if (sing[si].cusp)
          ++cusps;
        else
          ++doubles;
      }
    }
    fi.cusps = cusps;
    fi.doublePoints = doubles;
    fi.maxArcTurning = maxTurn.count(l) ? maxTurn[l] : 0.0;
    fi.classification = "other";
    if (fi.isDomain) {
      bool convex = true;
      for (int ai : fi.arcs)
        if (concaveFromComplement(arcs[ai]) == (f.family() == Family::Sigma)) convex = false;
      if (cusps == 1 && doubles == 0 && f.family() == Family::S && convex) fi.classification = "cardioid-like";
    } else if (fi.bounded && cusps + doubles == 3 && concave[l] && minTurn[l] < std::numbers::pi) {
      fi.classification = "deltoid-like";
    }
    out.push_back(fi);
  }
  // Renumber deterministically: domain first, then unbounded, then by label.
  std::stable_sort(out.begin(), out.end(), [](const FaceInfo& a, const FaceInfo& b) {
    if (a.isDomain != b.isDomain) return a.isDomain;
    if (a.bounded != b.bounded) return !a.bounded;
    return a.id < b.id;
  });
  for (size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<int>(i);
  return out;
}

// ---------------------------------------------------------------------------

std::string curveCsv(const BoundaryMap& f, const BoundaryCurve& curve, int samples) {
  std::string out = "t,x,y,kappa\n";
  char buf[160];
  for (int i = 0; i < samples; ++i) {
    double t = kTwoPi * i / samples;
    cplx p = f.at(t);
    bool nearCusp = false;
    for (const auto& c : curve.cusps)
      if (circDist(c.t, t) < 1e-4) nearCusp = true;
    if (nearCusp) {
      std::snprintf(buf, sizeof buf, "%.12f,%.12f,%.12f,nan\n", t, p.real(), p.imag());
    } else {
      std::snprintf(buf, sizeof buf, "%.12f,%.12f,%.12f,%.12f\n", t, p.real(), p.imag(), conformalCurvature(f, t));
    }
    out += buf;
  }
  return out;
}

std::string curveSvg(const BoundaryMap& f, const BoundaryCurve& curve, const std::string& manifest) {
  std::vector<cplx> pts = samplePolyline(f, 2048);
  double x0, y0, x1, y1;
  boundingBox({pts}, 0.08, x0, y0, x1, y1);
  SvgWriter svg(x0, y0, x1, y1, 640, manifest);
  svg.beginGroup("curve");
  svg.polyline(pts, true, "black", 1.5, "#dde8f5");
  svg.endGroup();
  svg.beginGroup("cusps");
  for (const auto& c : curve.cusps) svg.marker(c.point, 4.0, "red");
  svg.endGroup();
  svg.beginGroup("double-points");
  for (const auto& d : curve.doublePoints) svg.marker(d.point, 4.0, "none", "blue");
  svg.endGroup();
  return svg.str();
}

nlohmann::json toJson(const SingularityCensus& c) {
  nlohmann::json j;
  j["cusps"] = c.cuspCount;
  j["doubles"] = c.doublePointCount;
  j["extreme"] = c.isExtreme;
  auto comps = nlohmann::json::array();
  for (const auto& fi : c.perComponent) {
    comps.push_back({{"id", fi.id},
                     {"domain", fi.isDomain},
                     {"bounded", fi.bounded},
                     {"d_j", fi.doublePoints},
                     {"c_j", fi.cusps},
                     {"classification", fi.classification}});
  }
  j["components"] = comps;
  return j;
}

nlohmann::json toJson(const BoundaryCurve& c) {
  nlohmann::json j;
  j["family"] = toString(c.family);
  j["d"] = c.d;
  auto cs = nlohmann::json::array();
  for (const auto& cp : c.cusps) cs.push_back({{"t", cp.t}, {"point", toJson(cp.point)}});
  j["cusps"] = cs;
  auto ds = nlohmann::json::array();
  for (const auto& dp : c.doublePoints)
    ds.push_back({{"tMinus", dp.tMinus},
                  {"tPlus", dp.tPlus},
                  {"point", toJson(dp.point)},
                  {"tangential", dp.tangential}});
  j["doublePoints"] = ds;
  return j;
}

nlohmann::json toJson(const BoundaryMap& f) {
  nlohmann::json j;
  j["family"] = toString(f.family());
  j["lowPower"] = f.laurent().lowPower();
  auto arr = nlohmann::json::array();
  for (const auto& c : f.laurent().coeffs()) arr.push_back(toJson(c));
  j["coeffs"] = arr;
  return j;
}

BoundaryMap boundaryMapFromJson(const nlohmann::json& j) {
  try {
    Family fam = familyFromString(j.at("family").get<std::string>());
    int lo = j.value("lowPower", 0);
    std::vector<cplx> c;
    for (const auto& e : j.at("coeffs")) c.push_back(complexFromJson(e));
    return BoundaryMap(fam, LaurentPoly(lo, std::move(c)));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("boundary map: ") + e.what());
  }
}

}  // namespace qdx
