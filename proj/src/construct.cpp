#include "qdx/construct.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "qdx/errors.hpp"
#include "qdx/suffridge.hpp"
#include "qdx/svg.hpp"

namespace qdx {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double t) {
  t = std::fmod(t, kTwoPi);
  if (t < 0) t += kTwoPi;
  if (t >= kTwoPi) t -= kTwoPi;
  return t;
}

double circDist(double a, double b) {
  double d = std::abs(wrap(a - b));
  return std::min(d, kTwoPi - d);
}

double cross(cplx a, cplx b) { return (std::conj(a) * b).imag(); }
double dot(cplx a, cplx b) { return (std::conj(a) * b).real(); }

double shoelace(const std::vector<cplx>& p) {
  double a = 0;
  for (size_t i = 0; i < p.size(); ++i) a += cross(p[i], p[(i + 1) % p.size()]);
  return 0.5 * a;
}

int winding(const std::vector<cplx>& poly, cplx p) {
  int w = 0;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    cplx a = poly[i] - p, b = poly[(i + 1) % n] - p;
    if (a.imag() <= 0) {
      if (b.imag() > 0 && cross(b - a, -a) < 0) ++w;
    } else {
      if (b.imag() <= 0 && cross(b - a, -a) > 0) --w;
    }
  }
  return -w;
}

// Newton on a small square system with a central-difference Jacobian and
// step halving on the residual norm.
bool newtonSolve(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& F, Eigen::VectorXd& x, double tol,
                 int maxIter = 60, double h = 1e-7) {
  Eigen::VectorXd r = F(x);
  for (int it = 0; it < maxIter; ++it) {
    if (r.norm() <= tol) return true;
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd J(r.size(), n);
    for (int k = 0; k < n; ++k) {
      Eigen::VectorXd xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      J.col(k) = (F(xp) - F(xm)) / (2 * h);
    }
    Eigen::VectorXd dx = J.colPivHouseholderQr().solve(-r);
    double lam = 1.0;
    bool moved = false;
    for (int k = 0; k < 30; ++k) {
      Eigen::VectorXd xn = x + lam * dx;
      Eigen::VectorXd rn = F(xn);
      if (rn.norm() < r.norm()) {
        x = xn;
        r = rn;
        moved = true;
        break;
      }
      lam *= 0.5;
    }
    if (!moved) return r.norm() <= tol;
  }
  return r.norm() <= tol;
}

// Minimum of a unimodal function on [a, b]; returns the argument.
double goldenArgMin(const std::function<double(double)>& h, double a, double b, int iters = 80) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = h(x1), f2 = h(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = h(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = h(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

std::vector<cplx> sampleClosed(const PlaneArc& c, int n) {
  std::vector<cplx> p(n);
  for (int k = 0; k < n; ++k) p[k] = c.pos(kTwoPi * k / n);
  return p;
}

double diameterOf(const std::vector<cplx>& pts) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& p : pts) {
    x0 = std::min(x0, p.real());
    x1 = std::max(x1, p.real());
    y0 = std::min(y0, p.imag());
    y1 = std::max(y1, p.imag());
  }
  return std::hypot(x1 - x0, y1 - y0);
}

double pieceScale(const PlacedPiece& p) { return diameterOf(sampleClosed(p.curve, 512)); }

PlacedPiece circleLike(cplx c, double r, bool inside) {
  if (!(r > 0)) throw InputError("disk radius must be positive");
  PlacedPiece p;
  p.kind = inside ? PieceKind::Disk : PieceKind::DiskExterior;
  p.multiplicity = inside ? 1 : 0;
  p.transform.scale = r;
  p.transform.translation = c;
  p.domainOnLeft = inside;
  p.curve.s0 = 0;
  p.curve.s1 = kTwoPi;
  p.curve.pos = [c, r](double t) { return c + r * std::polar(1.0, t); };
  p.curve.vel = [r](double t) { return cplx(0, r) * std::polar(1.0, t); };
  p.curve.acc = [r](double t) { return -r * std::polar(1.0, t); };
  return p;
}

void rethrowWith(const std::string& prefix) {
  try {
    throw;
  } catch (const InputError& e) {
    throw InputError(prefix + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(prefix + e.what());
  } catch (const InvariantViolation& e) {
    throw InvariantViolation(prefix + e.what());
  } catch (const std::exception& e) {
    throw NumericalError(prefix + e.what());
  }
}

// ---------------------------------------------------------------- contacts

struct PairSolve {
  bool ok = false;
  double s = 0, t = 0, dist = 0;
};

// Parallel tangents and offset normal to P: regular at tangential contacts.
PairSolve solvePair(const PlaneArc& P, const PlaneArc& Q, double s, double t) {
  auto F = [&](const Eigen::VectorXd& x) {
    cplx vp = P.vel(x[0]), vq = Q.vel(x[1]);
    double np = std::max(std::abs(vp), 1e-300), nq = std::max(std::abs(vq), 1e-300);
    Eigen::VectorXd r(2);
    r[0] = cross(vp, vq) / (np * nq);
    r[1] = dot(P.pos(x[0]) - Q.pos(x[1]), vp) / np;
    return r;
  };
  Eigen::VectorXd x(2);
  x << s, t;
  PairSolve out;
  newtonSolve(F, x, 1e-15, 60);
  Eigen::VectorXd r = F(x);
  out.s = x[0];
  out.t = x[1];
  out.dist = std::abs(P.pos(x[0]) - Q.pos(x[1]));
  out.ok = std::isfinite(out.dist) && std::abs(r[0]) < 1e-9;
  return out;
}

struct FoundContact {
  double s, t, dist;
  cplx point;
};

std::vector<FoundContact> findContacts(const PlaneArc& P, const PlaneArc& Q, double tol, double coarse) {
  const int n = 2048;
  auto ps = sampleClosed(P, n), qs = sampleClosed(Q, n);
  std::vector<double> dmin(n);
  std::vector<int> jmin(n);
  for (int i = 0; i < n; ++i) {
    double best = 1e300;
    int bj = 0;
    for (int j = 0; j < n; ++j) {
      double d = std::norm(ps[i] - qs[j]);
      if (d < best) {
        best = d;
        bj = j;
      }
    }
    dmin[i] = std::sqrt(best);
    jmin[i] = bj;
  }
  std::vector<FoundContact> out;
  for (int i = 0; i < n; ++i) {
    double a = dmin[(i + n - 1) % n], b = dmin[(i + 1) % n];
    if (!(dmin[i] <= a && dmin[i] <= b && dmin[i] <= coarse)) continue;
    PairSolve r = solvePair(P, Q, kTwoPi * i / n, kTwoPi * jmin[i] / n);
    if (!r.ok) continue;
    if (r.dist > tol) {
      if (r.dist <= 10 * tol) {
        std::ostringstream os;
        os << "ambiguous near contact at distance " << r.dist << " (snap tolerance " << tol
           << "); refine the placement or the sampling";
        throw NumericalError(os.str());
      }
      continue;
    }
    double s = wrap(r.s), t = wrap(r.t);
    bool dup = false;
    for (const auto& c : out)
      if (circDist(c.s, s) < 1e-6 && circDist(c.t, t) < 1e-6) dup = true;
    if (!dup) out.push_back({s, t, r.dist, 0.5 * (P.pos(s) + Q.pos(t))});
  }
  return out;
}

bool segmentsCross(cplx a, cplx b, cplx c, cplx d) {
  double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

// Transversal crossings of the two polylines away from the listed contacts.
std::optional<cplx> crossingAwayFrom(const PlaneArc& P, const PlaneArc& Q, const std::vector<cplx>& contacts) {
  const int n = 2048;
  auto ps = sampleClosed(P, n), qs = sampleClosed(Q, n);
  double hp = 0, hq = 0;
  for (int i = 0; i < n; ++i) {
    hp = std::max(hp, std::abs(ps[(i + 1) % n] - ps[i]));
    hq = std::max(hq, std::abs(qs[(i + 1) % n] - qs[i]));
  }
  const double exclusion = 4 * std::max(hp, hq);
  for (int i = 0; i < n; ++i) {
    cplx a = ps[i], b = ps[(i + 1) % n];
    double ax0 = std::min(a.real(), b.real()), ax1 = std::max(a.real(), b.real());
    double ay0 = std::min(a.imag(), b.imag()), ay1 = std::max(a.imag(), b.imag());
    for (int j = 0; j < n; ++j) {
      cplx c = qs[j], d = qs[(j + 1) % n];
      if (std::max(c.real(), d.real()) < ax0 || std::min(c.real(), d.real()) > ax1) continue;
      if (std::max(c.imag(), d.imag()) < ay0 || std::min(c.imag(), d.imag()) > ay1) continue;
      if (!segmentsCross(a, b, c, d)) continue;
      bool near = false;
      for (const auto& k : contacts)
        if (std::abs(a - k) < exclusion) near = true;
      if (!near) return a;
    }
  }
  return std::nullopt;
}

// ------------------------------------------------------------- arrangement

struct Arrangement {
  struct Vertex {
    cplx p;
    std::vector<int> out;  // outgoing half-edges, counterclockwise
  };
  struct Edge {
    int piece;
    double t0, t1;
    int v0, v1;
    std::vector<cplx> poly;
  };
  struct Face {
    std::vector<int> cycles;
    bool bounded = true;
    bool domain = false;
  };
  std::vector<Vertex> V;
  std::vector<Edge> E;
  std::vector<double> angle;  // per half-edge
  std::vector<int> next, cycleOf;
  std::vector<std::vector<int>> cycles;
  std::vector<double> cycleArea;
  std::vector<Face> faces;
  int components = 0;

  int origin(int h) const { return h % 2 == 0 ? E[h / 2].v0 : E[h / 2].v1; }
  int head(int h) const { return h % 2 == 0 ? E[h / 2].v1 : E[h / 2].v0; }
  std::vector<cplx> cyclePolyline(int c) const {
    std::vector<cplx> out;
    for (int h : cycles[c]) {
      const auto& poly = E[h / 2].poly;
      if (h % 2 == 0)
        out.insert(out.end(), poly.begin(), poly.end() - 1);
      else
        out.insert(out.end(), poly.rbegin(), poly.rend() - 1);
    }
    return out;
  }
  // Interior angle of the face at the corner entering next(h).
  double cornerAngle(int h) const {
    double a = angle[h ^ 1] - angle[next[h]];
    a = std::fmod(a, kTwoPi);
    if (a < 0) a += kTwoPi;
    return a;
  }
};

struct DisjointSets {
  std::vector<int> p;
  explicit DisjointSets(size_t n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  }
  void unite(int a, int b) { p[find(a)] = find(b); }
};

Arrangement buildArrangement(const ConstructionPlan& plan) {
  struct Inc {
    int piece;
    double t;
  };
  std::vector<Inc> inc;
  std::vector<std::pair<int, int>> links;
  const int np = static_cast<int>(plan.pieces.size());
  for (int p = 0; p < np; ++p) {
    const auto& pc = plan.pieces[p];
    for (double t : pc.cusps) inc.push_back({p, wrap(t)});
    for (const auto& [a, b] : pc.selfContacts) {
      inc.push_back({p, wrap(a)});
      inc.push_back({p, wrap(b)});
      links.push_back({static_cast<int>(inc.size()) - 2, static_cast<int>(inc.size()) - 1});
    }
  }
  for (const auto& c : plan.contacts) {
    inc.push_back({c.pieceA, wrap(c.tA)});
    inc.push_back({c.pieceB, wrap(c.tB)});
    links.push_back({static_cast<int>(inc.size()) - 2, static_cast<int>(inc.size()) - 1});
  }
  for (int p = 0; p < np; ++p) {
    bool any = false;
    for (const auto& i : inc)
      if (i.piece == p) any = true;
    if (!any) inc.push_back({p, 0.0});
  }
  DisjointSets ds(inc.size());
  for (const auto& [a, b] : links) ds.unite(a, b);
  for (size_t a = 0; a < inc.size(); ++a)
    for (size_t b = a + 1; b < inc.size(); ++b)
      if (inc[a].piece == inc[b].piece && circDist(inc[a].t, inc[b].t) < 1e-9)
        ds.unite(static_cast<int>(a), static_cast<int>(b));

  Arrangement A;
  std::map<int, int> vertexOfRoot;
  std::vector<int> vOf(inc.size());
  std::vector<int> count;
  for (size_t i = 0; i < inc.size(); ++i) {
    int r = ds.find(static_cast<int>(i));
    auto it = vertexOfRoot.find(r);
    if (it == vertexOfRoot.end()) {
      it = vertexOfRoot.emplace(r, static_cast<int>(A.V.size())).first;
      A.V.push_back({0.0, {}});
      count.push_back(0);
    }
    vOf[i] = it->second;
    A.V[it->second].p += plan.pieces[inc[i].piece].curve.pos(inc[i].t);
    count[it->second]++;
  }
  for (size_t v = 0; v < A.V.size(); ++v) A.V[v].p /= count[v];

  std::vector<double> scales(np);
  for (int p = 0; p < np; ++p) scales[p] = pieceScale(plan.pieces[p]);

  for (int p = 0; p < np; ++p) {
    std::vector<std::pair<double, int>> marks;
    for (size_t i = 0; i < inc.size(); ++i)
      if (inc[i].piece == p) marks.push_back({inc[i].t, vOf[i]});
    std::sort(marks.begin(), marks.end());
    std::vector<std::pair<double, int>> uniq;
    for (const auto& m : marks)
      if (uniq.empty() || !(m.second == uniq.back().second && std::abs(m.first - uniq.back().first) < 1e-9))
        uniq.push_back(m);
    if (uniq.size() > 1 && uniq.front().second == uniq.back().second &&
        circDist(uniq.front().first, uniq.back().first) < 1e-9)
      uniq.pop_back();
    const size_t k = uniq.size();
    const PlaneArc& c = plan.pieces[p].curve;
    for (size_t i = 0; i < k; ++i) {
      Arrangement::Edge e;
      e.piece = p;
      e.t0 = uniq[i].first;
      e.t1 = i + 1 < k ? uniq[i + 1].first : uniq[0].first + kTwoPi;
      e.v0 = uniq[i].second;
      e.v1 = uniq[(i + 1) % k].second;
      int m = std::max(8, static_cast<int>(std::ceil(1024 * (e.t1 - e.t0) / kTwoPi)));
      for (int j = 0; j <= m; ++j) e.poly.push_back(c.pos(e.t0 + (e.t1 - e.t0) * j / m));
      A.E.push_back(std::move(e));
    }
  }

  // Direction of each half-edge from a chord of common length at its origin,
  // so tangent branches are ordered by curvature alone.
  const int nh = static_cast<int>(2 * A.E.size());
  auto chordPoint = [&](int h, double u) {
    const auto& e = A.E[h / 2];
    const PlaneArc& c = plan.pieces[e.piece].curve;
    return h % 2 == 0 ? c.pos(e.t0 + u) : c.pos(e.t1 - u);
  };
  for (int h = 0; h < nh; ++h) A.V[A.origin(h)].out.push_back(h);
  A.angle.assign(nh, 0.0);
  for (auto& v : A.V) {
    double sigma = 1e300;
    for (int h : v.out) {
      const auto& e = A.E[h / 2];
      sigma = std::min(sigma, 1e-3 * scales[e.piece]);
      sigma = std::min(sigma, 0.5 * std::abs(chordPoint(h, 0.5 * (e.t1 - e.t0)) - v.p));
    }
    for (int h : v.out) {
      const auto& e = A.E[h / 2];
      const cplx base = chordPoint(h, 0.0);
      double lo = 0, hi = 0.5 * (e.t1 - e.t0);
      for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        if (std::abs(chordPoint(h, mid) - base) > sigma)
          hi = mid;
        else
          lo = mid;
      }
      A.angle[h] = std::arg(chordPoint(h, hi) - base);
    }
  }
  std::vector<int> slot(nh);
  for (auto& v : A.V) {
    std::sort(v.out.begin(), v.out.end(), [&](int a, int b) { return A.angle[a] < A.angle[b]; });
    for (size_t i = 0; i < v.out.size(); ++i) slot[v.out[i]] = static_cast<int>(i);
  }
  A.next.assign(nh, -1);
  for (int h = 0; h < nh; ++h) {
    const auto& out = A.V[A.head(h)].out;
    const int k = static_cast<int>(out.size());
    A.next[h] = out[(slot[h ^ 1] - 1 + k) % k];
  }
  A.cycleOf.assign(nh, -1);
  for (int h = 0; h < nh; ++h) {
    if (A.cycleOf[h] >= 0) continue;
    std::vector<int> cyc;
    int x = h;
    while (A.cycleOf[x] < 0) {
      A.cycleOf[x] = static_cast<int>(A.cycles.size());
      cyc.push_back(x);
      x = A.next[x];
    }
    if (x != h) throw InvariantViolation("arrangement: half-edge successor map is not a permutation");
    A.cycles.push_back(cyc);
  }
  for (size_t c = 0; c < A.cycles.size(); ++c) A.cycleArea.push_back(shoelace(A.cyclePolyline(static_cast<int>(c))));

  // Connected components and their nesting.
  DisjointSets cs(A.V.size());
  for (const auto& e : A.E) cs.unite(e.v0, e.v1);
  std::map<int, int> compId;
  for (size_t v = 0; v < A.V.size(); ++v) compId.emplace(cs.find(static_cast<int>(v)), static_cast<int>(compId.size()));
  A.components = static_cast<int>(compId.size());
  auto compOfCycle = [&](int c) { return compId.at(cs.find(A.origin(A.cycles[c][0]))); };
  std::vector<int> outer(A.components, -1);
  std::vector<int> faceOfCycle(A.cycles.size(), -1);
  for (size_t c = 0; c < A.cycles.size(); ++c) {
    if (A.cycleArea[c] > 0) {
      faceOfCycle[c] = static_cast<int>(A.faces.size());
      A.faces.push_back({{static_cast<int>(c)}, true, false});
    } else {
      int k = compOfCycle(static_cast<int>(c));
      if (outer[k] >= 0) throw InvariantViolation("arrangement: a connected component has two outer boundaries");
      outer[k] = static_cast<int>(c);
    }
  }
  const int unbounded = static_cast<int>(A.faces.size());
  A.faces.push_back({{}, false, false});
  for (int k = 0; k < A.components; ++k) {
    if (outer[k] < 0) throw InvariantViolation("arrangement: a connected component has no outer boundary");
    cplx probe = A.V[A.origin(A.cycles[outer[k]][0])].p;
    int host = unbounded;
    double hostArea = 1e300;
    for (size_t c = 0; c < A.cycles.size(); ++c) {
      if (A.cycleArea[c] <= 0 || compOfCycle(static_cast<int>(c)) == k) continue;
      if (A.cycleArea[c] < hostArea && winding(A.cyclePolyline(static_cast<int>(c)), probe) != 0) {
        host = faceOfCycle[c];
        hostArea = A.cycleArea[c];
      }
    }
    A.faces[host].cycles.push_back(outer[k]);
  }
  for (auto& f : A.faces) {
    int dom = 0, comp = 0;
    for (int c : f.cycles)
      for (int h : A.cycles[c]) {
        bool left = plan.pieces[A.E[h / 2].piece].domainOnLeft;
        ((h % 2 == 0) == left ? dom : comp)++;
      }
    if (dom > 0 && comp > 0)
      throw InvariantViolation("arrangement: a face lies on the domain side of some boundaries and the complement side "
                               "of others; pieces overlap");
    f.domain = dom > 0;
  }
  return A;
}

struct ComplementFace {
  int face;  // index into Arrangement::faces
  FaceReport report;
};

PlaneCurve curveOfCycle(const ConstructionPlan& plan, const Arrangement& A, int c) {
  std::vector<PlaneArc> arcs;
  for (int h : A.cycles[c]) {
    const auto& e = A.E[h / 2];
    PlaneArc a = plan.pieces[e.piece].curve;
    a.s0 = e.t0;
    a.s1 = e.t1;
    arcs.push_back(h % 2 == 0 ? a : reversed(a));
  }
  return classifyJordanCurve(arcs);
}

std::vector<ComplementFace> complementFaces(const ConstructionPlan& plan, const Arrangement& A, bool classify) {
  std::vector<ComplementFace> out;
  for (size_t f = 0; f < A.faces.size(); ++f) {
    const auto& F = A.faces[f];
    if (F.domain) continue;
    ComplementFace cf;
    cf.face = static_cast<int>(f);
    FaceReport& r = cf.report;
    r.id = static_cast<int>(out.size());
    r.bounded = F.bounded;
    r.boundaryCycles = static_cast<int>(F.cycles.size());
    std::set<int> pieces;
    for (int c : F.cycles)
      for (int h : A.cycles[c]) {
        pieces.insert(A.E[h / 2].piece);
        if (A.cornerAngle(h) < 0.5) r.singularPoints++;
      }
    r.pieces.assign(pieces.begin(), pieces.end());
    if (F.bounded) r.area = A.cycleArea[F.cycles[0]];
    if (classify && F.cycles.size() == 1) {
      std::set<int> seen;
      bool simple = true;
      for (int h : A.cycles[F.cycles[0]])
        if (!seen.insert(A.origin(h)).second) simple = false;
      if (simple) {
        try {
          r.classification = curveOfCycle(plan, A, F.cycles[0]).classification;
        } catch (const std::exception&) {
          r.classification = "other";
        }
      }
    }
    out.push_back(std::move(cf));
  }
  return out;
}

// ------------------------------------------------------------------- seeds

std::mutex& cacheMutex() {
  static std::mutex m;
  return m;
}

// Outer boundary of an extreme S-class map as a cardioid-like template.
PlaneCurve templateCurve(int mu) {
  static std::map<int, PlaneCurve> cache;
  {
    std::lock_guard<std::mutex> lock(cacheMutex());
    auto it = cache.find(mu);
    if (it != cache.end()) return it->second;
  }
  BoundaryMap f = extremeMap(Family::S, mu);
  ConstructionPlan tmp;
  tmp.pieces.push_back(extremePiece(f, {}));
  Arrangement A = buildArrangement(tmp);
  int outerCycle = -1;
  for (const auto& F : A.faces)
    if (!F.bounded) outerCycle = F.cycles.at(0);
  PlaneCurve C = curveOfCycle(tmp, A, outerCycle);
  if (C.classification != "cardioid-like" || C.arcs.size() != 1) {
    std::ostringstream os;
    os << "outer boundary of the extreme map of order " << mu << " is not cardioid-like: " << C.reason;
    throw NumericalError(os.str());
  }
  std::lock_guard<std::mutex> lock(cacheMutex());
  cache.emplace(mu, C);
  return C;
}

// Smallest disk containing the image of f, touching it at two or three points.
std::pair<cplx, double> enclosingCircle(const PlaneArc& c) {
  const int n = 4096;
  auto pts = sampleClosed(c, n);
  auto radius = [&](cplx z) {
    double r = 0;
    for (const auto& p : pts) r = std::max(r, std::abs(p - z));
    return r;
  };
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& p : pts) {
    x0 = std::min(x0, p.real());
    x1 = std::max(x1, p.real());
    y0 = std::min(y0, p.imag());
    y1 = std::max(y1, p.imag());
  }
  auto bestY = [&](double x) { return goldenArgMin([&](double y) { return radius({x, y}); }, y0, y1, 60); };
  double cx = goldenArgMin([&](double x) { return radius({x, bestY(x)}); }, x0, x1, 60);
  cplx center(cx, bestY(cx));
  double R = radius(center);
  // Active groups of samples.
  std::vector<int> active;
  for (int i = 0; i < n; ++i)
    if (std::abs(pts[i] - center) >= R * (1 - 2e-3)) active.push_back(i);
  std::vector<int> reps;
  for (size_t k = 0; k < active.size(); ++k) {
    int i = active[k];
    bool startsGroup = k == 0 || active[k - 1] != i - 1;
    if (startsGroup) reps.push_back(i);
    if (std::abs(pts[i] - center) > std::abs(pts[reps.back()] - center)) reps.back() = i;
  }
  if (reps.size() > 1 && active.front() == 0 && active.back() == n - 1) {
    if (std::abs(pts[reps.back()] - center) > std::abs(pts[reps.front()] - center)) reps.front() = reps.back();
    reps.pop_back();
  }
  auto check = [&](cplx z, double r) {
    for (int i = 0; i < 4 * n; ++i)
      if (std::abs(c.pos(kTwoPi * i / (4 * n)) - z) > r * (1 + 1e-9)) return false;
    return true;
  };
  if (reps.size() == 2) {
    auto F = [&](const Eigen::VectorXd& x) {
      cplx d = c.pos(x[0]) - c.pos(x[1]);
      Eigen::VectorXd r(2);
      r[0] = dot(d, c.vel(x[0]));
      r[1] = dot(d, c.vel(x[1]));
      return r;
    };
    Eigen::VectorXd x(2);
    x << kTwoPi * reps[0] / n, kTwoPi * reps[1] / n;
    if (newtonSolve(F, x, 1e-12)) {
      cplx z = 0.5 * (c.pos(x[0]) + c.pos(x[1]));
      double r = 0.5 * std::abs(c.pos(x[0]) - c.pos(x[1]));
      if (check(z, r)) return {z, r};
    }
  }
  if (reps.size() >= 2) {
    // Three active points: circumcircle with tangency at each.
    std::vector<int> three = reps;
    while (three.size() < 3) three.push_back((three.back() + n / 2) % n);
    three.resize(3);
    auto F = [&](const Eigen::VectorXd& x) {
      cplx z(x[0], x[1]);
      Eigen::VectorXd r(5);
      cplx p1 = c.pos(x[2]), p2 = c.pos(x[3]), p3 = c.pos(x[4]);
      r[0] = std::norm(p2 - z) - std::norm(p1 - z);
      r[1] = std::norm(p3 - z) - std::norm(p1 - z);
      r[2] = dot(p1 - z, c.vel(x[2]));
      r[3] = dot(p2 - z, c.vel(x[3]));
      r[4] = dot(p3 - z, c.vel(x[4]));
      return r;
    };
    Eigen::VectorXd x(5);
    x << center.real(), center.imag(), kTwoPi * three[0] / n, kTwoPi * three[1] / n, kTwoPi * three[2] / n;
    if (newtonSolve(F, x, 1e-12)) {
      cplx z(x[0], x[1]);
      double r = std::abs(c.pos(x[2]) - z);
      if (check(z, r)) return {z, r};
    }
  }
  throw NumericalError("enclosing circle: contact refinement failed");
}

// Largest copy sT(C) + t inside the ellipse (x/a)^2 + (y/b)^2 <= 1 with the
// rotation fixed; convexity of the ellipse makes the support-function
// constraints linear in (s, t). Contacts are then refined to tangency.
SimilarityTransform largestInEllipse(const PlaneArc& c, double rotation, double a, double b) {
  const int n = 4096, m = 720;
  std::vector<cplx> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = std::polar(1.0, rotation) * c.pos(kTwoPi * i / n);
  std::vector<double> hK(m), hE(m);
  std::vector<cplx> u(m);
  for (int j = 0; j < m; ++j) {
    u[j] = std::polar(1.0, kTwoPi * j / m);
    double h = -1e300;
    for (const auto& p : pts) h = std::max(h, dot(u[j], p));
    if (!(h > 0)) throw NumericalError("ellipse placement: template does not surround its node");
    hK[j] = h;
    hE[j] = std::hypot(a * u[j].real(), b * u[j].imag());
  }
  auto smax = [&](cplx t) {
    double s = 1e300;
    for (int j = 0; j < m; ++j) s = std::min(s, (hE[j] - dot(u[j], t)) / hK[j]);
    return s;
  };
  auto bestY = [&](double x) { return goldenArgMin([&](double y) { return -smax({x, y}); }, -b, b, 60); };
  double tx = goldenArgMin([&](double x) { return -smax({x, bestY(x)}); }, -a, a, 60);
  cplx t0(tx, bestY(tx));
  double s0 = smax(t0);

  auto g = [&](cplx w) { return std::norm(cplx(w.real() / a, w.imag() / b)) - 1.0; };
  auto gradg = [&](cplx w) { return cplx(2 * w.real() / (a * a), 2 * w.imag() / (b * b)); };
  const cplx rot = std::polar(1.0, rotation);
  std::vector<double> gv(n);
  for (int i = 0; i < n; ++i) gv[i] = g(s0 * pts[i] + t0);
  std::vector<std::pair<double, int>> peaks;
  for (int i = 0; i < n; ++i)
    if (gv[i] >= gv[(i + n - 1) % n] && gv[i] > gv[(i + 1) % n] && gv[i] > -2e-2) peaks.push_back({gv[i], i});
  std::sort(peaks.rbegin(), peaks.rend());
  if (peaks.size() < 3) throw NumericalError("ellipse placement: fewer than three contact candidates");
  peaks.resize(3);
  auto F = [&](const Eigen::VectorXd& x) {
    cplx t(x[1], x[2]);
    Eigen::VectorXd r(6);
    for (int k = 0; k < 3; ++k) {
      cplx w = x[0] * rot * c.pos(x[3 + k]) + t;
      r[k] = g(w);
      r[3 + k] = dot(gradg(w), rot * c.vel(x[3 + k])) / std::max(std::abs(c.vel(x[3 + k])), 1e-300);
    }
    return r;
  };
  Eigen::VectorXd x(6);
  x << s0, t0.real(), t0.imag(), kTwoPi * peaks[0].second / n, kTwoPi * peaks[1].second / n,
      kTwoPi * peaks[2].second / n;
  if (!newtonSolve(F, x, 1e-14)) throw NumericalError("ellipse placement: tangency refinement did not converge");
  SimilarityTransform T;
  T.rotation = rotation;
  T.scale = x[0];
  T.translation = cplx(x[1], x[2]);
  for (int i = 0; i < 4 * n; ++i)
    if (g(T.apply(c.pos(kTwoPi * i / (4 * n)))) > 1e-9)
      throw NumericalError("ellipse placement: refined template leaves the ellipse");
  return T;
}

// Second cardioid as the point reflection of the first through p = A(tp),
// with tp chosen where a second pair of contacts closes.
SimilarityTransform interlockedReflection(const BoundaryMap& f) {
  const PlaneArc A = arcOfMap(f, 0, kTwoPi);
  const int n = 512;
  std::vector<cplx> apoly(2 * n);
  for (int i = 0; i < 2 * n; ++i) apoly[i] = A.pos(kTwoPi * i / (2 * n));
  auto reflect = [&](double tp) {
    SimilarityTransform T;
    T.rotation = kPi;
    T.scale = 1.0;
    T.translation = 2.0 * A.pos(tp);
    return T;
  };
  // Deepest sample of the reflected copy inside A, away from p.
  auto depth = [&](double tp, int* where) {
    SimilarityTransform T = reflect(tp);
    cplx p = A.pos(tp);
    int best = -1;
    for (int i = 0; i < n; ++i) {
      cplx w = T.apply(A.pos(kTwoPi * i / n));
      if (std::abs(w - p) < 0.05) continue;
      if (winding(apoly, w) != 0) {
        best = i;
        break;
      }
    }
    if (where) *where = best;
    return best >= 0;
  };
  double lo = 2 * kPi / 3, hi = -1;
  if (depth(lo, nullptr)) throw NumericalError("interlocked cardioids: start position already overlaps");
  for (int k = 1; k <= 64; ++k) {
    double t = 2 * kPi / 3 + (kPi / 3) * k / 65.0;
    if (depth(t, nullptr)) {
      hi = t;
      break;
    }
    lo = t;
  }
  if (hi < 0) throw NumericalError("interlocked cardioids: no second contact along the lobe");
  for (int k = 0; k < 50; ++k) {
    double mid = 0.5 * (lo + hi);
    if (depth(mid, nullptr))
      hi = mid;
    else
      lo = mid;
  }
  // Closest pair between A and the reflected copy away from p.
  SimilarityTransform T = reflect(lo);
  cplx p = A.pos(lo);
  double bestD = 1e300, sa = 0, sb = 0;
  for (int i = 0; i < n; ++i) {
    double s = kTwoPi * i / n;
    cplx w = T.apply(A.pos(s));
    if (std::abs(w - p) < 0.05) continue;
    for (int j = 0; j < n; ++j) {
      double d = std::abs(A.pos(kTwoPi * j / n) - w);
      if (d < bestD) {
        bestD = d;
        sb = s;
        sa = kTwoPi * j / n;
      }
    }
  }
  auto F = [&](const Eigen::VectorXd& x) {
    SimilarityTransform R = reflect(x[0]);
    cplx d = A.pos(x[1]) - R.apply(A.pos(x[2]));
    cplx va = A.vel(x[1]), vb = R.applyVector(A.vel(x[2]));
    Eigen::VectorXd r(3);
    r[0] = d.real();
    r[1] = d.imag();
    r[2] = cross(va, vb) / (std::abs(va) * std::abs(vb));
    return r;
  };
  Eigen::VectorXd x(3);
  x << lo, sa, sb;
  if (!newtonSolve(F, x, 1e-14)) throw NumericalError("interlocked cardioids: contact refinement did not converge");
  return reflect(x[0]);
}

int expectedIncrement(int mu) { return mu == 1 ? 2 : mu + 1; }

struct Builder {
  ConstructionPlan plan;
  ConstructOptions opt;

  void seed(PlacedPiece p, const std::string& what) {
    p.stage = 0;
    try {
      addPiece(plan, std::move(p), opt.contactTol);
    } catch (...) {
      rethrowWith("seed (" + what + "): ");
    }
  }

  int faceCount() {
    Arrangement A = buildArrangement(plan);
    return static_cast<int>(complementFaces(plan, A, false).size());
  }

  void finishSeed(const std::string& what, int expected) {
    ConstructionStage st;
    st.index = 0;
    st.action = what;
    st.facesAfter = faceCount();
    st.detail = {{"expectedFaces", expected}};
    if (st.facesAfter != expected) {
      std::ostringstream os;
      os << "seed (" << what << ") has " << st.facesAfter << " complement faces, expected " << expected;
      throw NumericalError(os.str());
    }
    plan.stages.push_back(st);
  }

  void inscribeAll(const std::vector<int>& rest) {
    for (int mu : rest) {
      const int stage = static_cast<int>(plan.stages.size());
      Arrangement A = buildArrangement(plan);
      auto faces = complementFaces(plan, A, true);
      const int before = static_cast<int>(faces.size());
      int host = -1;
      for (const auto& f : faces)
        if (f.report.classification == "deltoid-like" && (host < 0 || f.report.area > faces[host].report.area))
          host = f.report.id;
      std::ostringstream where;
      where << "stage " << stage << ", face " << host << ": ";
      if (host < 0) throw NumericalError(where.str() + "no deltoid-like face to host the next domain");
      PlaneCurve T = curveOfCycle(plan, A, A.faces[faces[host].face].cycles[0]);
      PlacedPiece piece;
      nlohmann::json detail;
      try {
        if (mu == 1) {
          auto r = inscribeCircle(T, opt.inscribe);
          piece = diskPiece(r.transform.translation, r.transform.scale);
          detail = toJson(r);
        } else {
          auto r = inscribeCardioid(T, templateCurve(mu), opt.inscribe);
          piece = extremePiece(extremeMap(Family::S, mu), r.transform);
          detail = toJson(r);
        }
        detail.erase("sideTrace");
        piece.stage = stage;
        piece.hostFace = host;
        addPiece(plan, std::move(piece), opt.contactTol);
      } catch (...) {
        rethrowWith(where.str());
      }
      ConstructionStage st;
      st.index = stage;
      st.action = mu == 1 ? "inscribe circle" : "inscribe extreme BQD of order " + std::to_string(mu);
      st.piece = static_cast<int>(plan.pieces.size()) - 1;
      st.hostFace = host;
      st.facesAfter = faceCount();
      st.detail = detail;
      const int expected = before + expectedIncrement(mu);
      if (st.facesAfter != expected) {
        std::ostringstream os;
        os << where.str() << "inscription produced " << st.facesAfter << " complement faces, expected " << expected;
        throw NumericalError(os.str());
      }
      plan.stages.push_back(st);
    }
  }
};

void validatePartition(const std::vector<int>& partition) {
  if (partition.empty()) throw InputError("partition is empty");
  for (int m : partition)
    if (m < 1) throw InputError("partition entries must be positive integers");
}

// Cusp of the template as seen from its node at the origin.
double cuspDirection(int mu) { return std::arg(templateCurve(mu).cusps.at(0).point); }

}  // namespace

// ------------------------------------------------------------------ public

std::string toString(PlanKind k) {
  switch (k) {
    case PlanKind::UqdFiniteNodes:
      return "UQD-finite-nodes";
    case PlanKind::UqdNodeAtInfinity:
      return "UQD-node-at-infinity";
    default:
      return "BQD";
  }
}

std::string toString(PieceKind k) {
  switch (k) {
    case PieceKind::Disk:
      return "disk";
    case PieceKind::DiskExterior:
      return "disk-exterior";
    case PieceKind::EllipseExterior:
      return "ellipse-exterior";
    case PieceKind::ExtremeBqd:
      return "extreme-bqd";
    default:
      return "extreme-uqd";
  }
}

std::optional<cplx> PlacedPiece::node() const {
  if (kind == PieceKind::Disk) return transform.translation;
  if (kind == PieceKind::ExtremeBqd && map) return transform.apply((*map)(0.0));
  return std::nullopt;
}

PlacedPiece diskPiece(cplx center, double radius) { return circleLike(center, radius, true); }
PlacedPiece diskExteriorPiece(cplx center, double radius) { return circleLike(center, radius, false); }

PlacedPiece ellipseExteriorPiece(double a, double b) {
  if (!(a > 0 && b > 0)) throw InputError("ellipse semi-axes must be positive");
  PlacedPiece p;
  p.kind = PieceKind::EllipseExterior;
  p.multiplicity = 1;
  p.ellipseA = a;
  p.ellipseB = b;
  p.domainOnLeft = false;
  p.curve.s0 = 0;
  p.curve.s1 = kTwoPi;
  p.curve.pos = [a, b](double t) { return cplx(a * std::cos(t), b * std::sin(t)); };
  p.curve.vel = [a, b](double t) { return cplx(-a * std::sin(t), b * std::cos(t)); };
  p.curve.acc = [a, b](double t) { return cplx(-a * std::cos(t), -b * std::sin(t)); };
  return p;
}

PlacedPiece extremePiece(const BoundaryMap& f, const SimilarityTransform& T) {
  PlacedPiece p;
  p.kind = f.family() == Family::S ? PieceKind::ExtremeBqd : PieceKind::ExtremeUqd;
  p.multiplicity = f.degree();
  p.transform = T;
  p.map = f;
  p.domainOnLeft = f.family() == Family::S;
  p.curve = transformed(arcOfMap(f, 0, kTwoPi), T);
  for (const auto& c : findCusps(f)) p.cusps.push_back(c.t);
  for (const auto& dp : findDoublePoints(f)) {
    if (!dp.tangential) throw InputError("extreme piece has a transversal self-crossing; the map is not univalent");
    p.selfContacts.push_back({dp.tMinus, dp.tPlus});
  }
  return p;
}

BoundaryMap extremeMap(Family fam, int d) {
  if (d < 2) throw InputError("extreme maps need order >= 2");
  if (d <= 5) return knownSuffridge(fam, d);
  static std::map<std::pair<int, int>, BoundaryMap> cache;
  const std::pair<int, int> key{fam == Family::S ? 0 : 1, d};
  {
    std::lock_guard<std::mutex> lock(cacheMutex());
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto r = extremalize(symmetricStart(fam, d));
  if (!r.extreme) throw NumericalError("extremalization fell short: " + r.shortfall);
  std::lock_guard<std::mutex> lock(cacheMutex());
  cache.emplace(key, r.f);
  return r.f;
}

double ellipseGammaThreshold() { return (2 - std::sqrt(2.0)) / (2 + std::sqrt(2.0)); }

void addPiece(ConstructionPlan& plan, PlacedPiece piece, double contactTol) {
  std::vector<cplx> all = sampleClosed(piece.curve, 512);
  for (const auto& q : plan.pieces) {
    auto s = sampleClosed(q.curve, 512);
    all.insert(all.end(), s.begin(), s.end());
  }
  plan.scale = diameterOf(all);
  const double tol = contactTol * plan.scale;
  const int index = static_cast<int>(plan.pieces.size());
  std::vector<ContactRecord> found;
  for (int j = 0; j < index; ++j) {
    const PlaneArc& Q = plan.pieces[j].curve;
    auto cs = findContacts(piece.curve, Q, tol, 0.05 * plan.scale);
    std::vector<cplx> pts;
    for (const auto& c : cs) {
      found.push_back({j, index, c.t, c.s, c.point, c.dist});
      pts.push_back(c.point);
    }
    if (auto x = crossingAwayFrom(piece.curve, Q, pts)) {
      std::ostringstream os;
      os << "new boundary crosses piece " << j << " near (" << x->real() << ", " << x->imag() << ")";
      throw InvariantViolation(os.str());
    }
  }
  plan.pieces.push_back(std::move(piece));
  plan.contacts.insert(plan.contacts.end(), found.begin(), found.end());
}

ConstructionPlan buildUnboundedConfig(const std::vector<int>& partition, std::optional<int> infinityNode,
                                      const ConstructOptions& opt) {
  validatePartition(partition);
  const int d = std::accumulate(partition.begin(), partition.end(), 0);
  const int n = static_cast<int>(partition.size());
  if (d < 2) throw InputError("unbounded quadrature domains need order d >= 2");
  std::vector<int> finite = partition;
  std::sort(finite.rbegin(), finite.rend());
  Builder B;
  B.opt = opt;
  B.plan.d = d;
  B.plan.partition = partition;
  if (!infinityNode) {
    B.plan.kind = PlanKind::UqdFiniteNodes;
    B.plan.targetCount = std::min(d + n - 1, 2 * d - 2);
    B.plan.upperBound = B.plan.targetCount;
    std::vector<int> rest;
    if (finite[0] >= 2) {
      const int mu = finite[0];
      BoundaryMap f = extremeMap(Family::S, mu);
      auto [c, R] = enclosingCircle(arcOfMap(f, 0, kTwoPi));
      B.seed(extremePiece(f, {}), "extreme BQD");
      B.seed(diskExteriorPiece(c, R), "enclosing disk");
      B.finishSeed("extreme BQD of order " + std::to_string(mu) + " in its enclosing disk", mu);
      rest.assign(finite.begin() + 1, finite.end());
    } else {
      B.seed(diskExteriorPiece(0.0, 1.0), "unit disk");
      B.seed(diskPiece(-0.5, 0.5), "left disk");
      B.seed(diskPiece(0.5, 0.5), "right disk");
      B.finishSeed("two half-radius disks in the unit disk", 2);
      rest.assign(finite.begin() + 2, finite.end());
    }
    B.inscribeAll(rest);
    return B.plan;
  }

  const int inf = *infinityNode;
  auto it = std::find(finite.begin(), finite.end(), inf);
  if (it == finite.end()) throw InputError("the multiplicity at infinity must occur in the partition");
  finite.erase(it);
  B.plan.kind = PlanKind::UqdNodeAtInfinity;
  B.plan.infinityMultiplicity = inf;
  B.plan.targetCount = d + n - 2;
  B.plan.upperBound = std::min(d + n - 2, 2 * d - 2);
  std::vector<int> rest = finite;
  if (inf >= 2) {
    B.seed(extremePiece(extremeMap(Family::Sigma, inf), {}), "extreme UQD");
    B.finishSeed("extreme UQD of order " + std::to_string(inf), inf - 1);
  } else {
    const double g = opt.gamma;
    if (!(g > ellipseGammaThreshold() && g < 1)) {
      std::ostringstream os;
      os << "ellipse shear gamma = " << g << " outside (" << ellipseGammaThreshold() << ", 1)";
      throw InputError(os.str());
    }
    // Image of the unit circle under z + gamma/z: semi-axes 1 + gamma along x, 1 - gamma along y.
    const double a = 1 + g, b = 1 - g;
    B.seed(ellipseExteriorPiece(a, b), "ellipse");
    if (!finite.empty() && finite[0] >= 2) {
      const int mu = finite[0];
      BoundaryMap f = extremeMap(Family::S, mu);
      SimilarityTransform T = largestInEllipse(arcOfMap(f, 0, kTwoPi), kPi / 2 - cuspDirection(mu), a, b);
      B.seed(extremePiece(f, T), "extreme BQD in the ellipse");
      B.finishSeed("extreme BQD of order " + std::to_string(mu) + " inscribed in the ellipse", mu + 1);
      rest.assign(finite.begin() + 1, finite.end());
    } else if (finite.size() == 1) {
      B.seed(diskPiece(0.0, b), "central disk");
      B.finishSeed("disk across the ellipse", 2);
      rest.clear();
    } else {
      const double x0 = b * std::sqrt(a * a - b * b) / a;
      B.seed(diskPiece(-x0, x0), "left disk");
      B.seed(diskPiece(x0, x0), "right disk");
      B.finishSeed("two equal disks in the ellipse", 4);
      rest.assign(finite.begin() + 2, finite.end());
    }
  }
  B.inscribeAll(rest);
  return B.plan;
}

ConstructionPlan buildBoundedConfig(const std::vector<int>& partition, const ConstructOptions& opt) {
  validatePartition(partition);
  const int d = std::accumulate(partition.begin(), partition.end(), 0);
  const int n = static_cast<int>(partition.size());
  if (d < 3) throw InputError("bounded quadrature domains need order d >= 3");
  std::vector<int> mus = partition;
  std::sort(mus.rbegin(), mus.rend());
  Builder B;
  B.opt = opt;
  B.plan.kind = PlanKind::Bqd;
  B.plan.d = d;
  B.plan.partition = partition;
  std::vector<int> rest;
  if (mus[0] >= 3) {
    B.plan.targetCount = d + n - 2;
    B.plan.upperBound = std::min(d + n - 2, 2 * d - 4);
    B.seed(extremePiece(extremeMap(Family::S, mus[0]), {}), "extreme BQD");
    B.finishSeed("extreme BQD of order " + std::to_string(mus[0]), mus[0] - 1);
    rest.assign(mus.begin() + 1, mus.end());
  } else {
    B.plan.targetCount = std::min(d + n - 3, 2 * d - 4);
    B.plan.upperBound = B.plan.targetCount;
    const int doubles = static_cast<int>(std::count(mus.begin(), mus.end(), 2));
    const int simples = n - doubles;
    BoundaryMap card = extremeMap(Family::S, 2);
    if (simples == 0) {
      B.seed(extremePiece(card, {}), "cardioid");
      B.seed(extremePiece(card, interlockedReflection(card)), "reflected cardioid");
      B.finishSeed("two interlocked cardioids", 3);
      rest.assign(mus.begin() + 2, mus.end());
    } else if (doubles > 0) {
      // Disk in the notch of the cardioid, centered on its axis.
      const cplx c(-1.25, 0.0);
      PlaneArc A = arcOfMap(card, 0, kTwoPi);
      double t = goldenArgMin([&](double s) { return std::abs(A.pos(s) - c); }, kPi / 2, kPi - 1e-3);
      B.seed(extremePiece(card, {}), "cardioid");
      B.seed(diskPiece(c, std::abs(A.pos(t) - c)), "disk in the notch");
      B.finishSeed("cardioid and disk", 2);
      rest = mus;
      rest.erase(std::find(rest.begin(), rest.end(), 2));
      rest.erase(std::find(rest.begin(), rest.end(), 1));
    } else {
      const double R = 2.0 / std::sqrt(3.0);
      for (int k = 0; k < 3; ++k) B.seed(diskPiece(std::polar(R, kPi / 2 + kTwoPi * k / 3), 1.0), "disk");
      B.finishSeed("three mutually tangent disks", 2);
      rest.assign(mus.begin() + 3, mus.end());
    }
  }
  B.inscribeAll(rest);
  return B.plan;
}

ArrangementReport countComplementComponents(const ConstructionPlan& plan, int oracleResolution) {
  if (plan.pieces.empty()) throw InputError("plan has no pieces");
  Arrangement A = buildArrangement(plan);
  ArrangementReport r;
  auto faces = complementFaces(plan, A, true);
  for (auto& f : faces) r.faces.push_back(f.report);
  r.faceCount = static_cast<int>(faces.size());
  r.vertices = static_cast<int>(A.V.size());
  r.edges = static_cast<int>(A.E.size());
  r.components = static_cast<int>(A.components);
  // Euler check over the traced subdivision.
  const int F = static_cast<int>(A.cycles.size()) - A.components + 1;
  if (static_cast<int>(A.V.size()) - static_cast<int>(A.E.size()) + F != 1 + A.components)
    throw InvariantViolation("arrangement: Euler characteristic mismatch");
  r.targetCount = plan.targetCount;
  r.upperBound = plan.upperBound;
  r.achieved = r.faceCount >= r.targetCount;
  if (oracleResolution > 0) {
    r.oracle = rasterFaceCount(plan, oracleResolution);
    r.oracle.agrees = r.oracle.faceCount == r.faceCount;
  }
  if (plan.upperBound > 0 && r.faceCount > plan.upperBound) {
    std::ostringstream os;
    os << "face count " << r.faceCount << " exceeds the connectivity bound " << plan.upperBound;
    throw InvariantViolation(os.str());
  }
  return r;
}

namespace {

struct RasterWindow {
  struct Run {
    int a, b;  // inclusive pixel columns
    int comp;
  };
  double ox = 0, oy = 0, px = 1;  // lower-left corner and pixel size
  int N = 0;
  bool whole = false;              // covers the whole picture
  std::vector<std::vector<Run>> rows;  // free pixels as runs per row
  std::vector<long> sizes;
  std::vector<char> touchesBorder;
};

// Closed polyline of a piece, fine (segments below 0.4 px) near the window and
// coarse away from it. A replaced sub-arc of length L stays within L/2 of its
// chord, so chords farther than L from the window change no pixel.
std::vector<cplx> adaptivePolyline(const PlaneArc& c, double vmax, double x0, double y0, double x1, double y1,
                                   double px) {
  std::vector<cplx> out;
  std::function<void(double, double, cplx, cplx, int)> rec = [&](double ta, double tb, cplx A, cplx B, int depth) {
    const double L = vmax * (tb - ta);
    double dx = std::max({x0 - std::max(A.real(), B.real()), 0.0, std::min(A.real(), B.real()) - x1});
    double dy = std::max({y0 - std::max(A.imag(), B.imag()), 0.0, std::min(A.imag(), B.imag()) - y1});
    if (L <= 0.4 * px || std::hypot(dx, dy) > L || depth > 60) {
      out.push_back(A);
      return;
    }
    double tm = 0.5 * (ta + tb);
    cplx M = c.pos(tm);
    rec(ta, tm, A, M, depth + 1);
    rec(tm, tb, M, B, depth + 1);
  };
  const int n0 = 1024;
  for (int k = 0; k < n0; ++k) {
    double ta = kTwoPi * k / n0, tb = kTwoPi * (k + 1) / n0;
    rec(ta, tb, c.pos(ta), c.pos(tb), 0);
  }
  return out;
}

RasterWindow rasterize(const ConstructionPlan& plan, const std::vector<double>& vmax, cplx lowerLeft, double side,
                       int N) {
  RasterWindow W;
  W.N = N;
  W.px = side / N;
  W.ox = lowerLeft.real();
  W.oy = lowerLeft.imag();
  const double px = W.px, ox = W.ox, oy = W.oy;
  // Blocked column intervals per row: domain pixels and boundary pixels.
  std::vector<std::vector<std::pair<int, int>>> blocked(N);
  std::vector<std::vector<std::pair<double, int>>> crossings(N);
  for (size_t k = 0; k < plan.pieces.size(); ++k) {
    auto P = adaptivePolyline(plan.pieces[k].curve, vmax[k], ox, oy, ox + side, oy + side, px);
    const size_t m = P.size();
    for (auto& r : crossings) r.clear();
    for (size_t i = 0; i < m; ++i) {
      cplx a = P[i], b = P[(i + 1) % m];
      if (a.imag() == b.imag()) continue;
      double ya = (a.imag() - oy) / px - 0.5, yb = (b.imag() - oy) / px - 0.5;
      int j0 = std::max(static_cast<int>(std::ceil(std::min(ya, yb))), 0);
      int j1 = std::min(static_cast<int>(std::ceil(std::max(ya, yb))) - 1, N - 1);
      for (int j = j0; j <= j1; ++j) {
        double u = (j - ya) / (yb - ya);
        double x = (a.real() + u * (b.real() - a.real()) - ox) / px - 0.5;
        crossings[j].push_back({x, yb > ya ? 1 : -1});
      }
    }
    // Winding number of pixel i: crossings at or right of its center.
    const bool inner = plan.pieces[k].domainOnLeft;
    for (int j = 0; j < N; ++j) {
      auto& r = crossings[j];
      std::sort(r.begin(), r.end());
      int w = 0;
      for (const auto& c : r) w += c.second;
      int start = 0;  // first pixel with the current winding
      auto close = [&](int end) {
        if (end >= start && (inner ? w == 1 : w == 0)) blocked[j].push_back({start, end});
      };
      for (const auto& c : r) {
        // First pixel whose center lies strictly right of this crossing.
        int first = static_cast<int>(std::clamp(std::floor(c.first) + 1.0, 0.0, static_cast<double>(N)));
        if (first > start) {
          close(first - 1);
          start = first;
        }
        w -= c.second;
      }
      close(N - 1);
    }
    for (size_t i = 0; i < m; ++i) {
      cplx a = P[i], b = P[(i + 1) % m];
      if (std::max(a.real(), b.real()) < ox || std::min(a.real(), b.real()) > ox + side ||
          std::max(a.imag(), b.imag()) < oy || std::min(a.imag(), b.imag()) > oy + side)
        continue;
      int steps = 1 + static_cast<int>(std::abs(b - a) / (0.25 * px));
      for (int s = 0; s <= steps; ++s) {
        cplx z = a + (b - a) * (static_cast<double>(s) / steps);
        int ii = static_cast<int>(std::floor((z.real() - ox) / px));
        int jj = static_cast<int>(std::floor((z.imag() - oy) / px));
        if (ii >= 0 && ii < N && jj >= 0 && jj < N) blocked[jj].push_back({ii, ii});
      }
    }
  }
  // Free runs and their 4-connected components.
  std::vector<int> parent;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  W.rows.resize(N);
  for (int j = 0; j < N; ++j) {
    auto& bl = blocked[j];
    std::sort(bl.begin(), bl.end());
    int next = 0;
    auto emit = [&](int a, int b) {
      if (a > b) return;
      W.rows[j].push_back({a, b, static_cast<int>(parent.size())});
      parent.push_back(static_cast<int>(parent.size()));
    };
    for (const auto& [a, b] : bl) {
      if (a > next) emit(next, a - 1);
      next = std::max(next, b + 1);
    }
    emit(next, N - 1);
    std::vector<std::pair<int, int>>().swap(bl);
    if (j == 0) continue;
    const auto& up = W.rows[j - 1];
    size_t q = 0;
    for (const auto& r : W.rows[j]) {
      while (q < up.size() && up[q].b < r.a) ++q;
      for (size_t t = q; t < up.size() && up[t].a <= r.b; ++t) {
        int x = find(r.comp), y = find(up[t].comp);
        if (x != y) parent[x] = y;
      }
    }
  }
  std::map<int, int> ids;
  for (int j = 0; j < N; ++j)
    for (auto& r : W.rows[j]) {
      auto [it, fresh] = ids.emplace(find(r.comp), static_cast<int>(ids.size()));
      if (fresh) {
        W.sizes.push_back(0);
        W.touchesBorder.push_back(0);
      }
      r.comp = it->second;
      W.sizes[r.comp] += r.b - r.a + 1;
      if (j == 0 || j == N - 1 || r.a == 0 || r.b == N - 1) W.touchesBorder[r.comp] = 1;
    }
  return W;
}

// Calls f(componentInW, componentInV) for every free pixel of W whose center
// lies in a free pixel of V.
template <class F>
void overlaps(const RasterWindow& W, const RasterWindow& V, F&& f) {
  for (int j = 0; j < W.N; ++j) {
    const double y = W.oy + (j + 0.5) * W.px;
    const int jv = static_cast<int>(std::floor((y - V.oy) / V.px));
    if (jv < 0 || jv >= V.N) continue;
    const auto& vrow = V.rows[jv];
    for (const auto& r : W.rows[j]) {
      const double xa = W.ox + (r.a + 0.5) * W.px, xb = W.ox + (r.b + 0.5) * W.px;
      const int ca = std::max(static_cast<int>(std::floor((xa - V.ox) / V.px)), 0);
      const int cb = std::min(static_cast<int>(std::floor((xb - V.ox) / V.px)), V.N - 1);
      if (ca > cb) continue;
      auto it = std::lower_bound(vrow.begin(), vrow.end(), ca,
                                 [](const RasterWindow::Run& s, int c) { return s.b < c; });
      for (; it != vrow.end() && it->a <= cb; ++it) {
        // Is some center of r inside the columns max(a, ca)..min(b, cb) of V?
        const double lo = V.ox + std::max(it->a, ca) * V.px, hi = V.ox + (std::min(it->b, cb) + 1) * V.px;
        const int i0 = std::max(r.a, static_cast<int>(std::ceil((lo - W.ox) / W.px - 0.5)));
        const int i1 = std::min(r.b, static_cast<int>(std::ceil((hi - W.ox) / W.px - 0.5)) - 1);
        if (i0 <= i1) f(r.comp, it->comp);
      }
    }
  }
}

struct Box {
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  void add(cplx z) {
    x0 = std::min(x0, z.real());
    x1 = std::max(x1, z.real());
    y0 = std::min(y0, z.imag());
    y1 = std::max(y1, z.imag());
  }
  double side() const { return std::max(x1 - x0, y1 - y0); }
  cplx mid() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
};

Box arcBox(const PlaneArc& c, double t0, double t1, int n) {
  Box b;
  for (int k = 0; k <= n; ++k) b.add(c.pos(t0 + (t1 - t0) * k / n));
  return b;
}

}  // namespace

OracleReport rasterFaceCount(const ConstructionPlan& plan, int N, int minPixels) {
  if (N < 16) throw InputError("raster resolution too small");
  if (plan.pieces.empty()) throw InputError("plan has no pieces");
  OracleReport rep;
  rep.resolution = N;
  rep.minPixels = minPixels;
  std::vector<double> vmax;
  Box all;
  for (const auto& p : plan.pieces) {
    double v = 0;
    for (int k = 0; k < 4096; ++k) v = std::max(v, std::abs(p.curve.vel(kTwoPi * k / 4096)));
    vmax.push_back(1.05 * v);
    Box b = arcBox(p.curve, 0, kTwoPi, 1024);
    all.add({b.x0, b.y0});
    all.add({b.x1, b.y1});
  }
  // Whole picture, then zoomed windows on each piece and on each loop cut off
  // by a self-contact, wherever they resolve at least four times finer.
  std::vector<Box> boxes{all};
  for (const auto& p : plan.pieces) {
    boxes.push_back(arcBox(p.curve, 0, kTwoPi, 1024));
    for (const auto& [a, b] : p.selfContacts) {
      double t0 = wrap(a), t1 = wrap(b);
      if (t1 < t0) std::swap(t0, t1);
      Box in = arcBox(p.curve, t0, t1, 512), out = arcBox(p.curve, t1, t0 + kTwoPi, 512);
      boxes.push_back(in.side() < out.side() ? in : out);
    }
  }
  // A free pixel lies inside a single face, so overlapping free pixels of two
  // windows identify their components. A zoomed component that links to no
  // earlier window and runs into the window border may be a sliver of a face
  // resolved elsewhere; its window is enlarged fourfold until the question
  // settles or the enlargement would reach the whole picture.
  const double wholeSide = 1.06 * all.side();
  struct Pending {
    cplx mid;
    double side;
  };
  std::vector<Pending> queue{{all.mid(), wholeSide}};
  for (size_t k = 1; k < boxes.size(); ++k)
    if (1.06 * boxes[k].side() <= 0.25 * wholeSide) queue.push_back({boxes[k].mid(), 1.06 * boxes[k].side()});
  std::vector<RasterWindow> wins;
  std::vector<int> base{0};
  std::vector<int> parent;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (size_t q = 0; q < queue.size(); ++q) {
    const Pending pw = queue[q];
    RasterWindow W = rasterize(plan, vmax, pw.mid - cplx(0.5 * pw.side, 0.5 * pw.side), pw.side, N);
    W.whole = q == 0;
    const int b0 = base.back();
    base.push_back(b0 + static_cast<int>(W.sizes.size()));
    for (size_t c = 0; c < W.sizes.size(); ++c) parent.push_back(b0 + static_cast<int>(c));
    std::vector<char> linked(W.sizes.size(), 0);
    for (size_t v = 0; v < wins.size(); ++v)
      overlaps(W, wins[v], [&](int cw, int cv) {
        int x = find(b0 + cw), y = find(base[v] + cv);
        if (x != y) parent[x] = y;
        linked[cw] = 1;
      });
    bool grow = false;
    for (size_t c = 0; c < W.sizes.size(); ++c)
      if (!W.whole && !linked[c] && W.touchesBorder[c] && W.sizes[c] >= minPixels) grow = true;
    if (grow && 4 * pw.side < wholeSide) queue.push_back({pw.mid, 4 * pw.side});
    wins.push_back(std::move(W));
  }
  rep.windows = static_cast<int>(wins.size());
  std::map<int, bool> classes;
  for (size_t w = 0; w < wins.size(); ++w)
    for (size_t c = 0; c < wins[w].sizes.size(); ++c) {
      bool settled = wins[w].sizes[c] >= minPixels && (wins[w].whole || !wins[w].touchesBorder[c]);
      auto [it, fresh] = classes.emplace(find(base[w] + static_cast<int>(c)), settled);
      if (!fresh) it->second = it->second || settled;
    }
  for (const auto& [root, big] : classes) (big ? rep.faceCount : rep.fragments)++;
  return rep;
}

PlaneCurve complementFaceCurve(const ConstructionPlan& plan, int faceId) {
  Arrangement A = buildArrangement(plan);
  auto faces = complementFaces(plan, A, false);
  if (faceId < 0 || faceId >= static_cast<int>(faces.size())) throw InputError("face id out of range");
  const auto& F = A.faces[faces[faceId].face];
  if (F.cycles.size() != 1) throw InputError("face boundary is not a single closed curve");
  return curveOfCycle(plan, A, F.cycles[0]);
}

nlohmann::json toJson(const ConstructionPlan& p) {
  nlohmann::json j;
  j["schema"] = 1;
  j["kind"] = toString(p.kind);
  j["d"] = p.d;
  j["n"] = p.partition.size();
  j["partition"] = p.partition;
  if (p.infinityMultiplicity > 0) j["infinityMultiplicity"] = p.infinityMultiplicity;
  j["targetCount"] = p.targetCount;
  j["upperBound"] = p.upperBound;
  j["scale"] = p.scale;
  auto pieces = nlohmann::json::array();
  for (size_t k = 0; k < p.pieces.size(); ++k) {
    const auto& q = p.pieces[k];
    nlohmann::json e;
    e["id"] = k;
    e["kind"] = toString(q.kind);
    e["multiplicity"] = q.multiplicity;
    if (auto nd = q.node()) e["node"] = toJson(*nd);
    if (q.kind == PieceKind::ExtremeUqd || q.kind == PieceKind::EllipseExterior) e["node"] = "infinity";
    e["stage"] = q.stage;
    e["hostFace"] = q.hostFace;
    if (q.kind == PieceKind::Disk || q.kind == PieceKind::DiskExterior) {
      e["center"] = toJson(q.transform.translation);
      e["radius"] = q.transform.scale;
    } else if (q.kind == PieceKind::EllipseExterior) {
      e["semiAxes"] = {q.ellipseA, q.ellipseB};
    } else {
      e["transform"] = toJson(q.transform);
      e["map"] = toJson(*q.map);
    }
    e["cusps"] = q.cusps.size();
    e["doublePoints"] = q.selfContacts.size();
    pieces.push_back(e);
  }
  j["pieces"] = pieces;
  auto contacts = nlohmann::json::array();
  for (const auto& c : p.contacts)
    contacts.push_back({{"pieces", {c.pieceA, c.pieceB}},
                        {"t", {c.tA, c.tB}},
                        {"point", toJson(c.point)},
                        {"separation", c.separation}});
  j["contacts"] = contacts;
  auto stages = nlohmann::json::array();
  for (const auto& s : p.stages)
    stages.push_back({{"index", s.index},
                      {"action", s.action},
                      {"piece", s.piece},
                      {"hostFace", s.hostFace},
                      {"facesAfter", s.facesAfter},
                      {"detail", s.detail}});
  j["stages"] = stages;
  return j;
}

nlohmann::json toJson(const ArrangementReport& r) {
  nlohmann::json j;
  j["schema"] = 1;
  j["faceCount"] = r.faceCount;
  j["targetCount"] = r.targetCount;
  j["upperBound"] = r.upperBound;
  j["achieved"] = r.achieved;
  j["vertices"] = r.vertices;
  j["edges"] = r.edges;
  j["components"] = r.components;
  auto faces = nlohmann::json::array();
  for (const auto& f : r.faces)
    faces.push_back({{"id", f.id},
                     {"bounded", f.bounded},
                     {"boundaryCycles", f.boundaryCycles},
                     {"singularPoints", f.singularPoints},
                     {"classification", f.classification},
                     {"area", f.area},
                     {"pieces", f.pieces}});
  j["faces"] = faces;
  j["oracle"] = {{"resolution", r.oracle.resolution},
                 {"faceCount", r.oracle.faceCount},
                 {"fragments", r.oracle.fragments},
                 {"minPixels", r.oracle.minPixels},
                 {"windows", r.oracle.windows},
                 {"agrees", r.oracle.agrees}};
  j["connectivity"] =
      "face count of the unperturbed configuration; its identification with the connectivity of the smoothed "
      "quadrature domain is assumed, not computed";
  return j;
}

std::string constructionSvg(const ConstructionPlan& p, const std::string& manifest) {
  std::vector<std::vector<cplx>> polys;
  for (const auto& q : p.pieces) polys.push_back(sampleClosed(q.curve, 2048));
  double x0, y0, x1, y1;
  boundingBox(polys, 0.05, x0, y0, x1, y1);
  SvgWriter w(x0, y0, x1, y1, 700, manifest);
  static const char* colors[] = {"#1f4e79", "#b03a2e", "#2e7d32", "#7d3c98", "#b9770e", "#117a65", "#884ea0"};
  int maxStage = 0;
  for (const auto& q : p.pieces) maxStage = std::max(maxStage, q.stage);
  for (int s = 0; s <= maxStage; ++s) {
    w.beginGroup("stage-" + std::to_string(s));
    for (size_t k = 0; k < p.pieces.size(); ++k) {
      const auto& q = p.pieces[k];
      if (q.stage != s) continue;
      const char* col = colors[s % 7];
      w.polyline(polys[k], true, col, 1.2, q.domainOnLeft ? "#dfe6ee" : "none");
    }
    w.endGroup();
  }
  w.beginGroup("contacts");
  for (const auto& c : p.contacts) w.marker(c.point, 2.5, "#000000");
  w.endGroup();
  return w.str();
}

}  // namespace qdx
