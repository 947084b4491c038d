#include "qdx/suffridge.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "qdx/errors.hpp"

namespace qdx {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

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

double dot(cplx a, cplx b) { return (std::conj(a) * b).real(); }

double laurentScale(const LaurentPoly& r) {
  double s = 0.0;
  for (const auto& c : r.coeffs()) s += std::abs(c);
  return s;
}

// z^{d+1} r' for Sigma, r' for S, as an ordinary polynomial.
ComplexPoly directionDerivativePoly(Family fam, int d, const LaurentPoly& r) {
  LaurentPoly rp = r.derivative();
  std::vector<cplx> v;
  if (fam == Family::S) {
    for (int k = 0; k <= d - 1; ++k) v.push_back(rp.coeff(k));
  } else {
    for (int k = 0; k <= d + 1; ++k) v.push_back(rp.coeff(k - d - 1));
  }
  return ComplexPoly(std::move(v));
}

int symmetryOrder(Family fam, int d) { return fam == Family::S ? d - 1 : d + 1; }

// Tangent-normal exponent: unit tangent is +-i zeta^e on the boundary.
double tangentExponent(Family fam, int d) { return fam == Family::S ? 0.5 * (d + 1) : 0.5 * (1 - d); }

struct Contact {
  double t1, t2;
  double separation = 0;
  bool converged = false;
};

bool sameContact(double a1, double a2, double b1, double b2) {
  const double tol = 1e-4;
  return (circDist(a1, b1) < tol && circDist(a2, b2) < tol) || (circDist(a1, b2) < tol && circDist(a2, b1) < tol);
}

// Re-solves each tracked contact on g starting from its last parameters.
std::vector<double> separations(const BoundaryMap& g, std::vector<Contact>& cs, bool update) {
  std::vector<double> out;
  out.reserve(cs.size());
  for (auto& c : cs) {
    ContactSolve s = solveContact(g, c.t1, c.t2);
    out.push_back(s.converged ? s.separation : std::numeric_limits<double>::quiet_NaN());
    if (update && s.converged) {
      c.t1 = s.t1;
      c.t2 = s.t2;
      c.separation = s.separation;
      c.converged = true;
    }
  }
  return out;
}

double maxAbs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::isfinite(x) ? std::max(m, std::abs(x)) : std::numeric_limits<double>::infinity();
  return m;
}

struct Validity {
  bool ok = false;
  double w1 = 0, w2 = 0;
  std::string reason;
};

Validity checkValid(const BoundaryMap& g, int cap, const DeltaOptions& opt) {
  Validity v;
  std::vector<CuspPoint> cusps;
  try {
    cusps = findCusps(g);
  } catch (const NumericalError& e) {
    v.reason = std::string("cusp solve failed: ") + e.what();
    return v;
  }
  if (static_cast<int>(cusps.size()) != cap) {
    std::ostringstream os;
    os << "cusp count " << cusps.size() << " differs from " << cap;
    v.reason = os.str();
    return v;
  }
  for (int M = opt.samples; M <= opt.sampleCap; M *= 2) {
    UnivalenceResult u = isUnivalent(g, M);
    if (u.verdict == Verdict::True) {
      v.ok = true;
      return v;
    }
    if (u.verdict == Verdict::False) {
      v.w1 = u.witnessT1;
      v.w2 = u.witnessT2;
      v.reason = u.reason;
      return v;
    }
  }
  throw NumericalError("univalence test inconclusive up to " + std::to_string(opt.sampleCap) + " samples");
}

double curvatureDeviation(const BoundaryMap& f) {
  auto cusps = findCusps(f);
  const double target = starredCurvature(f.family(), f.degree());
  double worst = 0.0;
  for (int i = 0; i < 256; ++i) {
    double t = kTwoPi * (i + 0.5) / 256;
    bool near = false;
    for (const auto& c : cusps)
      if (circDist(c.t, t) < 1e-3) near = true;
    if (near) continue;
    worst = std::max(worst, std::abs(conformalCurvature(f, t) - target));
  }
  return worst;
}

std::vector<cplx> coefficientVector(const BoundaryMap& f) {
  std::vector<cplx> v;
  const int d = f.degree();
  if (f.family() == Family::S) {
    for (int k = 0; k <= d; ++k) v.push_back(f.laurent().coeff(k));
  } else {
    for (int k = -d; k <= 1; ++k) v.push_back(f.laurent().coeff(k));
  }
  return v;
}

}  // namespace

BoundaryMap knownSuffridge(Family fam, int d) {
  const double s2 = std::sqrt(2.0);
  if (fam == Family::S) {
    switch (d) {
      case 2:
        return BoundaryMap::fromTaylor({0.0, 1.0, 0.5});
      case 3:
        return BoundaryMap::fromTaylor({0.0, 1.0, 2 * s2 / 3, 1.0 / 3});
      case 4: {
        double A = 0.5 * std::sqrt(3 * (std::sqrt(15.0) - 3));
        double t = std::acos(3.0 / 16 * std::sqrt(9 + 5 * std::sqrt(15.0))) / 3;
        return BoundaryMap::fromTaylor({0.0, 1.0, 1.5 * A * std::polar(1.0, t), A * std::polar(1.0, -t), 0.25});
      }
      case 5: {
        double q = std::sqrt(2.0 / 3);
        return BoundaryMap::fromTaylor({0.0, 1.0, 1.6 * q, 1.2, 0.8 * q, 0.2});
      }
      default:
        break;
    }
  } else {
    switch (d) {
      case 2:
        return BoundaryMap::fromLaurentTail({0.0, -0.5});
      case 3:
        return BoundaryMap::fromLaurentTail({2.0 / 3, 0.0, -1.0 / 3});
      case 4:
        return BoundaryMap::fromLaurentTail({-5.0 / 8, -5.0 / 16, 0.0, -0.25});
      case 5:
        return BoundaryMap::fromLaurentTail({0.0, 2 * s2 / 5, 0.0, 0.0, -0.2});
      default:
        break;
    }
  }
  std::ostringstream os;
  os << "not in catalog: " << toString(fam) << "-class degree " << d << " (catalog covers d = 2..5)";
  throw InputError(os.str());
}

std::vector<LaurentPoly> selfDualBasis(Family fam, int d) {
  if (d < 3) throw InputError("self-dual perturbation basis needs d >= 3");
  std::vector<LaurentPoly> out;
  const cplx I(0.0, 1.0);
  if (fam == Family::S) {
    // r' = sum b_k z^k, k = 1..d-2, b_k = conj(b_{d-1-k}).
    for (int k = 1; 2 * k <= d - 1; ++k) {
      int k2 = d - 1 - k;
      std::vector<cplx> re(d + 1, 0.0), im(d + 1, 0.0);
      re[k + 1] += 1.0 / (k + 1);
      re[k2 + 1] += 1.0 / (k2 + 1);
      out.emplace_back(0, re);
      if (k != k2) {
        im[k + 1] += I / double(k + 1);
        im[k2 + 1] -= I / double(k2 + 1);
        out.emplace_back(0, im);
      }
    }
  } else {
    // z^{d+1} r' = sum c_m z^m, m = 2..d-1, c_m = conj(c_{d+1-m}); a_j = -c_{d-j}/j.
    for (int m = 2; 2 * m <= d + 1; ++m) {
      int m2 = d + 1 - m;
      int j = d - m, j2 = d - m2;
      // powers -(d-2)..-1 stored from index 0
      const int lo = -(d - 2);
      std::vector<cplx> re(d - 2, 0.0), im(d - 2, 0.0);
      re[-j - lo] += -1.0 / j;
      re[-j2 - lo] += -1.0 / j2;
      out.emplace_back(lo, re);
      if (m != m2) {
        im[-j - lo] += -I / double(j);
        im[-j2 - lo] += I / double(j2);
        out.emplace_back(lo, im);
      }
    }
  }
  return out;
}

bool satisfiesSelfDuality(const BoundaryMap& f, double tol) {
  const int k = f.family() == Family::S ? f.degree() - 1 : f.degree() + 1;
  return isSelfDual(f.criticalPoly(), k, tol);
}

bool directionSatisfiesSelfDuality(Family fam, int d, const LaurentPoly& r, double tol) {
  const int k = fam == Family::S ? d - 1 : d + 1;
  if (fam == Family::S && r.lowPower() < 0) {
    for (int p = r.lowPower(); p < 0; ++p)
      if (r.coeff(p) != cplx(0.0)) return false;
  }
  return isSelfDual(directionDerivativePoly(fam, d, r), k, tol);
}

BoundaryMap perturbed(const BoundaryMap& f, const LaurentPoly& r, double delta) {
  return BoundaryMap(f.family(), f.laurent() + r * delta);
}

double r2Residual(Family fam, int d, const LaurentPoly& r, const DoublePoint& p) {
  cplx zp = std::polar(1.0, p.tPlus), zm = std::polar(1.0, p.tMinus);
  cplx w = std::polar(1.0, tangentExponent(fam, d) * p.tPlus);
  return ((r(zp) - r(zm)) / w).real();
}

PerturbationStep perturbationDirection(const BoundaryMap& f, const std::vector<DoublePoint>& doublePoints) {
  const Family fam = f.family();
  const int d = f.degree();
  const int N = static_cast<int>(doublePoints.size());
  if (d < 3 || N >= d - 2) {
    std::ostringstream os;
    os << "already extreme: " << N << " double points with cap " << std::max(0, d - 2);
    throw AlreadyExtreme(os.str());
  }
  auto basis = selfDualBasis(fam, d);
  const int m = static_cast<int>(basis.size());
  // Normal component of r_l(zeta+) - r_l(zeta-) against the actual tangent.
  Eigen::MatrixXd A(N, m);
  for (int j = 0; j < N; ++j) {
    const auto& p = doublePoints[j];
    cplx T = f.velocity(p.tPlus);
    if (std::abs(T) == 0.0) throw InputError("double point sits on a cusp");
    cplx n = cplx(0.0, 1.0) * T / std::abs(T);
    cplx zp = std::polar(1.0, p.tPlus), zm = std::polar(1.0, p.tMinus);
    for (int l = 0; l < m; ++l) A(j, l) = dot(n, basis[l](zp) - basis[l](zm));
  }
  Eigen::MatrixXd V;  // orthonormal null space basis
  int rank = 0;
  if (N == 0) {
    V = Eigen::MatrixXd::Identity(m, m);
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double cut = 1e-10 * std::max(1.0, sv.size() ? sv(0) : 0.0);
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > cut) ++rank;
    V = svd.matrixV().rightCols(m - rank);
  }
  Eigen::MatrixXd P = V * V.transpose();
  PerturbationStep st;
  st.nullity = m - rank;
  for (int k = 0; k < V.cols(); ++k) st.nullSpace.emplace_back(V.col(k).data(), V.col(k).data() + m);
  Eigen::VectorXd c;
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd v = P.col(i);
    if (v.norm() > 1e-8) {
      c = v / v.norm();
      break;
    }
  }
  if (c.size() == 0) throw NumericalError("perturbation direction: empty null space");
  for (int i = 0; i < m; ++i) {
    if (std::abs(c(i)) > 1e-12) {
      if (c(i) < 0) c = -c;
      break;
    }
  }
  LaurentPoly r;
  for (int l = 0; l < m; ++l) {
    st.coefficients.push_back(c(l));
    r = r + basis[l] * c(l);
  }
  st.direction = r;
  for (const auto& p : doublePoints) st.r2Residuals.push_back(r2Residual(fam, d, r, p));
  return st;
}

DeltaInterval maxUnivalentDelta(const BoundaryMap& f, const LaurentPoly& r, const DeltaOptions& opt) {
  const int cap = cuspCap(f.family(), f.degree());
  const double rs = laurentScale(r);
  if (rs == 0.0) throw InputError("maxUnivalentDelta: zero direction");
  DeltaInterval out;
  for (int sgn : {-1, 1}) {
    double good = 0.0, h = 1e-3 * f.scale() / rs;
    Validity bad;
    int expansions = 0;
    while (true) {
      Validity v = checkValid(perturbed(f, r, sgn * h), cap, opt);
      ++out.probes;
      if (!v.ok) {
        bad = v;
        break;
      }
      good = h;
      h *= opt.growth;
      if (++expansions > 200) throw NumericalError("maxUnivalentDelta: no univalence boundary found");
    }
    double lo = good, hi = h;
    while (hi - lo > opt.relResolution * hi) {
      double mid = 0.5 * (lo + hi);
      Validity v = checkValid(perturbed(f, r, sgn * mid), cap, opt);
      ++out.probes;
      if (v.ok) {
        lo = mid;
      } else {
        hi = mid;
        bad = v;
      }
    }
    if (sgn < 0) {
      out.deltaMin = -lo;
      out.witnessMin[0] = bad.w1;
      out.witnessMin[1] = bad.w2;
      out.reasonMin = bad.reason;
    } else {
      out.deltaMax = lo;
      out.witnessMax[0] = bad.w1;
      out.witnessMax[1] = bad.w2;
      out.reasonMax = bad.reason;
    }
  }
  return out;
}

BoundaryMap symmetricStart(Family fam, int d) {
  if (d < 1) throw InputError("degree must be >= 1");
  if (fam == Family::S) {
    std::vector<cplx> a(d + 1, 0.0);
    a[1] = 1.0;
    if (d >= 2) a[d] = 1.0 / d;
    return BoundaryMap::fromTaylor(a);
  }
  std::vector<cplx> tail(d, 0.0);
  tail[d - 1] = -1.0 / d;
  return BoundaryMap::fromLaurentTail(tail);
}

double distanceUpToSymmetry(const BoundaryMap& f, const BoundaryMap& g) {
  if (f.family() != g.family() || f.degree() != g.degree()) return std::numeric_limits<double>::infinity();
  const int n = symmetryOrder(f.family(), f.degree());
  auto b = coefficientVector(g);
  double best = std::numeric_limits<double>::infinity();
  for (int conj = 0; conj < 2; ++conj) {
    for (int k = 0; k < n; ++k) {
      BoundaryMap h = f.rotated(kTwoPi * k / n);
      auto a = coefficientVector(h);
      double s = 0.0;
      for (size_t i = 0; i < a.size(); ++i) s += std::norm((conj ? std::conj(a[i]) : a[i]) - b[i]);
      best = std::min(best, std::sqrt(s));
    }
  }
  return best;
}

namespace {

struct WalkState {
  BoundaryMap g;
  std::vector<Contact> contacts;
  double s;  // accumulated step length
};

// Minimum-norm Gauss-Newton in the basis driving every contact separation to zero.
bool closeContacts(BoundaryMap& g, std::vector<Contact>& contacts, const std::vector<LaurentPoly>& basis,
                   double tol, int maxIter, int* iterations = nullptr, double* residual = nullptr) {
  const int m = static_cast<int>(basis.size());
  const int K = static_cast<int>(contacts.size());
  const double scale = g.scale();
  std::vector<double> F = separations(g, contacts, true);
  int it = 0;
  for (; K > 0 && it < maxIter && maxAbs(F) > tol; ++it) {
    Eigen::MatrixXd J(K, m);
    for (int l = 0; l < m; ++l) {
      double h = 1e-7 * scale / laurentScale(basis[l]);
      auto cp = contacts, cm = contacts;
      auto Fp = separations(perturbed(g, basis[l], h), cp, false);
      auto Fm = separations(perturbed(g, basis[l], -h), cm, false);
      for (int k = 0; k < K; ++k) J(k, l) = (Fp[k] - Fm[k]) / (2 * h);
    }
    if (!J.allFinite()) break;
    Eigen::VectorXd rhs(K);
    for (int k = 0; k < K; ++k) rhs(k) = -F[k];
    Eigen::VectorXd dc = J.completeOrthogonalDecomposition().solve(rhs);
    double lam = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 12; ++ls, lam *= 0.5) {
      LaurentPoly dr;
      for (int l = 0; l < m; ++l) dr = dr + basis[l] * (lam * dc(l));
      BoundaryMap trial(g.family(), g.laurent() + dr);
      auto cs = contacts;
      auto Ft = separations(trial, cs, true);
      if (maxAbs(Ft) < maxAbs(F)) {
        g = trial;
        contacts = cs;
        F = Ft;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (iterations) *iterations = it;
  if (residual) *residual = maxAbs(F);
  return maxAbs(F) <= tol;
}

std::vector<DoublePoint> asDoublePoints(const BoundaryMap& g, const std::vector<Contact>& cs) {
  std::vector<DoublePoint> out;
  for (const auto& c : cs) {
    DoublePoint p;
    p.tMinus = std::min(c.t1, c.t2);
    p.tPlus = std::max(c.t1, c.t2);
    p.point = g.at(p.tMinus);
    p.tangentGap = 0;
    p.tangential = true;
    out.push_back(p);
  }
  return out;
}

struct WalkResult {
  bool ok = false;
  double deltaStar = 0;
  double w1 = 0, w2 = 0;
  std::string reason;
  std::vector<WalkState> states;        // accepted states, s increasing
  std::vector<LaurentPoly> directions;  // direction used from each state
  int probes = 0;
};

std::vector<double> projectOnto(const std::vector<std::vector<double>>& Q, const std::vector<double>& v) {
  std::vector<double> out(v.size(), 0.0);
  for (const auto& q : Q) {
    double a = 0.0;
    for (size_t i = 0; i < v.size(); ++i) a += q[i] * v[i];
    for (size_t i = 0; i < v.size(); ++i) out[i] += a * q[i];
  }
  return out;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Follows the set of maps on which the given contacts stay closed, starting in
// the basis direction c0 and continuing along the projection of the previous
// direction onto the current admissible subspace, until univalence or the cusp
// count fails.
WalkResult walkToBoundary(const BoundaryMap& f, const std::vector<Contact>& contacts0, std::vector<double> c0,
                          const std::vector<LaurentPoly>& basis, const ExtremalizeOptions& opt) {
  const int cap = cuspCap(f.family(), f.degree());
  const double tol = opt.closureTol * f.scale();
  WalkResult w;
  w.states.push_back({f, contacts0, 0.0});
  std::vector<double> prev = std::move(c0);
  double h = 1e-2;
  const double hMax = 0.1, hMin = 1e-12;

  auto directionAt = [&](const WalkState& st) -> std::optional<std::vector<double>> {
    PerturbationStep ps = perturbationDirection(st.g, asDoublePoints(st.g, st.contacts));
    std::vector<double> c = projectOnto(ps.nullSpace, prev);
    double n = norm2(c);
    if (n < 1e-6) return std::nullopt;
    for (auto& x : c) x /= n;
    return c;
  };
  auto combine = [&](const std::vector<double>& c) {
    LaurentPoly r;
    for (size_t l = 0; l < c.size(); ++l) r = r + basis[l] * c[l];
    return r;
  };
  // Corrected state at step length hh from st along r; nullopt when the corrector fails.
  auto advance = [&](const WalkState& st, const LaurentPoly& r, double hh) -> std::optional<WalkState> {
    WalkState nx{perturbed(st.g, r, hh), st.contacts, st.s + hh};
    if (!closeContacts(nx.g, nx.contacts, basis, tol, opt.closureIterations)) return std::nullopt;
    return nx;
  };

  for (int step = 0; step < 100000; ++step) {
    const WalkState cur = w.states.back();
    auto c = directionAt(cur);
    if (!c) {
      w.reason = "admissible subspace turned away from the walk direction";
      return w;
    }
    LaurentPoly r = combine(*c);
    std::optional<WalkState> nx = advance(cur, r, h);
    Validity v;
    if (nx) {
      v = checkValid(nx->g, cap, opt.delta);
      ++w.probes;
    }
    if (nx && v.ok) {
      w.states.push_back(*nx);
      w.directions.push_back(r);
      prev = *c;
      h = std::min(h * opt.delta.growth, hMax);
      continue;
    }
    if (!nx) {
      h *= 0.5;
      if (h < hMin) {
        w.reason = "corrector failed below the minimum step";
        return w;
      }
      continue;
    }
    // The boundary lies within (0, h] of the current state: bisect.
    double lo = 0.0, hi = h;
    Validity bad = v;
    while (hi - lo > opt.delta.relResolution * std::max(cur.s + hi, 1e-3)) {
      double mid = 0.5 * (lo + hi);
      auto t = advance(cur, r, mid);
      if (!t) break;
      Validity vm = checkValid(t->g, cap, opt.delta);
      ++w.probes;
      if (vm.ok) {
        lo = mid;
      } else {
        hi = mid;
        bad = vm;
      }
    }
    w.directions.push_back(r);
    w.deltaStar = cur.s + lo;
    w.w1 = bad.w1;
    w.w2 = bad.w2;
    w.reason = bad.reason;
    w.ok = true;
    return w;
  }
  w.reason = "step cap reached";
  return w;
}

struct RoundOutcome {
  bool ok = false;
  BoundaryMap g;
  std::vector<DoublePoint> next;
};

std::vector<DoublePoint> tangentialOnly(std::vector<DoublePoint> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](const DoublePoint& p) { return !p.tangential; }), v.end());
  return v;
}

// Backs off from the boundary found by a walk, closes the forming contacts
// together with the existing ones and re-solves the double points.
RoundOutcome finishRound(const BoundaryMap& f, const std::vector<DoublePoint>& dps, const WalkResult& w,
                         const std::vector<LaurentPoly>& basis, const ExtremalizeOptions& opt, nlohmann::json& rec) {
  const Family fam = f.family();
  const int d = f.degree();
  const double scale = f.scale();
  const double tol = opt.closureTol * scale;
  const double band = 2.0 * kTwoPi / 2048;
  RoundOutcome out{false, f, {}};

  const double sb = opt.stepFraction * w.deltaStar;
  size_t k = 0;
  while (k + 1 < w.states.size() && w.states[k + 1].s <= sb) ++k;
  WalkState st = w.states[k];
  if (sb > st.s) {
    st.g = perturbed(st.g, w.directions[k], sb - st.s);
    st.s = sb;
    if (!closeContacts(st.g, st.contacts, basis, tol, opt.closureIterations)) {
      rec["failure"] = "corrector failed at the backed-off step";
      return out;
    }
  }
  BoundaryMap g = st.g;
  std::vector<Contact> contacts = st.contacts;

  // The forming contact, plus any forming simultaneously (mirror images).
  const size_t existing = contacts.size();
  ContactSolve nw = solveContact(g, w.w1, w.w2);
  bool isNew = nw.converged && circDist(nw.t1, nw.t2) > band;
  for (const auto& c : contacts)
    if (isNew && sameContact(c.t1, c.t2, nw.t1, nw.t2)) isNew = false;
  if (!isNew) {
    rec["failure"] = "no new tangency forms at the univalence boundary (" + w.reason + ")";
    return out;
  }
  contacts.push_back({nw.t1, nw.t2, nw.separation, true});
  const double near = 1.01 * std::abs(nw.separation) + 1e-12 * scale;
  for (const auto& [ta, tb] : proximityCandidates(g, 1024)) {
    ContactSolve s = solveContact(g, ta, tb);
    if (!s.converged || circDist(s.t1, s.t2) <= band || std::abs(s.separation) > near) continue;
    bool dup = false;
    for (const auto& c : contacts)
      if (sameContact(c.t1, c.t2, s.t1, s.t2)) dup = true;
    if (!dup) contacts.push_back({s.t1, s.t2, s.separation, true});
  }
  rec["newContacts"] = contacts.size() - existing;
  if (contacts.size() > basis.size()) {
    rec["failure"] = "more forming contacts than free directions";
    return out;
  }

  int iters = 0;
  double resid = 0;
  bool closed = closeContacts(g, contacts, basis, tol, opt.closureIterations, &iters, &resid);
  rec["closureIterations"] = iters;
  rec["closureResidual"] = resid;
  if (!closed) {
    rec["failure"] = "contact closure stalled";
    return out;
  }
  Validity v = checkValid(g, cuspCap(fam, d), opt.delta);
  if (!v.ok) {
    rec["failure"] = "closed map lost univalence (" + v.reason + ")";
    return out;
  }

  // Rotation gauge: the starred class only allows rotations by multiples of 2 pi / order.
  auto cusps = findCusps(g);
  const double period = kTwoPi / symmetryOrder(fam, d);
  double phi = cusps.empty() ? 0.0 : period * std::round(cusps.front().t / period);
  if (phi != 0.0) g = g.rotated(phi);
  rec["gauge"] = phi;

  auto next = tangentialOnly(findDoublePoints(g));
  rec["census"] = {{"cusps", findCusps(g).size()}, {"doublePoints", next.size()}};
  if (next.size() <= dps.size()) {
    rec["failure"] = "double point count did not increase";
    return out;
  }
  out.ok = true;
  out.g = g;
  out.next = std::move(next);
  return out;
}

struct Search {
  const ExtremalizeOptions& opt;
  std::vector<LaurentPoly> basis;
  int target;
  int rounds = 0;
  std::vector<nlohmann::json> trace;
  BoundaryMap best;
  size_t bestCount = 0;

  // Depth-first over admissible directions and sides; true once the target is met.
  bool run(const BoundaryMap& f, const std::vector<DoublePoint>& dps) {
    if (dps.size() > bestCount || rounds == 0) {
      best = f;
      bestCount = dps.size();
    }
    if (static_cast<int>(dps.size()) >= target) return true;
    PerturbationStep step = perturbationDirection(f, dps);
    double r2 = 0.0;
    for (double x : step.r2Residuals) r2 = std::max(r2, std::abs(x));
    // Candidate directions: the basis vectors projected onto the admissible subspace.
    std::vector<std::vector<double>> cands;
    const size_t m = basis.size();
    for (size_t i = 0; i < m; ++i) {
      std::vector<double> e(m, 0.0);
      e[i] = 1.0;
      auto c = projectOnto(step.nullSpace, e);
      double n = norm2(c);
      if (n < 1e-8) continue;
      for (auto& x : c) x /= n;
      bool dup = false;
      for (const auto& q : cands) {
        double a = 0.0;
        for (size_t j = 0; j < m; ++j) a += q[j] * c[j];
        if (std::abs(a) > 1 - 1e-9) dup = true;
      }
      if (!dup) cands.push_back(c);
    }
    std::vector<Contact> contacts;
    for (const auto& p : dps) contacts.push_back({p.tMinus, p.tPlus});
    for (size_t ci = 0; ci < cands.size(); ++ci) {
      auto neg = cands[ci];
      for (auto& x : neg) x = -x;
      WalkResult lo = walkToBoundary(f, contacts, neg, basis, opt);
      WalkResult hi = walkToBoundary(f, contacts, cands[ci], basis, opt);
      std::vector<std::pair<const WalkResult*, int>> sides;
      bool loFirst = lo.ok && (!hi.ok || lo.deltaStar <= hi.deltaStar);
      if (loFirst) {
        sides = {{&lo, -1}, {&hi, 1}};
      } else {
        sides = {{&hi, 1}, {&lo, -1}};
      }
      for (const auto& [w, sgn] : sides) {
        if (!w->ok) continue;
        if (rounds >= opt.maxRounds) return false;
        ++rounds;
        nlohmann::json rec;
        rec["round"] = rounds;
        rec["N"] = dps.size();
        rec["candidate"] = ci;
        rec["r2Residual"] = r2;
        rec["delta"] = {lo.ok ? -lo.deltaStar : -1.0 / 0.0, hi.ok ? hi.deltaStar : 1.0 / 0.0};
        rec["deltaStar"] = sgn * w->deltaStar;
        rec["boundaryReason"] = w->reason;
        rec["probes"] = lo.probes + hi.probes;
        RoundOutcome o = finishRound(f, dps, *w, basis, opt, rec);
        rec["accepted"] = o.ok;
        trace.push_back(rec);
        if (o.ok && run(o.g, o.next)) return true;
      }
    }
    return false;
  }
};

}  // namespace

ExtremalizeResult extremalize(const BoundaryMap& f0, const ExtremalizeOptions& opt) {
  const Family fam = f0.family();
  const int d = f0.degree();
  const int cap = cuspCap(fam, d);
  const int target = doublePointCap(fam, d);
  if (!satisfiesSelfDuality(f0, 1e-10)) throw InputError("extremalize: starting map is not in the starred class");
  if (isUnivalent(f0).verdict != Verdict::True) throw InputError("extremalize: starting map is not univalent");

  Search search{opt, d >= 3 ? selfDualBasis(fam, d) : std::vector<LaurentPoly>{}, target, 0, {}, f0, 0};
  bool done = search.run(f0, tangentialOnly(findDoublePoints(f0)));

  ExtremalizeResult res{search.best, false, search.rounds, 0, 0, 0, 0, -1, {}, std::move(search.trace)};
  const BoundaryMap& f = res.f;
  res.cusps = static_cast<int>(findCusps(f).size());
  res.doublePoints = static_cast<int>(tangentialOnly(findDoublePoints(f)).size());
  res.extreme = res.cusps == cap && res.doublePoints == target;
  if (!res.extreme) {
    std::ostringstream os;
    if (!done && search.rounds >= opt.maxRounds) {
      os << "round cap " << opt.maxRounds << " reached";
    } else {
      os << "every admissible direction ended without a new tangency";
    }
    os << "; best iterate has " << res.doublePoints << " of " << target << " double points and " << res.cusps
       << " of " << cap << " cusps";
    res.shortfall = os.str();
  }
  res.curvatureDeviation = curvatureDeviation(f);
  res.doubleAngleResidual = verifyDoubleAngleRelation(analyzeCurve(f));
  if (d >= 2 && d <= 5) res.catalogDistance = distanceUpToSymmetry(f, knownSuffridge(fam, d));
  return res;
}


nlohmann::json toJson(const PerturbationStep& s) {
  nlohmann::json j;
  j["coefficients"] = s.coefficients;
  nlohmann::json dir = nlohmann::json::array();
  for (int k = s.direction.lowPower(); k <= s.direction.highPower(); ++k)
    if (s.direction.coeff(k) != cplx(0.0)) dir.push_back({{"power", k}, {"coeff", toJson(s.direction.coeff(k))}});
  j["direction"] = dir;
  j["delta"] = {s.deltaMin, s.deltaMax};
  j["r2Residuals"] = s.r2Residuals;
  j["nullity"] = s.nullity;
  return j;
}

nlohmann::json toJson(const ExtremalizeResult& r) {
  nlohmann::json j;
  j["schema"] = 1;
  j["map"] = toJson(r.f);
  j["extreme"] = r.extreme;
  j["rounds"] = r.rounds;
  j["cusps"] = r.cusps;
  j["doublePoints"] = r.doublePoints;
  j["curvatureDeviation"] = r.curvatureDeviation;
  j["doubleAngleResidual"] = r.doubleAngleResidual;
  if (r.catalogDistance >= 0) j["catalogDistance"] = r.catalogDistance;
  if (!r.shortfall.empty()) j["shortfall"] = r.shortfall;
  j["trace"] = r.trace;
  return j;
}

}  // namespace qdx
