#include "qdx/lens.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "qdx/errors.hpp"

namespace qdx {

std::string toString(FixedClass c) {
  switch (c) {
    case FixedClass::Attracting: return "attracting";
    case FixedClass::Repelling: return "repelling";
    case FixedClass::Superattracting: return "superattracting";
    case FixedClass::Nonhyperbolic: return "nonhyperbolic";
  }
  return "?";
}

namespace {

ComplexPoly power(const ComplexPoly& p, int k) {
  ComplexPoly acc{1.0};
  for (int i = 0; i < k; ++i) acc = acc * p;
  return acc;
}

FixedClass classify(double m, const LensSolveOptions& opt) {
  if (std::abs(m - 1.0) < opt.hyperMargin) return FixedClass::Nonhyperbolic;
  if (m <= opt.superTol) return FixedClass::Superattracting;
  return m < 1.0 ? FixedClass::Attracting : FixedClass::Repelling;
}

double residualScale(cplx z) { return std::max(1.0, std::norm(z)); }

// Newton on the real 2x2 system Re/Im of r(z) - conj z.
// With a = r'(z) the correction solves a*dz - conj(dz) = -G.
cplx polish(const RationalMap& r, cplx z, double& res) {
  res = std::abs(r(z) - std::conj(z));
  for (int it = 0; it < 30; ++it) {
    cplx g = r(z) - std::conj(z);
    cplx a = r.derivative(z);
    double den = std::norm(a) - 1.0;
    if (den == 0.0 || !std::isfinite(den)) break;
    cplx dz = -(std::conj(g) + std::conj(a) * g) / den;
    cplx cand = z + dz;
    double cres = std::abs(r(cand) - std::conj(cand));
    if (!(cres < res)) break;
    z = cand;
    res = cres;
    if (res <= 1e-15 * residualScale(z)) break;
  }
  return z;
}

}  // namespace

ComplexPoly buildFixedPointPoly(const RationalMap& r) {
  const ComplexPoly& P = r.numerator();
  const ComplexPoly& Q = r.denominator();
  const int d = r.degree();
  // r*(P/Q) = sum conj(p_k) P^k Q^{d-k} / sum conj(q_k) P^k Q^{d-k}
  std::vector<ComplexPoly> pp(d + 1), qq(d + 1);
  for (int k = 0; k <= d; ++k) {
    pp[k] = power(P, k);
    qq[k] = power(Q, k);
  }
  ComplexPoly A, B;
  for (int k = 0; k <= d; ++k) {
    ComplexPoly term = pp[k] * qq[d - k];
    A = A + term * std::conj(P.coeff(k));
    B = B + term * std::conj(Q.coeff(k));
  }
  ComplexPoly out = (A - ComplexPoly{0.0, 1.0} * B).trimmed(1e-14);
  // Identity of r* o r shows up as total cancellation.
  double scale = std::max(A.maxAbsCoeff(), B.maxAbsCoeff());
  if (out.isZero() || out.maxAbsCoeff() <= 1e-12 * scale)
    throw InputError("fixed-point equation holds on a continuum: r* o r is the identity");
  return out;
}

FixedPointReport solveLens(const RationalMap& r, const LensSolveOptions& opt) {
  ComplexPoly fp = buildFixedPointPoly(r);
  FixedPointReport rep;
  rep.d = r.degree();
  rep.n = r.distinctPoles();

  std::vector<FixedPoint> finite;
  if (fp.degree() >= 1) {
    for (const auto& z0 : allRoots(fp)) {
      cplx w = r(z0);
      if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) continue;
      if (std::abs(w - std::conj(z0)) > opt.candidateTol * residualScale(z0)) continue;
      double res;
      cplx z = polish(r, z0, res);
      if (res > opt.residualTol * residualScale(z)) continue;
      bool dup = false;
      for (const auto& q : finite)
        if (std::abs(q.z - z) <= opt.clusterRel * std::max(1.0, std::abs(z))) dup = true;
      if (dup) continue;
      double m = std::abs(r.derivative(z));
      finite.push_back({false, z, m, classify(m, opt), res});
    }
  }
  std::sort(finite.begin(), finite.end(), [](const FixedPoint& a, const FixedPoint& b) {
    if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
    return a.z.imag() < b.z.imag();
  });
  rep.points = finite;
  rep.F = static_cast<int>(finite.size());
  for (const auto& p : finite)
    if (p.cls == FixedClass::Attracting || p.cls == FixedClass::Superattracting) ++rep.A;
  rep.Fhat = rep.F;
  rep.Ahat = rep.A;

  if (r.fixesInfinity()) {
    int diff = r.numerator().degree() - r.denominator().degree();
    double m = 0.0;
    if (diff == 1) m = std::abs(r.denominator().leading() / r.numerator().leading());
    FixedPoint inf{true, 0.0, m, classify(m, opt), 0.0};
    rep.points.push_back(inf);
    rep.Fhat += 1;
    if (inf.cls == FixedClass::Attracting || inf.cls == FixedClass::Superattracting) rep.Ahat += 1;
  }
  for (const auto& p : rep.points)
    if (p.cls == FixedClass::Nonhyperbolic) rep.hyperbolic = false;
  return rep;
}

int verifyLefschetz(const FixedPointReport& report) {
  if (!report.hyperbolic) {
    std::ostringstream os;
    os << "Lefschetz check refused: nonhyperbolic fixed point present";
    for (const auto& p : report.points)
      if (p.cls == FixedClass::Nonhyperbolic) {
        if (p.atInfinity)
          os << " at infinity";
        else
          os << " at (" << p.z.real() << ", " << p.z.imag() << ")";
        os << " with multiplier " << p.multiplier;
        break;
      }
    throw InputError(os.str());
  }
  return report.Fhat - (2 * report.Ahat + report.d - 1);
}

int sharpBound(int d, int n) { return std::min(3 * d + 2 * n - 3, 5 * d - 5); }

bool checkSharpBound(const FixedPointReport& report) {
  if (report.d < 2) throw InputError("sharp bound needs degree >= 2");
  return report.Fhat <= sharpBound(report.d, report.n);
}

// ---------------------------------------------------------------------------

RationalMap lensFromMasses(const LensConfig& cfg) {
  const size_t N = cfg.positions.size();
  if (cfg.masses.size() != N) throw InputError("lens config: masses and positions differ in length");
  if (cfg.gamma < 0.0) throw InputError("lens config: shear must be nonnegative");
  for (double e : cfg.masses)
    if (!(e > 0.0)) throw InputError("lens config: masses must be positive");
  for (size_t i = 0; i < N; ++i)
    for (size_t j = i + 1; j < N; ++j)
      if (std::abs(cfg.positions[i] - cfg.positions[j]) < 1e-12)
        throw InputError("lens config: coincident mass positions");
  ComplexPoly den{1.0};
  for (const auto& zj : cfg.positions) den = den * ComplexPoly{-zj, 1.0};
  ComplexPoly num = den * ComplexPoly{cfg.source, -cfg.gamma};
  for (size_t j = 0; j < N; ++j) {
    ComplexPoly t{cfg.masses[j]};
    for (size_t k = 0; k < N; ++k)
      if (k != j) t = t * ComplexPoly{-cfg.positions[k], 1.0};
    num = num + t;
  }
  return RationalMap(num, den);
}

double ellipseFeasibilityGamma() { return (2.0 - std::sqrt(2.0)) / (2.0 + std::sqrt(2.0)); }

ConstructionSeed twoDiskEllipseSeed(int N, double gamma) {
  if (N < 1) throw InputError("lens seed: need at least one mass");
  ConstructionSeed s;
  s.gamma = gamma;
  // Unit disks centred on the major (vertical) axis touch each other at 0
  // and the ellipse at +-2i; they fit once gamma exceeds the threshold.
  if (N == 1) {
    s.radii = {1.0};
    s.centers = {0.0};
    return s;
  }
  s.radii = {1.0, 1.0};
  s.centers = {cplx(0.0, 1.0), cplx(0.0, -1.0)};
  // Further masses go in mirrored pairs on the minor axis inside the two
  // side gaps; a disk centred at (x,0) clears the unit disks while
  // sqrt(x^2+1) - 1 >= radius.
  const double a = 2.0 / (1.0 + gamma);
  const double halfMinor = 2.0 * a - 2.0;
  const int pairs = (N - 1) / 2;
  for (int k = 0; k < pairs; ++k) {
    double x = halfMinor * (0.55 + 0.35 * (pairs - k) / pairs);
    double rho = 0.5 * std::min(std::sqrt(x * x + 1.0) - 1.0, halfMinor - x);
    for (int side : {1, -1}) {
      if (static_cast<int>(s.centers.size()) == N) break;
      s.radii.push_back(rho);
      s.centers.push_back({side * x, 0.0});
    }
  }
  return s;
}

namespace {

struct Objective {
  int N;
  long evals = 0;

  LensConfig decode(const std::vector<double>& x) const {
    LensConfig c;
    c.gamma = x[0] * x[0];
    c.source = {x[1], x[2]};
    for (int j = 0; j < N; ++j) {
      c.masses.push_back(std::exp(x[3 + j]));
      c.positions.push_back({x[3 + N + 2 * j], x[3 + N + 2 * j + 1]});
    }
    return c;
  }

  // Larger is better: image count plus a bounded hyperbolicity margin.
  double value(const std::vector<double>& x, int* imagesOut = nullptr) {
    ++evals;
    LensConfig c = decode(x);
    try {
      auto rep = solveLens(lensFromMasses(c));
      double margin = 1.0;
      for (const auto& p : rep.points)
        if (!p.atInfinity) margin = std::min(margin, std::abs(p.multiplier - 1.0));
      if (imagesOut) *imagesOut = rep.hyperbolic ? rep.F : 0;
      if (!rep.hyperbolic) return 0.0;
      return rep.F + 0.5 * std::tanh(margin);
    } catch (const std::exception&) {
      if (imagesOut) *imagesOut = 0;
      return -1.0;
    }
  }
};

}  // namespace

SearchResult searchMaxImages(int N, const ConstructionSeed& seed, long budget, std::uint64_t rngSeed) {
  if (N < 1) throw InputError("lens search: N must be >= 1");
  if (static_cast<int>(seed.centers.size()) != N || static_cast<int>(seed.radii.size()) != N)
    throw InputError("lens search: seed geometry must describe exactly N disks");
  Objective obj{N};
  const int dim = 3 + 3 * N;
  std::vector<double> x0(dim, 0.0);
  x0[0] = std::sqrt(seed.gamma);
  for (int j = 0; j < N; ++j) {
    x0[3 + j] = std::log(seed.radii[j] * seed.radii[j]);
    x0[3 + N + 2 * j] = seed.centers[j].real();
    x0[3 + N + 2 * j + 1] = seed.centers[j].imag();
  }

  SearchResult best;
  best.target = 5 * N - 1;
  std::mt19937_64 rng(rngSeed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> bestX = x0;
  double bestVal = obj.value(x0, &best.images);
  const int target = best.target;

  // Nelder-Mead with random restarts around the incumbent.
  double step = 0.1;
  while (obj.evals < budget && best.images < target) {
    std::vector<std::vector<double>> simplex(dim + 1, bestX);
    for (int i = 0; i < dim; ++i) simplex[i + 1][i] += step * (1.0 + 0.3 * gauss(rng));
    std::vector<double> fv(dim + 1);
    std::vector<int> imgs(dim + 1);
    for (int i = 0; i <= dim; ++i) fv[i] = obj.value(simplex[i], &imgs[i]);
    for (int iter = 0; iter < 400 && obj.evals < budget; ++iter) {
      std::vector<int> idx(dim + 1);
      for (int i = 0; i <= dim; ++i) idx[i] = i;
      std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] > fv[b]; });
      int hi = idx[0], lo = idx[dim], lo2 = idx[dim - 1];
      if (fv[hi] > bestVal) {
        bestVal = fv[hi];
        bestX = simplex[hi];
        best.images = imgs[hi];
        if (best.images >= target) break;
      }
      std::vector<double> cen(dim, 0.0);
      for (int i = 0; i <= dim; ++i)
        if (i != lo)
          for (int k = 0; k < dim; ++k) cen[k] += simplex[i][k] / dim;
      auto along = [&](double t) {
        std::vector<double> p(dim);
        for (int k = 0; k < dim; ++k) p[k] = cen[k] + t * (simplex[lo][k] - cen[k]);
        return p;
      };
      int im;
      auto xr = along(-1.0);
      double fr = obj.value(xr, &im);
      if (fr > fv[hi]) {
        int im2;
        auto xe = along(-2.0);
        double fe = obj.value(xe, &im2);
        if (fe > fr) {
          simplex[lo] = xe; fv[lo] = fe; imgs[lo] = im2;
        } else {
          simplex[lo] = xr; fv[lo] = fr; imgs[lo] = im;
        }
      } else if (fr > fv[lo2]) {
        simplex[lo] = xr; fv[lo] = fr; imgs[lo] = im;
      } else {
        auto xc = along(0.5);
        double fc = obj.value(xc, &im);
        if (fc > fv[lo]) {
          simplex[lo] = xc; fv[lo] = fc; imgs[lo] = im;
        } else {
          for (int i = 0; i <= dim; ++i) {
            if (i == hi) continue;
            for (int k = 0; k < dim; ++k) simplex[i][k] = simplex[hi][k] + 0.5 * (simplex[i][k] - simplex[hi][k]);
            fv[i] = obj.value(simplex[i], &imgs[i]);
          }
        }
      }
    }
    step *= 1.5;
  }
  best.config = obj.decode(bestX);
  best.evaluations = obj.evals;
  best.shortfall = best.images < target;
  return best;
}

// ---------------------------------------------------------------------------

namespace {

// 2 Re int_{a}^{b} r along the straight segment, 20-point Gauss-Legendre per piece.
double segmentIntegral(const RationalMap& r, cplx a, cplx b) {
  static const double xg[10] = {0.0765265211334973, 0.2277858511416451, 0.3737060887154195,
                                0.5108670019508271, 0.6360536807265150, 0.7463319064601508,
                                0.8391169718222188, 0.9122344282513258, 0.9639719272779138,
                                0.9931285991850949};
  static const double wg[10] = {0.1527533871307258, 0.1491729864726037, 0.1420961093183819,
                                0.1316886384491765, 0.1181945319615182, 0.1019301198172403,
                                0.0832767415767047, 0.0626720483341094, 0.0406014298003862,
                                0.0176140071391533};
  const int pieces = 8;
  cplx total = 0.0;
  for (int p = 0; p < pieces; ++p) {
    cplx u = a + (b - a) * (static_cast<double>(p) / pieces);
    cplx v = a + (b - a) * (static_cast<double>(p + 1) / pieces);
    cplx mid = 0.5 * (u + v), half = 0.5 * (v - u);
    for (int i = 0; i < 10; ++i) {
      total += wg[i] * (r(mid + xg[i] * half) + r(mid - xg[i] * half)) * half;
    }
  }
  return 2.0 * total.real();
}

double distToSegment(cplx p, cplx a, cplx b) {
  cplx ab = b - a;
  double t = std::norm(ab) == 0.0 ? 0.0 : std::clamp(((p - a) * std::conj(ab)).real() / std::norm(ab), 0.0, 1.0);
  return std::abs(p - (a + t * ab));
}

}  // namespace

HeleShawCheck heleShawLocalMin(const RationalMap& r, cplx z0, double probeRadius) {
  if (!(probeRadius > 0.0)) throw InputError("Hele-Shaw check: probe radius must be positive");
  auto integral = [&](cplx z) {
    bool blocked = false;
    for (const auto& pole : r.finitePoles())
      if (distToSegment(pole.z, z0, z) < 1e-3 * std::max(1.0, std::abs(z - z0))) blocked = true;
    if (!blocked) return segmentIntegral(r, z0, z);
    // Deflect through a point off the segment and retry once.
    cplx mid = 0.5 * (z0 + z) + cplx(0.0, 0.5) * (z - z0);
    for (const auto& pole : r.finitePoles())
      if (distToSegment(pole.z, z0, mid) < 1e-6 || distToSegment(pole.z, mid, z) < 1e-6)
        throw InputError("Hele-Shaw check: pole on the integration path");
    return segmentIntegral(r, z0, mid) + segmentIntegral(r, mid, z);
  };
  auto Q = [&](cplx z) { return std::norm(z) - std::norm(z0) - integral(z); };

  HeleShawCheck out;
  out.qAtCenter = Q(z0);
  out.hessianDet = 1.0 - std::norm(r.derivative(z0));
  out.minProbe = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 64; ++k) {
    cplx z = z0 + std::polar(probeRadius, 2.0 * std::numbers::pi * k / 64.0);
    out.minProbe = std::min(out.minProbe, Q(z));
  }
  out.strictLocalMin = out.hessianDet > 0.0 && out.minProbe > 0.0;
  return out;
}

// ---------------------------------------------------------------------------

nlohmann::json toJson(const FixedPointReport& rep) {
  nlohmann::json j;
  j["schema"] = 1;
  auto pts = nlohmann::json::array();
  for (const auto& p : rep.points) {
    nlohmann::json e;
    if (p.atInfinity)
      e["z"] = "inf";
    else
      e["z"] = toJson(p.z);
    e["multiplier"] = p.multiplier;
    e["class"] = toString(p.cls);
    if (!p.atInfinity) e["residual"] = p.residual;
    pts.push_back(e);
  }
  j["points"] = pts;
  j["F"] = rep.F;
  j["A"] = rep.A;
  j["Fhat"] = rep.Fhat;
  j["Ahat"] = rep.Ahat;
  j["d"] = rep.d;
  j["n"] = rep.n;
  j["hyperbolic"] = rep.hyperbolic;
  if (rep.hyperbolic)
    j["lefschetzResidual"] = verifyLefschetz(rep);
  else
    j["lefschetzResidual"] = nullptr;
  return j;
}

nlohmann::json toJson(const LensConfig& cfg) {
  nlohmann::json j;
  j["gamma"] = cfg.gamma;
  j["source"] = toJson(cfg.source);
  j["masses"] = cfg.masses;
  auto pos = nlohmann::json::array();
  for (const auto& z : cfg.positions) pos.push_back(toJson(z));
  j["positions"] = pos;
  return j;
}

LensConfig lensConfigFromJson(const nlohmann::json& j) {
  LensConfig c;
  try {
    c.gamma = j.at("gamma").get<double>();
    c.source = j.contains("source") ? complexFromJson(j["source"]) : cplx(0.0);
    c.masses = j.at("masses").get<std::vector<double>>();
    for (const auto& p : j.at("positions")) c.positions.push_back(complexFromJson(p));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("lens config: ") + e.what());
  }
  return c;
}

}  // namespace qdx
