#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qdx/poly.hpp"

namespace qdx {

// S: f = z + a_2 z^2 + ... + a_d z^d on the unit disk.
// Sigma: f = z + a_1/z + ... + a_d/z^d on the exterior of the unit disk.
enum class Family { S, Sigma };
std::string toString(Family f);
Family familyFromString(const std::string& s);

class BoundaryMap {
 public:
  BoundaryMap(Family family, LaurentPoly f);
  // a[k] multiplies z^k, k = 0..d.
  static BoundaryMap fromTaylor(std::vector<cplx> a);
  // tail[j-1] multiplies z^{-j}, j = 1..d; the linear term is z.
  static BoundaryMap fromLaurentTail(const std::vector<cplx>& tail);

  Family family() const { return family_; }
  int degree() const { return d_; }
  const LaurentPoly& laurent() const { return f_; }

  cplx operator()(cplx z) const { return f_(z); }
  cplx d1(cplx z) const { return f1_(z); }
  cplx d2(cplx z) const { return f2_(z); }

  // Boundary parametrization P(t) = f(e^{it}) and its t-derivatives.
  cplx at(double t) const;
  cplx velocity(double t) const;      // i z f'(z)
  cplx acceleration(double t) const;  // -z f'(z) - z^2 f''(z)

  // Polynomial whose unit-circle roots are the cusp parameters:
  // f' for S, z^{d+1} f' for Sigma.
  ComplexPoly criticalPoly() const;
  // Coefficient magnitude scale used for position tolerances.
  double scale() const;

  BoundaryMap rotated(double phi) const;  // e^{-i phi} f(e^{i phi} z)

 private:
  Family family_;
  int d_;
  LaurentPoly f_, f1_, f2_;
};

struct CuspPoint {
  double t;
  cplx point;
};

struct DoublePoint {
  double tMinus, tPlus;
  cplx point;
  double tangentGap;  // angle between tangent lines, radians
  bool tangential;
};

struct BoundaryCurve {
  Family family;
  int d;
  std::vector<std::pair<double, cplx>> samples;
  std::vector<CuspPoint> cusps;
  std::vector<DoublePoint> doublePoints;
  std::vector<std::pair<double, double>> curvatureSamples;
  std::vector<std::string> log;
};

struct CurveOptions {
  int gridSize = 2048;
  double cuspSnap = 1e-9;
  double newtonTol = 1e-12;
  double collinearTol = 1e-6;   // radians
  double cuspExclusion = 1e-4;  // no curvature samples this close to a cusp
  int curvatureSamples = 256;
};

std::vector<CuspPoint> findCusps(const BoundaryMap& f, const CurveOptions& opt = {},
                                 std::vector<std::string>* warnings = nullptr);

// Local solve near a self-approach of the boundary.
struct ContactSolve {
  bool converged = false;
  double t1 = 0, t2 = 0;
  double distance = 0;    // |P(t1) - P(t2)|
  double separation = 0;  // signed: > 0 arcs apart, < 0 arcs overlap
  double angle = 0;       // angle between tangent lines at t1, t2
};
// Solves "P(t1)-P(t2) normal to the tangent at t2" and "tangents parallel";
// this system stays regular at tangential contacts.
ContactSolve solveContact(const BoundaryMap& f, double t1, double t2);
// Plain Newton on P(t1) = P(t2); quadratic at transversal crossings.
ContactSolve solveCrossing(const BoundaryMap& f, double t1, double t2);

// Off-diagonal local minima of |P(s)-P(t)| on a gridSize^2 torus grid.
std::vector<std::pair<double, double>> proximityCandidates(const BoundaryMap& f, int gridSize,
                                                           double thresholdFactor = 2.0);

std::vector<DoublePoint> findDoublePoints(const BoundaryMap& f, const CurveOptions& opt = {},
                                          std::vector<std::string>* log = nullptr);

// Re(1 + z f''/f') at z = e^{it}; throws near a cusp.
double conformalCurvature(const BoundaryMap& f, double t);
double starredCurvature(Family fam, int d);  // (1+d)/2 or (1-d)/2

double verifyDoubleAngleRelation(const BoundaryCurve& curve);

enum class Verdict { True, False, Inconclusive };
std::string toString(Verdict v);
struct UnivalenceResult {
  Verdict verdict;
  double witnessT1 = 0, witnessT2 = 0;
  int winding = 0;
  std::string reason;
};
UnivalenceResult isUnivalent(const BoundaryMap& f, int sampleCount = 2048, const CurveOptions& opt = {});

struct FaceInfo {
  int id;
  bool bounded;
  bool isDomain;  // the image domain itself rather than a complement face
  int doublePoints;
  int cusps;
  std::string classification;  // cardioid-like | deltoid-like | other
  double maxArcTurning;        // largest tangent variation along one side
  std::vector<int> arcs;       // indices into singularArcs()
};

struct SingularityCensus {
  int cuspCount = 0;
  int doublePointCount = 0;
  bool isExtreme = false;
  std::vector<FaceInfo> perComponent;
};

// Cusps and both parameters of every double point, sorted by t.
struct SingularParameter {
  double t;
  int id;  // shared by the two parameters of a double point
  bool cusp;
};
std::vector<SingularParameter> singularParameters(const BoundaryCurve& curve);

// Arcs of f(T) between consecutive singular parameters; t1 may exceed 2 pi.
struct CurveArc {
  double t0, t1;
  int s0, s1;  // indices into singularParameters, -1 for a smooth closed curve
};
std::vector<CurveArc> singularArcs(const BoundaryCurve& curve);

int cuspCap(Family fam, int d);
int doublePointCap(Family fam, int d);

BoundaryCurve analyzeCurve(const BoundaryMap& f, const CurveOptions& opt = {});
// Counts and extremeness; cap violations throw InvariantViolation.
SingularityCensus census(const BoundaryMap& f, const CurveOptions& opt = {});
SingularityCensus censusOf(const BoundaryCurve& curve);
std::vector<FaceInfo> componentAnalysis(const BoundaryMap& f, const BoundaryCurve& curve, int raster = 1024);

// Closed polygon approximating f(T), n samples.
std::vector<cplx> samplePolyline(const BoundaryMap& f, int n);
// Winding number of a closed polyline around p.
int windingNumber(const std::vector<cplx>& poly, cplx p);

std::string curveCsv(const BoundaryMap& f, const BoundaryCurve& curve, int samples);
std::string curveSvg(const BoundaryMap& f, const BoundaryCurve& curve, const std::string& manifest);
nlohmann::json toJson(const SingularityCensus& c);
nlohmann::json toJson(const BoundaryCurve& c);
nlohmann::json toJson(const BoundaryMap& f);
BoundaryMap boundaryMapFromJson(const nlohmann::json& j);

}  // namespace qdx
