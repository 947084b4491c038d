#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qdx/poly.hpp"

namespace qdx {

enum class FixedClass { Attracting, Repelling, Superattracting, Nonhyperbolic };
std::string toString(FixedClass c);

struct FixedPoint {
  bool atInfinity = false;
  cplx z;             // meaningless when atInfinity
  double multiplier;  // |r'(z)|; at infinity, the multiplier in the chart w = 1/z
  FixedClass cls;
  double residual;    // |r(z) - conj z| after polishing (0 at infinity)
};

struct FixedPointReport {
  std::vector<FixedPoint> points;
  int F = 0, A = 0, Fhat = 0, Ahat = 0;
  int d = 0, n = 0;
  bool hyperbolic = true;
};

struct LensSolveOptions {
  double candidateTol = 1e-5;   // loose pre-filter on |r(z)-conj z| / max(1,|z|^2)
  double residualTol = 1e-8;    // acceptance after Newton polishing, same scaling
  double superTol = 1e-9;       // multiplier at or below this is superattracting
  double hyperMargin = 1e-6;    // ||r'|-1| below this is nonhyperbolic
  double clusterRel = 1e-7;
};

// Numerator of r*(r(z)) - z with r*(w) = conj(r(conj w)).
// Throws InputError when r* o r is the identity.
ComplexPoly buildFixedPointPoly(const RationalMap& r);

FixedPointReport solveLens(const RationalMap& r, const LensSolveOptions& opt = {});

// Fhat - (2 Ahat + d - 1); throws InvariantViolation-free InputError if
// nonhyperbolic points are present.
int verifyLefschetz(const FixedPointReport& report);

int sharpBound(int d, int n);  // min{3d+2n-3, 5d-5}
bool checkSharpBound(const FixedPointReport& report);

struct LensConfig {
  double gamma = 0.0;
  cplx source = 0.0;
  std::vector<double> masses;
  std::vector<cplx> positions;
};

// r(z) = -gamma z + s + sum eps_j / (z - z_j)
RationalMap lensFromMasses(const LensConfig& cfg);

// Two equal disks on the vertical major axis of the length-4 ellipse
// f(w) = a w - b/w, b = 2 - a, gamma = b/a.
double ellipseFeasibilityGamma();  // (2 - sqrt 2) / (2 + sqrt 2)
struct ConstructionSeed {
  double gamma = 0.5;
  std::vector<double> radii;
  std::vector<cplx> centers;
};
ConstructionSeed twoDiskEllipseSeed(int N, double gamma);

struct SearchResult {
  LensConfig config;
  int images = 0;
  int target = 0;
  bool shortfall = false;
  long evaluations = 0;
};
SearchResult searchMaxImages(int N, const ConstructionSeed& seed, long budget, std::uint64_t rngSeed);

struct HeleShawCheck {
  double qAtCenter;         // Q(z0), should vanish
  double hessianDet;        // 1 - |r'(z0)|^2
  double minProbe;          // min of Q on the probe circle
  bool strictLocalMin;
};
HeleShawCheck heleShawLocalMin(const RationalMap& r, cplx z0, double probeRadius);

nlohmann::json toJson(const FixedPointReport& rep);
nlohmann::json toJson(const LensConfig& cfg);
LensConfig lensConfigFromJson(const nlohmann::json& j);

}  // namespace qdx
