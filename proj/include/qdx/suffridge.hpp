#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "qdx/curve.hpp"
#include "qdx/poly.hpp"

namespace qdx {

// Extreme maps listed in closed form, d = 2..5 for both families.
// Throws InputError for anything outside the catalog.
BoundaryMap knownSuffridge(Family fam, int d);

// Real basis of perturbations r keeping the derivative self-dual:
// S: r = sum a_j z^j, j = 2..d-1, with r' self-dual in Pi_{d-1}.
// Sigma: r = sum a_j z^{-j}, j = 1..d-2, with z^{d+1} r' self-dual in Pi_{d+1}
// after adding the fixed part of the map. Size d-2.
std::vector<LaurentPoly> selfDualBasis(Family fam, int d);

// Self-duality of the derivative of f (S) or of z^{d+1} f' (Sigma).
bool satisfiesSelfDuality(const BoundaryMap& f, double tol = 1e-12);
// Same check for a perturbation direction, which has no fixed part.
bool directionSatisfiesSelfDuality(Family fam, int d, const LaurentPoly& r, double tol = 1e-12);

struct PerturbationStep {
  std::vector<double> coefficients;  // over selfDualBasis
  LaurentPoly direction;
  double deltaMin = 0, deltaMax = 0;  // filled in by maxUnivalentDelta
  std::vector<double> r2Residuals;    // one per constrained double point
  int nullity = 0;
  std::vector<std::vector<double>> nullSpace;  // orthonormal, over selfDualBasis
};

// Nontrivial r in the span of the basis moving every listed double point
// along its common tangent line. Throws AlreadyExtreme when N >= d-2.
class AlreadyExtreme : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
PerturbationStep perturbationDirection(const BoundaryMap& f, const std::vector<DoublePoint>& doublePoints);
// Re(Delta r / zeta_+^{(d+1)/2}) for S, Re(Delta r / zeta_+^{(1-d)/2}) for Sigma.
double r2Residual(Family fam, int d, const LaurentPoly& r, const DoublePoint& p);

BoundaryMap perturbed(const BoundaryMap& f, const LaurentPoly& r, double delta);

struct DeltaInterval {
  double deltaMin = 0, deltaMax = 0;
  // Witnesses of failure just beyond each endpoint.
  double witnessMin[2] = {0, 0}, witnessMax[2] = {0, 0};
  std::string reasonMin, reasonMax;
  int probes = 0;
};
struct DeltaOptions {
  double relResolution = 1e-10;
  int samples = 1024;
  int sampleCap = 8192;
  double growth = 1.5;
};
// Largest interval around 0 on which f + delta r stays univalent with the
// full cusp count; endpoints are bisected to relResolution.
DeltaInterval maxUnivalentDelta(const BoundaryMap& f, const LaurentPoly& r, const DeltaOptions& opt = {});

struct ExtremalizeOptions {
  int maxRounds = 40;  // walks attempted, counting abandoned branches
  double stepFraction = 0.98;
  double closureTol = 1e-13;  // relative to the map scale
  int closureIterations = 40;
  DeltaOptions delta;
};

struct ExtremalizeResult {
  BoundaryMap f;
  bool extreme = false;
  int rounds = 0;
  int cusps = 0, doublePoints = 0;
  double curvatureDeviation = 0;   // max |kappa - (1 +- d)/2| over regular samples
  double doubleAngleResidual = 0;
  double catalogDistance = -1;     // coefficient distance to the catalog map up to symmetry, -1 if none
  std::string shortfall;
  std::vector<nlohmann::json> trace;  // one record per round
};

// Starting map z + z^d/d (S) or z - 1/(d z^d) (Sigma): equally spaced cusps, no double points.
BoundaryMap symmetricStart(Family fam, int d);

// Pushes f0 to the boundary of univalence along self-dual directions until
// the double point count reaches d-2.
ExtremalizeResult extremalize(const BoundaryMap& f0, const ExtremalizeOptions& opt = {});

// Coefficient distance between f and g minimized over the rotations and the
// reflection that preserve the starred normalization.
double distanceUpToSymmetry(const BoundaryMap& f, const BoundaryMap& g);

nlohmann::json toJson(const ExtremalizeResult& r);
nlohmann::json toJson(const PerturbationStep& s);

}  // namespace qdx
