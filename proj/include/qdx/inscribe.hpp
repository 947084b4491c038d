#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qdx/curve.hpp"
#include "qdx/poly.hpp"

namespace qdx {

// Smooth parametrized segment on [s0, s1].
struct PlaneArc {
  std::function<cplx(double)> pos, vel, acc;
  double s0 = 0.0, s1 = 1.0;
};

struct SimilarityTransform {
  double rotation = 0.0;
  double scale = 1.0;
  cplx translation = 0.0;

  cplx apply(cplx z) const;
  cplx applyVector(cplx v) const;  // linear part only
  SimilarityTransform compose(const SimilarityTransform& inner) const;  // this after inner
  SimilarityTransform inverse() const;
};

PlaneArc reversed(const PlaneArc& a);
PlaneArc transformed(const PlaneArc& a, const SimilarityTransform& T);
// Joins arcs end to start into one arc with a piecewise parameter.
PlaneArc concatenate(const std::vector<PlaneArc>& arcs);
PlaneArc arcOfMap(const BoundaryMap& f, double t0, double t1);

enum class CuspKind { Inward, Outward };
std::string toString(CuspKind k);

struct CuspVertex {
  int junction;  // end of arc `junction`, start of the next arc
  CuspKind kind;
  cplx point;
};

// Closed piecewise-smooth Jordan curve, oriented with its region on the left.
// After classification arcs run from cusp to cusp.
struct PlaneCurve {
  std::vector<PlaneArc> arcs;
  std::vector<CuspVertex> cusps;
  std::string classification = "other";  // cardioid-like | deltoid-like | other
  int concArc = -1;
  std::string reason;
  double scale = 1.0;  // bounding box diameter
};

// Checks closure, orients, merges smooth junctions and classifies.
PlaneCurve classifyJordanCurve(std::vector<PlaneArc> arcs);

PlaneCurve genuineCardioid();  // w + w^2/2 on the unit circle
PlaneCurve genuineDeltoid();   // w - 1/(2 w^2) on the unit circle, interior region
PlaneCurve unitCircle();
// The boundary of one face from componentAnalysis, oriented with the face on the left.
PlaneCurve faceCurve(const BoundaryMap& f, const BoundaryCurve& curve, const FaceInfo& face);

std::vector<cplx> sampleCurve(const PlaneCurve& c, int n);

struct TwoTangentResult {
  SimilarityTransform transform;
  double templateP = 0, templateQ = 0;  // template parameters touching p and q
  double positionGap = 0;               // |T(C(templateQ)) - q|
  double tangentGap = 0;                // worst line-angle gap at p and q
};
// Places the cardioid-like template C tangent to the concave arc gamma at
// gamma(sp) and gamma(sq), sp < sq, with the cusp between them.
TwoTangentResult twoTangentCardioid(const PlaneArc& gamma, double sp, double sq, const PlaneCurve& C);

struct InscribeOptions {
  int pGrid = 256;
  int bisectSteps = 40;
  int templateSamples = 128;   // during the sweep
  int sideSamples = 200;       // polyline resolution of each side during the sweep
  int verifySamples = 512;     // containment check
  double contactTol = 1e-6;    // relative to the curve scale
  double penetrationTol = 1e-8;
};

struct Contact {
  int side;
  cplx point;
  double distance;  // signed, positive inside T
  bool tangency;    // declared tangency on T_conc
};

struct InscriptionResult {
  bool circle = false;
  SimilarityTransform transform;
  double sp = 0, sq = 0;  // parameters on T_conc
  cplx p, q;
  std::vector<Contact> contacts;
  std::map<int, int> contactCountPerSide;
  double penetration = 0;    // max outward excursion over verification samples (>= 0)
  double tangencyGap = 0;    // worst position or direction gap at declared tangencies
  std::vector<int> sideTrace;  // touched side per p-grid point
  int labelSwitches = 0;
  int concArc = -1;
};

InscriptionResult inscribeCardioid(const PlaneCurve& T, const PlaneCurve& C, const InscribeOptions& opt = {});
InscriptionResult inscribeCircle(const PlaneCurve& T, const InscribeOptions& opt = {});

// The placed template as a closed polyline.
std::vector<cplx> placedCurve(const PlaneCurve& C, const SimilarityTransform& T, int n);

nlohmann::json toJson(const SimilarityTransform& t);
nlohmann::json toJson(const InscriptionResult& r);
std::string inscriptionSvg(const PlaneCurve& T, const PlaneCurve& C, const InscriptionResult& r,
                           const std::string& manifest);

}  // namespace qdx
