#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdx/curve.hpp"
#include "qdx/inscribe.hpp"

namespace qdx {

enum class PlanKind { UqdFiniteNodes, UqdNodeAtInfinity, Bqd };
std::string toString(PlanKind k);

enum class PieceKind { Disk, DiskExterior, EllipseExterior, ExtremeBqd, ExtremeUqd };
std::string toString(PieceKind k);

// One quadrature domain of a configuration. Its boundary is a closed curve
// parametrized by t in [0, 2 pi), periodic beyond.
struct PlacedPiece {
  PieceKind kind = PieceKind::Disk;
  int multiplicity = 1;  // node multiplicity, 0 for a disk exterior
  int stage = 0;
  int hostFace = -1;  // face of the previous arrangement, -1 for seeds
  SimilarityTransform transform;  // applied to the unit circle or the map image
  std::optional<BoundaryMap> map;
  double ellipseA = 0, ellipseB = 0;  // semi-axes along x and y
  PlaneArc curve;
  bool domainOnLeft = true;
  std::vector<double> cusps;
  std::vector<std::pair<double, double>> selfContacts;  // tangential double points

  // The finite node, if any.
  std::optional<cplx> node() const;
};

PlacedPiece diskPiece(cplx center, double radius);
PlacedPiece diskExteriorPiece(cplx center, double radius);
PlacedPiece ellipseExteriorPiece(double a, double b);
// Image of an extreme map (S: bounded, Sigma: unbounded) under T.
PlacedPiece extremePiece(const BoundaryMap& f, const SimilarityTransform& T);

// Extreme maps used as building blocks: the catalog for d <= 5, otherwise
// the extremalization loop from the symmetric start (cached per process).
BoundaryMap extremeMap(Family fam, int d);

struct ContactRecord {
  int pieceA = 0, pieceB = 0;
  double tA = 0, tB = 0;
  cplx point;
  double separation = 0;  // distance between the two curves at the contact
};

struct ConstructionStage {
  int index = 0;
  std::string action;
  int piece = -1;
  int hostFace = -1;
  int facesAfter = 0;
  nlohmann::json detail;
};

struct ConstructionPlan {
  PlanKind kind = PlanKind::Bqd;
  int d = 0;
  std::vector<int> partition;  // finite and infinite multiplicities together
  int infinityMultiplicity = 0;  // 0 when every node is finite
  std::vector<PlacedPiece> pieces;
  std::vector<ContactRecord> contacts;
  std::vector<ConstructionStage> stages;
  int targetCount = 0;
  int upperBound = 0;
  double scale = 1.0;  // bounding box diameter of all boundaries
};

struct ConstructOptions {
  // A coarser sweep grid than the stand-alone default; the bisection and the
  // contact refinement restore full accuracy.
  InscribeOptions inscribe = [] {
    InscribeOptions o;
    o.pGrid = 64;
    return o;
  }();
  double contactTol = 1e-6;  // relative to the plan scale
  double gamma = 0.5;        // ellipse shear, must lie in (gamma0, 1)
};

// Shear threshold (2 - sqrt 2)/(2 + sqrt 2) below which two equal disks
// cannot be packed in the ellipse with four complement faces.
double ellipseGammaThreshold();

// UQD configurations. infinityNode names the multiplicity sitting at
// infinity; it must occur in the partition.
ConstructionPlan buildUnboundedConfig(const std::vector<int>& partition, std::optional<int> infinityNode = std::nullopt,
                                      const ConstructOptions& opt = {});
ConstructionPlan buildBoundedConfig(const std::vector<int>& partition, const ConstructOptions& opt = {});

// Adds a piece and records its contacts with the pieces already present.
// Throws InvariantViolation if the new boundary crosses an existing one and
// NumericalError for a near contact that is neither clear nor closed.
void addPiece(ConstructionPlan& plan, PlacedPiece piece, double contactTol = 1e-6);

struct FaceReport {
  int id = 0;
  bool bounded = true;
  int boundaryCycles = 1;
  int singularPoints = 0;  // zero-angle corners: cusps and pinch points
  std::string classification = "other";
  double area = 0;  // of the outer boundary cycle; 0 for the unbounded face
  std::vector<int> pieces;
};

struct OracleReport {
  int resolution = 0;
  int faceCount = 0;
  int fragments = 0;  // components below the size floor, near cusp tips
  int minPixels = 0;
  int windows = 0;  // rasters merged: the whole picture plus zoomed windows
  bool agrees = false;
};

struct ArrangementReport {
  int faceCount = 0;
  std::vector<FaceReport> faces;  // complement faces only
  int vertices = 0, edges = 0, components = 0;
  int targetCount = 0;
  int upperBound = 0;
  bool achieved = false;
  OracleReport oracle;
};

// Faces of the complement of the union of the closed pieces. Throws
// InvariantViolation if the count exceeds the theorem bound or the
// subdivision is inconsistent. oracleResolution 0 skips the raster check.
ArrangementReport countComplementComponents(const ConstructionPlan& plan, int oracleResolution = 4096);

// Raster flood fill of free pixels, 4-connected, over the whole picture and
// over zoomed windows at the same resolution around each piece and each loop
// cut off by a self-contact. Components of different windows that share a free
// pixel are merged; a face counts if some window gives it minPixels pixels.
OracleReport rasterFaceCount(const ConstructionPlan& plan, int resolution, int minPixels = 32);

// Boundary of one complement face as a classified Jordan curve.
PlaneCurve complementFaceCurve(const ConstructionPlan& plan, int faceId);

nlohmann::json toJson(const ConstructionPlan& p);
nlohmann::json toJson(const ArrangementReport& r);
std::string constructionSvg(const ConstructionPlan& p, const std::string& manifest);

}  // namespace qdx
