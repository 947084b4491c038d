#pragma once

#include <vector>

#include "qdx/poly.hpp"

namespace qdx {

struct QuadratureNode {
  cplx z;
  int multiplicity;
  std::vector<cplx> principal;  // principal[m-1] multiplies (z - node)^{-m}
};

struct QuadratureData {
  std::vector<QuadratureNode> nodes;
  int d = 0;
  int n = 0;
};

// Coefficients of the compositional inverse g of f (f(0) = 0, f'(0) != 0)
// up to z^order, i.e. f(g(z)) = z + O(z^{order+1}).
std::vector<cplx> seriesInverse(const ComplexPoly& f, int order);

// Principal part at 0 of the Schwarz function of f(D), read from
// S(f(w)) = conj(f(1/conj w)).
QuadratureData schwarzPrincipalPart(const ComplexPoly& f);

struct MomentResidual {
  int k;
  cplx areaSide;     // integral of z^k over f(D), from Taylor coefficients
  cplx contourSide;  // pi * sum of residues of z^k r(z)
  double residual;   // |areaSide - contourSide| / max(1, |areaSide|)
};
std::vector<MomentResidual> verifyQuadratureIdentity(const ComplexPoly& f, int kMax);

// pi * sum m |a_m|^2
double areaTheorem(const ComplexPoly& f);

nlohmann::json toJson(const QuadratureData& q);
nlohmann::json toJson(const std::vector<MomentResidual>& r);

}  // namespace qdx
