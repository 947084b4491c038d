#include "qdx/quad.hpp"

#include <cmath>
#include <numbers>

#include "qdx/errors.hpp"

namespace qdx {

namespace {

using Series = std::vector<cplx>;

Series mul(const Series& a, const Series& b, int order) {
  Series c(static_cast<size_t>(order) + 1, 0.0);
  for (int i = 0; i <= order && i < static_cast<int>(a.size()); ++i) {
    if (a[i] == cplx(0.0)) continue;
    for (int j = 0; i + j <= order && j < static_cast<int>(b.size()); ++j) c[i + j] += a[i] * b[j];
  }
  return c;
}

Series reciprocal(const Series& a, int order) {
  Series r(static_cast<size_t>(order) + 1, 0.0);
  r[0] = 1.0 / a[0];
  for (int n = 1; n <= order; ++n) {
    cplx s = 0.0;
    for (int k = 1; k <= n && k < static_cast<int>(a.size()); ++k) s += a[k] * r[n - k];
    r[n] = -s / a[0];
  }
  return r;
}

Series powSeries(const Series& a, int k, int order) {
  Series r(static_cast<size_t>(order) + 1, 0.0);
  r[0] = 1.0;
  for (int i = 0; i < k; ++i) r = mul(r, a, order);
  return r;
}

// f(g) truncated to the given order.
Series compose(const ComplexPoly& f, const Series& g, int order) {
  Series acc(static_cast<size_t>(order) + 1, 0.0);
  Series gp(static_cast<size_t>(order) + 1, 0.0);
  gp[0] = 1.0;
  for (int k = 0; k <= f.degree(); ++k) {
    for (int i = 0; i <= order; ++i) acc[i] += f.coeff(k) * gp[i];
    gp = mul(gp, g, order);
  }
  return acc;
}

cplx ipow(cplx z, int e) {
  cplx r = 1.0;
  for (int i = 0; i < e; ++i) r *= z;
  return r;
}

}  // namespace

std::vector<cplx> seriesInverse(const ComplexPoly& f, int order) {
  if (std::abs(f.coeff(0)) > 1e-14) throw InputError("series inversion needs f(0) = 0");
  cplx a1 = f.coeff(1);
  if (std::abs(a1) == 0.0) throw InputError("series inversion breaks down: f'(0) = 0");
  Series g(static_cast<size_t>(order) + 1, 0.0);
  g[1] = 1.0 / a1;
  for (int n = 2; n <= order; ++n) {
    Series c = compose(f, g, n);
    g[n] = -c[n] / a1;
  }
  return g;
}

QuadratureData schwarzPrincipalPart(const ComplexPoly& f) {
  const int d = f.degree();
  if (d < 1) throw InputError("Schwarz function needs a nonconstant polynomial");
  Series g = seriesInverse(f, d + 2);
  // h = g / z, so g^{-k} = z^{-k} h^{-k}.
  Series h(g.begin() + 1, g.end());
  Series hinv = reciprocal(h, d);
  std::vector<cplx> principal(d, 0.0);
  for (int k = 1; k <= d; ++k) {
    Series hk = powSeries(hinv, k, d);
    cplx ak = std::conj(f.coeff(k));
    for (int m = 1; m <= k; ++m) principal[m - 1] += ak * hk[k - m];
  }
  QuadratureData q;
  q.d = d;
  q.n = 1;
  q.nodes.push_back({0.0, d, principal});
  return q;
}

std::vector<MomentResidual> verifyQuadratureIdentity(const ComplexPoly& f, int kMax) {
  QuadratureData q = schwarzPrincipalPart(f);
  std::vector<MomentResidual> out;
  ComplexPoly fk{1.0};
  for (int k = 0; k <= kMax; ++k) {
    fk = fk * f;  // f^{k+1}
    cplx lhs = 0.0;
    for (int m = 1; m <= f.degree(); ++m)
      lhs += static_cast<double>(m) * (fk.coeff(m) / static_cast<double>(k + 1)) * std::conj(f.coeff(m));
    lhs *= std::numbers::pi;
    // Residue at the node 0 of z^k sum_m c_m z^{-m} is c_{k+1}.
    cplx rhs = 0.0;
    for (const auto& node : q.nodes) {
      // z^k expanded around the node: sum_j binom(k,j) node^{k-j} (z-node)^j
      for (int j = 0; j <= k; ++j) {
        double binom = std::tgamma(k + 1.0) / (std::tgamma(j + 1.0) * std::tgamma(k - j + 1.0));
        int m = j + 1;
        if (m <= static_cast<int>(node.principal.size()))
          rhs += binom * ipow(node.z, k - j) * node.principal[m - 1];
      }
    }
    rhs *= std::numbers::pi;
    double res = std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
    out.push_back({k, lhs, rhs, res});
  }
  return out;
}

double areaTheorem(const ComplexPoly& f) {
  double s = 0.0;
  for (int m = 1; m <= f.degree(); ++m) s += m * std::norm(f.coeff(m));
  return std::numbers::pi * s;
}

nlohmann::json toJson(const QuadratureData& q) {
  nlohmann::json j;
  j["schema"] = 1;
  auto nodes = nlohmann::json::array();
  for (const auto& nd : q.nodes) {
    auto pr = nlohmann::json::array();
    for (const auto& c : nd.principal) pr.push_back(toJson(c));
    nodes.push_back({{"z", toJson(nd.z)}, {"mult", nd.multiplicity}, {"principal", pr}});
  }
  j["nodes"] = nodes;
  j["d"] = q.d;
  j["n"] = q.n;
  return j;
}

nlohmann::json toJson(const std::vector<MomentResidual>& r) {
  auto arr = nlohmann::json::array();
  for (const auto& m : r)
    arr.push_back({{"k", m.k}, {"area", toJson(m.areaSide)}, {"contour", toJson(m.contourSide)}, {"residual", m.residual}});
  return arr;
}

}  // namespace qdx
