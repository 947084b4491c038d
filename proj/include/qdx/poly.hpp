#pragma once

#include <complex>
#include <string>
#include <vector>

#include <json.hpp>

namespace qdx {

using cplx = std::complex<double>;

// Polynomial with complex coefficients, ascending by power.
// Trailing exact zeros are stripped so that degree() == coeffs().size() - 1;
// the zero polynomial has no coefficients and degree -1.
class ComplexPoly {
 public:
  ComplexPoly() = default;
  explicit ComplexPoly(std::vector<cplx> coeffs);
  ComplexPoly(std::initializer_list<cplx> coeffs);

  static ComplexPoly monomial(cplx c, int k);

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool isZero() const { return c_.empty(); }
  const std::vector<cplx>& coeffs() const { return c_; }
  cplx coeff(int k) const;
  cplx leading() const;

  cplx operator()(cplx z) const;
  // Horner evaluation of p and p' together.
  void evalWithDerivative(cplx z, cplx& p, cplx& dp) const;
  // sum |a_k| r^k, the natural scale for residuals at |z| = r.
  double absEval(double r) const;
  double maxAbsCoeff() const;

  ComplexPoly derivative() const;
  ComplexPoly antiderivative() const;  // zero constant term
  ComplexPoly conjugated() const;
  // Drop leading coefficients below rel * maxAbsCoeff().
  ComplexPoly trimmed(double rel) const;

  ComplexPoly operator+(const ComplexPoly& o) const;
  ComplexPoly operator-(const ComplexPoly& o) const;
  ComplexPoly operator*(const ComplexPoly& o) const;
  ComplexPoly operator*(cplx s) const;

 private:
  void normalize();
  std::vector<cplx> c_;
};

// Laurent polynomial sum_{k=lo}^{hi} c_k z^k.
class LaurentPoly {
 public:
  LaurentPoly() = default;
  LaurentPoly(int lowPower, std::vector<cplx> coeffs);

  int lowPower() const { return lo_; }
  int highPower() const { return lo_ + static_cast<int>(c_.size()) - 1; }
  cplx coeff(int k) const;
  const std::vector<cplx>& coeffs() const { return c_; }

  cplx operator()(cplx z) const;
  LaurentPoly derivative() const;
  LaurentPoly operator+(const LaurentPoly& o) const;
  LaurentPoly operator*(double s) const;
  // z^{-lowPower} * this, as an ordinary polynomial (requires lowPower <= 0).
  ComplexPoly clearedNumerator() const;

 private:
  int lo_ = 0;
  std::vector<cplx> c_;
};

struct Pole {
  cplx z;
  int multiplicity;
};

// r = numerator / denominator, checked for common roots at construction.
class RationalMap {
 public:
  RationalMap(ComplexPoly numerator, ComplexPoly denominator, double coprimeTol = 1e-9);

  const ComplexPoly& numerator() const { return num_; }
  const ComplexPoly& denominator() const { return den_; }
  int degree() const { return d_; }
  const std::vector<Pole>& finitePoles() const { return poles_; }
  // Order of the pole at infinity (0 when r(inf) is finite).
  int infinityPoleOrder() const;
  // Distinct poles on the sphere, counting infinity when it is a pole.
  int distinctPoles() const;
  bool fixesInfinity() const { return num_.degree() > den_.degree(); }

  // Returns a non-finite value at poles.
  cplx operator()(cplx z) const;
  cplx derivative(cplx z) const;

 private:
  ComplexPoly num_, den_;
  int d_ = 0;
  std::vector<Pole> poles_;
};

// Roots of p with multiplicity via Aberth-Ehrlich iteration.
// Throws NumericalError naming the degree and worst residual if the
// relative residual sum|p(z)|/absEval(|z|) exceeds tol after the cap.
std::vector<cplx> allRoots(const ComplexPoly& p, double tol = 1e-10);

struct RootInfo {
  cplx z;
  bool onUnitCircle;  // ||z|-1| < 1e-9; the value itself is left untouched
};
std::vector<RootInfo> rootsWithCircleFlag(const ComplexPoly& p, double tol = 1e-10);

// p*(z) = z^k conj(p(1/conj z)); requires deg p <= k.
ComplexPoly dualize(const ComplexPoly& p, int k);
bool isSelfDual(const ComplexPoly& p, int k, double tol);

// Group nearby points (radius rel * max(1,|z|)) into (mean, count) clusters.
std::vector<Pole> clusterPoints(const std::vector<cplx>& pts, double rel);

nlohmann::json toJson(cplx z);
cplx complexFromJson(const nlohmann::json& j);
nlohmann::json toJson(const ComplexPoly& p);
ComplexPoly polyFromJson(const nlohmann::json& j);
// "[[re,im],...]/[[re,im],...]" or a bare polynomial array.
RationalMap parseRational(const std::string& text);

}  // namespace qdx
