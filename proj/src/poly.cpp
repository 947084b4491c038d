#include "qdx/poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qdx/errors.hpp"

namespace qdx {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
}

ComplexPoly::ComplexPoly(std::vector<cplx> coeffs) : c_(std::move(coeffs)) { normalize(); }

ComplexPoly::ComplexPoly(std::initializer_list<cplx> coeffs) : c_(coeffs) { normalize(); }

ComplexPoly ComplexPoly::monomial(cplx c, int k) {
  std::vector<cplx> v(static_cast<size_t>(k) + 1, 0.0);
  v[k] = c;
  return ComplexPoly(std::move(v));
}

void ComplexPoly::normalize() {
  while (!c_.empty() && c_.back() == cplx(0.0, 0.0)) c_.pop_back();
}

cplx ComplexPoly::coeff(int k) const {
  if (k < 0 || k >= static_cast<int>(c_.size())) return 0.0;
  return c_[k];
}

cplx ComplexPoly::leading() const { return c_.empty() ? cplx(0.0) : c_.back(); }

cplx ComplexPoly::operator()(cplx z) const {
  cplx acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
  return acc;
}

void ComplexPoly::evalWithDerivative(cplx z, cplx& p, cplx& dp) const {
  p = 0.0;
  dp = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
    dp = dp * z + p;
    p = p * z + *it;
  }
}

double ComplexPoly::absEval(double r) const {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * r + std::abs(*it);
  return acc;
}

double ComplexPoly::maxAbsCoeff() const {
  double m = 0.0;
  for (const auto& a : c_) m = std::max(m, std::abs(a));
  return m;
}

ComplexPoly ComplexPoly::derivative() const {
  if (c_.size() <= 1) return {};
  std::vector<cplx> v(c_.size() - 1);
  for (size_t k = 1; k < c_.size(); ++k) v[k - 1] = c_[k] * static_cast<double>(k);
  return ComplexPoly(std::move(v));
}

ComplexPoly ComplexPoly::antiderivative() const {
  std::vector<cplx> v(c_.size() + 1, 0.0);
  for (size_t k = 0; k < c_.size(); ++k) v[k + 1] = c_[k] / static_cast<double>(k + 1);
  return ComplexPoly(std::move(v));
}

ComplexPoly ComplexPoly::conjugated() const {
  std::vector<cplx> v(c_);
  for (auto& a : v) a = std::conj(a);
  return ComplexPoly(std::move(v));
}

ComplexPoly ComplexPoly::trimmed(double rel) const {
  std::vector<cplx> v(c_);
  double cut = rel * maxAbsCoeff();
  while (!v.empty() && std::abs(v.back()) <= cut) v.pop_back();
  return ComplexPoly(std::move(v));
}

ComplexPoly ComplexPoly::operator+(const ComplexPoly& o) const {
  std::vector<cplx> v(std::max(c_.size(), o.c_.size()), 0.0);
  for (size_t k = 0; k < c_.size(); ++k) v[k] += c_[k];
  for (size_t k = 0; k < o.c_.size(); ++k) v[k] += o.c_[k];
  return ComplexPoly(std::move(v));
}

ComplexPoly ComplexPoly::operator-(const ComplexPoly& o) const { return *this + o * cplx(-1.0); }

ComplexPoly ComplexPoly::operator*(const ComplexPoly& o) const {
  if (isZero() || o.isZero()) return {};
  std::vector<cplx> v(c_.size() + o.c_.size() - 1, 0.0);
  for (size_t i = 0; i < c_.size(); ++i)
    for (size_t j = 0; j < o.c_.size(); ++j) v[i + j] += c_[i] * o.c_[j];
  return ComplexPoly(std::move(v));
}

ComplexPoly ComplexPoly::operator*(cplx s) const {
  std::vector<cplx> v(c_);
  for (auto& a : v) a *= s;
  return ComplexPoly(std::move(v));
}

// ---------------------------------------------------------------------------

LaurentPoly::LaurentPoly(int lowPower, std::vector<cplx> coeffs) : lo_(lowPower), c_(std::move(coeffs)) {}

cplx LaurentPoly::coeff(int k) const {
  int i = k - lo_;
  if (i < 0 || i >= static_cast<int>(c_.size())) return 0.0;
  return c_[i];
}

cplx LaurentPoly::operator()(cplx z) const {
  cplx acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
  if (lo_ != 0) acc *= std::pow(z, lo_);
  return acc;
}

LaurentPoly LaurentPoly::derivative() const {
  if (c_.empty()) return {};
  std::vector<cplx> v(c_.size());
  for (size_t i = 0; i < c_.size(); ++i) v[i] = c_[i] * static_cast<double>(lo_ + static_cast<int>(i));
  return LaurentPoly(lo_ - 1, std::move(v));
}

LaurentPoly LaurentPoly::operator+(const LaurentPoly& o) const {
  if (c_.empty()) return o;
  if (o.c_.empty()) return *this;
  int lo = std::min(lo_, o.lo_);
  int hi = std::max(highPower(), o.highPower());
  std::vector<cplx> v(static_cast<size_t>(hi - lo + 1), 0.0);
  for (int k = lo; k <= hi; ++k) v[k - lo] = coeff(k) + o.coeff(k);
  return LaurentPoly(lo, std::move(v));
}

LaurentPoly LaurentPoly::operator*(double s) const {
  std::vector<cplx> v(c_);
  for (auto& a : v) a *= s;
  return LaurentPoly(lo_, std::move(v));
}

ComplexPoly LaurentPoly::clearedNumerator() const {
  if (lo_ > 0) throw InputError("clearedNumerator: Laurent polynomial has no negative powers to clear");
  return ComplexPoly(c_);
}

// ---------------------------------------------------------------------------

std::vector<Pole> clusterPoints(const std::vector<cplx>& pts, double rel) {
  std::vector<Pole> out;
  std::vector<cplx> sums;
  for (const auto& z : pts) {
    bool merged = false;
    for (size_t i = 0; i < out.size(); ++i) {
      if (std::abs(out[i].z - z) <= rel * std::max(1.0, std::abs(z))) {
        sums[i] += z;
        out[i].multiplicity += 1;
        out[i].z = sums[i] / static_cast<double>(out[i].multiplicity);
        merged = true;
        break;
      }
    }
    if (!merged) {
      out.push_back({z, 1});
      sums.push_back(z);
    }
  }
  return out;
}

RationalMap::RationalMap(ComplexPoly numerator, ComplexPoly denominator, double coprimeTol)
    : num_(std::move(numerator)), den_(std::move(denominator)) {
  if (den_.isZero()) throw InputError("rational map: denominator is identically zero");
  d_ = std::max(num_.degree(), den_.degree());
  if (num_.isZero() || d_ < 1) throw InputError("rational map: degree must be at least 1");
  if (den_.degree() >= 1) {
    auto droots = allRoots(den_);
    if (num_.degree() >= 1) {
      auto nroots = allRoots(num_);
      for (const auto& a : droots)
        for (const auto& b : nroots)
          if (std::abs(a - b) < coprimeTol * std::max(1.0, std::abs(a))) {
            std::ostringstream os;
            os << "rational map: numerator and denominator share the root (" << a.real() << ", "
               << a.imag() << ")";
            throw InputError(os.str());
          }
    }
    poles_ = clusterPoints(droots, 1e-5);
  }
}

int RationalMap::infinityPoleOrder() const { return std::max(0, num_.degree() - den_.degree()); }

int RationalMap::distinctPoles() const {
  return static_cast<int>(poles_.size()) + (infinityPoleOrder() > 0 ? 1 : 0);
}

cplx RationalMap::operator()(cplx z) const {
  cplx q = den_(z);
  if (q == cplx(0.0)) return {std::numeric_limits<double>::infinity(), 0.0};
  return num_(z) / q;
}

cplx RationalMap::derivative(cplx z) const {
  cplx p, dp, q, dq;
  num_.evalWithDerivative(z, p, dp);
  den_.evalWithDerivative(z, q, dq);
  return (dp * q - p * dq) / (q * q);
}

// ---------------------------------------------------------------------------

namespace {

// Positive root of |a_n| x^n - sum_{k<n} |a_k| x^k: every root lies in |z| <= rho.
double cauchyRadius(const ComplexPoly& p) {
  int n = p.degree();
  double an = std::abs(p.leading());
  auto cauchy = [&](double x) {
    double lower = 0.0;
    for (int k = n - 1; k >= 0; --k) lower = lower * x + std::abs(p.coeff(k));
    return an * std::pow(x, n) - lower;
  };
  double hi = 1.0;
  while (cauchy(hi) <= 0.0) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    if (cauchy(mid) > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return std::max(hi, 1e-300);
}

}  // namespace

std::vector<cplx> allRoots(const ComplexPoly& p, double tol) {
  int n = p.degree();
  if (n < 1) throw InputError("allRoots: polynomial must have degree >= 1");
  // Exact zero roots are split off; relative residuals are meaningless there.
  int zeros = 0;
  while (zeros < n && p.coeff(zeros) == cplx(0.0)) ++zeros;
  if (zeros > 0) {
    std::vector<cplx> out(zeros, 0.0);
    if (zeros < n) {
      std::vector<cplx> rest;
      for (int k = zeros; k <= n; ++k) rest.push_back(p.coeff(k));
      auto more = allRoots(ComplexPoly(std::move(rest)), tol);
      out.insert(out.end(), more.begin(), more.end());
    }
    return out;
  }
  if (n == 1) return {-p.coeff(0) / p.coeff(1)};

  const double rho = cauchyRadius(p);
  std::vector<cplx> z(n);
  for (int k = 0; k < n; ++k) {
    double ang = 2.0 * std::numbers::pi * k / n + 0.4 / n + 0.1;
    double rad = rho * (1.0 - 0.01 * ((k % 3) - 1));
    z[k] = std::polar(rad, ang);
  }
  std::vector<char> done(n, 0);
  for (int iter = 0; iter < 200; ++iter) {
    bool all = true;
    for (int k = 0; k < n; ++k) {
      if (done[k]) continue;
      cplx pv, dpv;
      p.evalWithDerivative(z[k], pv, dpv);
      double scale = p.absEval(std::abs(z[k]));
      if (std::abs(pv) <= 4.0 * kEps * scale) {
        done[k] = 1;
        continue;
      }
      cplx ratio = pv / dpv;
      cplx sum = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != k) sum += 1.0 / (z[k] - z[j]);
      cplx w = ratio / (1.0 - ratio * sum);
      if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) w = ratio;
      z[k] -= w;
      if (std::abs(w) <= 2.0 * kEps * std::abs(z[k])) done[k] = 1;
      all = false;
    }
    if (all) break;
  }
  // Newton polish, kept only when it lowers the residual.
  for (auto& r : z) {
    for (int s = 0; s < 3; ++s) {
      cplx pv, dpv;
      p.evalWithDerivative(r, pv, dpv);
      if (dpv == cplx(0.0)) break;
      cplx cand = r - pv / dpv;
      if (std::abs(p(cand)) < std::abs(pv)) r = cand;
      else break;
    }
  }
  double worst = 0.0;
  for (const auto& r : z) {
    double rel = std::abs(p(r)) / std::max(p.absEval(std::abs(r)), 1e-300);
    if (!std::isfinite(rel)) rel = std::numeric_limits<double>::infinity();
    worst = std::max(worst, rel);
  }
  if (worst > tol) {
    std::ostringstream os;
    os << "allRoots: no convergence for degree " << n << " polynomial, worst relative residual " << worst;
    throw NumericalError(os.str());
  }
  return z;
}

std::vector<RootInfo> rootsWithCircleFlag(const ComplexPoly& p, double tol) {
  std::vector<RootInfo> out;
  for (const auto& z : allRoots(p, tol)) out.push_back({z, std::abs(std::abs(z) - 1.0) < 1e-9});
  return out;
}

ComplexPoly dualize(const ComplexPoly& p, int k) {
  if (p.degree() > k) {
    std::ostringstream os;
    os << "dualize: degree " << p.degree() << " exceeds slot " << k;
    throw InputError(os.str());
  }
  std::vector<cplx> v(static_cast<size_t>(k) + 1, 0.0);
  for (int j = 0; j <= k; ++j) v[j] = std::conj(p.coeff(k - j));
  return ComplexPoly(std::move(v));
}

bool isSelfDual(const ComplexPoly& p, int k, double tol) {
  ComplexPoly q = dualize(p, k);
  for (int j = 0; j <= k; ++j)
    if (std::abs(p.coeff(j) - q.coeff(j)) > tol) return false;
  return true;
}

// ---------------------------------------------------------------------------

nlohmann::json toJson(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

cplx complexFromJson(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw InputError("expected a complex number as [re, im], got " + j.dump());
  return {j[0].get<double>(), j[1].get<double>()};
}

nlohmann::json toJson(const ComplexPoly& p) {
  auto arr = nlohmann::json::array();
  for (const auto& a : p.coeffs()) arr.push_back(toJson(a));
  return arr;
}

ComplexPoly polyFromJson(const nlohmann::json& j) {
  if (!j.is_array()) throw InputError("expected a polynomial as an array of [re, im] pairs");
  std::vector<cplx> v;
  for (const auto& e : j) v.push_back(complexFromJson(e));
  return ComplexPoly(std::move(v));
}

RationalMap parseRational(const std::string& text) {
  // The '/' separator cannot appear inside a JSON number array.
  auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return RationalMap(polyFromJson(nlohmann::json::parse(text)), ComplexPoly{1.0});
    auto num = polyFromJson(nlohmann::json::parse(text.substr(0, slash)));
    auto den = polyFromJson(nlohmann::json::parse(text.substr(slash + 1)));
    return RationalMap(num, den);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("malformed rational map: ") + e.what());
  }
}

}  // namespace qdx
