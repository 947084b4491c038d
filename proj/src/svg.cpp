#include "qdx/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

namespace qdx {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string escapeXml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

SvgWriter::SvgWriter(double xmin, double ymin, double xmax, double ymax, int widthPx, const std::string& manifest)
    : xmin_(xmin), ymin_(ymin), xmax_(xmax), ymax_(ymax), w_(widthPx), manifest_(manifest) {
  double span = std::max(xmax_ - xmin_, 1e-12);
  k_ = w_ / span;
  h_ = static_cast<int>((ymax_ - ymin_) * k_ + 0.5);
  if (h_ < 1) h_ = 1;
}

double SvgWriter::sx(double x) const { return (x - xmin_) * k_; }
double SvgWriter::sy(double y) const { return (ymax_ - y) * k_; }

void SvgWriter::beginGroup(const std::string& id) { body_ += "<g id=\"" + escapeXml(id) + "\">\n"; }
void SvgWriter::endGroup() { body_ += "</g>\n"; }

void SvgWriter::polyline(const std::vector<std::complex<double>>& pts, bool closed, const std::string& stroke,
                         double strokeWidth, const std::string& fill) {
  if (pts.empty()) return;
  std::string d;
  d.reserve(pts.size() * 20);
  for (size_t i = 0; i < pts.size(); ++i) {
    d += (i == 0 ? "M" : "L");
    d += fmt(sx(pts[i].real()));
    d += ",";
    d += fmt(sy(pts[i].imag()));
  }
  if (closed) d += "Z";
  body_ += "<path d=\"" + d + "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
           fmt(strokeWidth) + "\"/>\n";
}

void SvgWriter::marker(std::complex<double> p, double radiusPx, const std::string& fill, const std::string& stroke) {
  body_ += "<circle cx=\"" + fmt(sx(p.real())) + "\" cy=\"" + fmt(sy(p.imag())) + "\" r=\"" + fmt(radiusPx) +
           "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\"/>\n";
}

void SvgWriter::label(std::complex<double> p, const std::string& text, int sizePx) {
  body_ += "<text x=\"" + fmt(sx(p.real())) + "\" y=\"" + fmt(sy(p.imag())) + "\" font-size=\"" +
           std::to_string(sizePx) + "\" font-family=\"sans-serif\">" + escapeXml(text) + "</text>\n";
}

std::string SvgWriter::str() const {
  // "--" is not allowed inside an XML comment.
  std::string m = manifest_;
  for (size_t pos = m.find("--"); pos != std::string::npos; pos = m.find("--", pos)) m.replace(pos, 2, "- -");
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<!-- manifest: " + m + " -->\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + std::to_string(w_) + "\" height=\"" +
         std::to_string(h_) + "\" viewBox=\"0 0 " + std::to_string(w_) + " " + std::to_string(h_) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += body_;
  out += "</svg>\n";
  return out;
}

void boundingBox(const std::vector<std::vector<std::complex<double>>>& sets, double margin, double& xmin, double& ymin,
                 double& xmax, double& ymax) {
  xmin = ymin = std::numeric_limits<double>::infinity();
  xmax = ymax = -std::numeric_limits<double>::infinity();
  for (const auto& s : sets)
    for (const auto& p : s) {
      xmin = std::min(xmin, p.real());
      xmax = std::max(xmax, p.real());
      ymin = std::min(ymin, p.imag());
      ymax = std::max(ymax, p.imag());
    }
  if (!(xmin <= xmax)) {
    xmin = ymin = -1.0;
    xmax = ymax = 1.0;
  }
  double pad = margin * std::max(xmax - xmin, ymax - ymin);
  if (pad == 0.0) pad = 1.0;
  xmin -= pad;
  xmax += pad;
  ymin -= pad;
  ymax += pad;
}

}  // namespace qdx
