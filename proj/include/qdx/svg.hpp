#pragma once

#include <complex>
#include <string>
#include <vector>

namespace qdx {

// Minimal SVG 1.1 writer with fixed-precision coordinates so that output is
// byte-identical across runs. World y points up; it is flipped on output.
class SvgWriter {
 public:
  SvgWriter(double xmin, double ymin, double xmax, double ymax, int widthPx, const std::string& manifest);

  void beginGroup(const std::string& id);
  void endGroup();
  void polyline(const std::vector<std::complex<double>>& pts, bool closed, const std::string& stroke,
                double strokeWidth, const std::string& fill = "none");
  void marker(std::complex<double> p, double radiusPx, const std::string& fill, const std::string& stroke = "none");
  void label(std::complex<double> p, const std::string& text, int sizePx = 12);

  std::string str() const;

 private:
  double sx(double x) const;
  double sy(double y) const;
  double xmin_, ymin_, xmax_, ymax_, k_;
  int w_, h_;
  std::string manifest_;
  std::string body_;
};

// Bounding box of a set of point lists, padded by a relative margin.
void boundingBox(const std::vector<std::vector<std::complex<double>>>& sets, double margin, double& xmin, double& ymin,
                 double& xmax, double& ymax);

}  // namespace qdx
