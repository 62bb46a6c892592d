#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>

#include "dgopt/image.hpp"

namespace dgopt {

// Per-coordinate work buffer filled by coord_begin. `win` holds the clamped
// values of the read window centered on (i,j); `alias` marks window slots
// whose clamped source is (i,j) itself (at the image border several slots
// replicate the center pixel, and all of them move together with beta).
struct CoordScratch {
  std::array<double, 25> win{};
  uint32_t alias = 0;
  double base = 0.0;  // affected-terms energy at beta = 0
  double g = 0.0;     // fidelity datum at (i,j) (model-specific reuse allowed)
  double aux = 0.0;
  bool known = false;
  int i = 0;
  int j = 0;
};

// An energy V(u) on an image grid, exposing full evaluation, cheap local
// differences V(u + beta*e_ij) - V(u), and (when smooth) an analytic
// gradient.
//
// dependency_radius: updating pixel p changes only energy terms within this
// Chebyshev distance of p (the decoupling radius used by block partitions).
// read_radius: the window reach of coord_begin — how far the *evaluation* of
// the affected terms reads. Stencils with nested averages read farther than
// the terms they touch extend, so read_radius >= dependency_radius; parallel
// in-place sweeps must respect read_radius, not just dependency_radius.
class EnergyModel {
 public:
  virtual ~EnergyModel() = default;

  virtual double eval(const ImageGrid& u) const = 0;
  virtual void coord_begin(const ImageGrid& u, int i, int j,
                           CoordScratch& s) const = 0;
  virtual double coord_delta(const CoordScratch& s, double beta) const = 0;
  virtual ImageGrid gradient(const ImageGrid& u) const = 0;
  virtual bool smooth() const = 0;
  virtual int dependency_radius() const = 0;
  virtual int read_radius() const = 0;

  double local_diff(const ImageGrid& u, int i, int j, double beta) const {
    CoordScratch s;
    coord_begin(u, i, j, s);
    return coord_delta(s, beta);
  }
};

// V(u) = 1/2 sum lambda_ij (u_ij - c_ij)^2. Pointwise, so both radii are 0;
// used for closed-form solver checks and as the L-smooth model problem.
class SeparableQuadratic : public EnergyModel {
 public:
  SeparableQuadratic(ImageGrid lambda, ImageGrid center)
      : lambda_(std::move(lambda)), center_(std::move(center)) {
    if (!lambda_.same_dims(center_))
      throw std::invalid_argument("quadratic: lambda/center dims differ");
  }
  SeparableQuadratic(int nx, int ny, double lambda)
      : SeparableQuadratic(ImageGrid(nx, ny, lambda), ImageGrid(nx, ny)) {}

  double eval(const ImageGrid& u) const override {
    if (!u.same_dims(lambda_))
      throw std::invalid_argument("quadratic: dims differ");
    double s = 0.0;
    for (size_t k = 0; k < u.size(); ++k) {
      double d = u.v[k] - center_.v[k];
      s += 0.5 * lambda_.v[k] * d * d;
    }
    return s;
  }

  void coord_begin(const ImageGrid& u, int i, int j,
                   CoordScratch& s) const override {
    s.i = i;
    s.j = j;
    s.win[0] = u.at(i, j);
    s.alias = 1u;
    s.g = center_.at(i, j);
    s.aux = lambda_.at(i, j);
    double d = s.win[0] - s.g;
    s.base = 0.5 * s.aux * d * d;
  }

  double coord_delta(const CoordScratch& s, double beta) const override {
    double d = s.win[0] + beta - s.g;
    return 0.5 * s.aux * d * d - s.base;
  }

  ImageGrid gradient(const ImageGrid& u) const override {
    ImageGrid g(u.nx, u.ny);
    for (size_t k = 0; k < u.size(); ++k)
      g.v[k] = lambda_.v[k] * (u.v[k] - center_.v[k]);
    return g;
  }

  bool smooth() const override { return true; }
  int dependency_radius() const override { return 0; }
  int read_radius() const override { return 0; }

  double max_lambda() const {
    return *std::max_element(lambda_.v.begin(), lambda_.v.end());
  }

 private:
  ImageGrid lambda_, center_;
};

inline double dot(const ImageGrid& a, const ImageGrid& b) {
  double s = 0.0;
  for (size_t k = 0; k < a.size(); ++k) s += a.v[k] * b.v[k];
  return s;
}

inline double norm_sq(const ImageGrid& a) { return dot(a, a); }

}  // namespace dgopt
