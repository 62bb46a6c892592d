#pragma once

#include <memory>
#include <optional>
#include <string>

#include "dgopt/energy.hpp"
#include "dgopt/image.hpp"

namespace dgopt {

enum class RegKind {
  elastica,       // (a + b*kappa^2) * sqrt(|grad u|^2 + eps)
  tv_eps,         // a * sqrt(|grad u|^2 + eps)
  tv_curvature,   // a * |grad u| + b * kappa^2 * sqrt(|grad u|^2 + eps)
};

enum class FidKind { l2sq, l1, l1_smoothed };

struct ObjectiveSpec {
  RegKind reg = RegKind::elastica;
  double a = 0.9;
  double b = 0.9;
  double eps = 1e-4;
  FidKind fid = FidKind::l2sq;
  double fid_eps = 1e-12;      // smoothing of the l1 fidelity
  bool area_weights = false;   // multiply both terms by h^2
};

// V(u) = fidelity(u, g over known pixels) + regularizer(u).
//
// Staggered-stencil discretization with backward differences scaled by 1/h
// and replicate (clamp-to-edge) boundary reads. Curvature divides flux
// differences by four-point-averaged denominators, so each regularizer term
// at (i,j) reads the 3x3 box around it; updating one pixel touches the 3x3
// block of terms around it (dependency radius 1) whose union of reads is the
// 5x5 window (read radius 2). With b = 0 only the gradient magnitude term
// remains: 3 affected terms, 3x3 read window.
class Objective : public EnergyModel {
 public:
  Objective(ObjectiveSpec spec, ImageGrid data,
            std::optional<Mask> mask = std::nullopt);

  double eval(const ImageGrid& u) const override;
  void coord_begin(const ImageGrid& u, int i, int j,
                   CoordScratch& s) const override;
  double coord_delta(const CoordScratch& s, double beta) const override;
  ImageGrid gradient(const ImageGrid& u) const override;
  bool smooth() const override;
  int dependency_radius() const override;
  int read_radius() const override;

  // Regularizer-only evaluation (diagnostics and tests).
  double reg_eval(const ImageGrid& u) const;
  double fid_eval(const ImageGrid& u) const;

  const ObjectiveSpec& spec() const { return spec_; }
  const ImageGrid& data() const { return data_; }
  const std::optional<Mask>& mask() const { return mask_; }

 private:
  bool curvature_on() const {
    return spec_.b != 0.0 && spec_.reg != RegKind::tv_eps;
  }

  ObjectiveSpec spec_;
  ImageGrid data_;
  std::optional<Mask> mask_;
};

std::string to_string(RegKind k);
std::string to_string(FidKind k);

}  // namespace dgopt
