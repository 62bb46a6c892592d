#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dgopt {

/// Grayscale image on the unit square, values nominally in [0, 1].
/// Pixel (i, j): i = column (x direction), j = row (y direction), 0-based.
/// The pixel center sits at ((i + 1/2) h, (j + 1/2) h) with h = 1/nx.
/// Row-major storage.
struct ImageGrid {
  int nx = 0, ny = 0;
  double h = 0.0;
  std::vector<double> v;

  ImageGrid() = default;
  ImageGrid(int nx_, int ny_, double fill = 0.0)
      : nx(nx_), ny(ny_), h(nx_ > 0 ? 1.0 / nx_ : 0.0),
        v(size_t(nx_) * size_t(ny_), fill) {}

  double& at(int i, int j) { return v[size_t(j) * nx + i]; }
  double at(int i, int j) const { return v[size_t(j) * nx + i]; }

  /// Read with replicate boundary: out-of-range indices clamp to the edge.
  double atc(int i, int j) const {
    if (i < 0) i = 0;
    if (i >= nx) i = nx - 1;
    if (j < 0) j = 0;
    if (j >= ny) j = ny - 1;
    return v[size_t(j) * nx + i];
  }

  size_t size() const { return v.size(); }
  bool same_dims(const ImageGrid& o) const { return nx == o.nx && ny == o.ny; }
};

/// Known/missing map for inpainting. known[idx] != 0 means the pixel carries
/// a fidelity term.
struct Mask {
  int nx = 0, ny = 0;
  std::vector<uint8_t> known;

  Mask() = default;
  Mask(int nx_, int ny_, uint8_t fill = 1)
      : nx(nx_), ny(ny_), known(size_t(nx_) * size_t(ny_), fill) {}

  bool at(int i, int j) const { return known[size_t(j) * nx + i] != 0; }
  void set(int i, int j, bool k) { known[size_t(j) * nx + i] = k ? 1 : 0; }
  int missing_count() const;
};

enum class ImageIoCode {
  missing_file,
  malformed_header,
  unsupported_maxval,
  malformed_payload,
  write_failure,
};

struct ImageIoError : std::runtime_error {
  ImageIoCode code;
  ImageIoError(ImageIoCode c, const std::string& what)
      : std::runtime_error(what), code(c) {}
};

/// Binary 8-bit PGM (P5, maxval 255). Bytes scale to [0, 1] by /255.
ImageGrid load_pgm(const std::string& path);

/// Writes P5 with maxval 255; values clamped to [0, 1], round half up.
void save_pgm(const ImageGrid& img, const std::string& path);

/// Mask PGM convention: 0 = missing, 255 = known. Other bytes are rejected.
Mask load_mask_pgm(const std::string& path);
void save_mask_pgm(const Mask& m, const std::string& path);

struct GaussianNoise {
  double sigma = 0.2;
};
struct ImpulseNoise {
  double fraction = 0.25;
};

/// Adds i.i.d. N(0, sigma^2) per pixel. Deterministic for a given seed.
ImageGrid corrupt(const ImageGrid& img, const GaussianNoise& n, uint64_t seed);

/// Sets round(fraction * n) distinct pixels (chosen without replacement) to
/// 0 or 1, each with probability 1/2. Deterministic for a given seed.
ImageGrid corrupt(const ImageGrid& img, const ImpulseNoise& n, uint64_t seed);

/// Exactly round(fraction * n) pixels missing, chosen without replacement.
Mask make_mask_random_loss(int nx, int ny, double fraction, uint64_t seed);

/// Pixels whose cell center lies in [1/4, 3/4]^2 are missing.
Mask make_mask_center_square(int nx, int ny);

/// 10 log10(1 / MSE) for dynamic range 1; +inf when the images are equal.
double psnr(const ImageGrid& a, const ImageGrid& b);

/// Mean local SSIM, 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
/// dynamic range 1. Requires dims >= 11.
double ssim(const ImageGrid& a, const ImageGrid& b);

/// Deterministic synthetic test image (a smooth ramp with a disk, a box and
/// a stripe), values in [0, 1]. Used when no input image is supplied.
ImageGrid make_phantom(int nx, int ny);

}  // namespace dgopt
