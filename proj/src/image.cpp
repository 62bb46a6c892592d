#include "dgopt/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "dgopt/rng.hpp"

namespace dgopt {

int Mask::missing_count() const {
  int n = 0;
  for (uint8_t k : known)
    if (!k) ++n;
  return n;
}

namespace {

// Pulls the next PGM header token, skipping whitespace and '#' comments.
bool next_token(const std::string& buf, size_t& pos, std::string& tok) {
  while (pos < buf.size()) {
    char c = buf[pos];
    if (c == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  size_t start = pos;
  while (pos < buf.size() &&
         !std::isspace(static_cast<unsigned char>(buf[pos])) &&
         buf[pos] != '#')
    ++pos;
  tok = buf.substr(start, pos - start);
  return !tok.empty();
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw ImageIoError(ImageIoCode::missing_file, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct PgmRaw {
  int w = 0, h = 0;
  const uint8_t* bytes = nullptr;
};

PgmRaw parse_pgm(const std::string& buf, const std::string& path) {
  size_t pos = 0;
  std::string tok;
  if (!next_token(buf, pos, tok) || tok != "P5")
    throw ImageIoError(ImageIoCode::malformed_header,
                       path + ": not a binary PGM (P5)");
  long w = 0, h = 0, maxval = 0;
  auto read_int = [&](long& out) {
    if (!next_token(buf, pos, tok))
      throw ImageIoError(ImageIoCode::malformed_header,
                         path + ": truncated header");
    try {
      size_t used = 0;
      out = std::stol(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ImageIoError(ImageIoCode::malformed_header,
                         path + ": bad header field '" + tok + "'");
    }
  };
  read_int(w);
  read_int(h);
  read_int(maxval);
  if (w <= 0 || h <= 0)
    throw ImageIoError(ImageIoCode::malformed_header,
                       path + ": non-positive dimensions");
  if (maxval != 255)
    throw ImageIoError(ImageIoCode::unsupported_maxval,
                       path + ": maxval " + std::to_string(maxval) +
                           " unsupported (need 255)");
  if (pos >= buf.size() ||
      !std::isspace(static_cast<unsigned char>(buf[pos])))
    throw ImageIoError(ImageIoCode::malformed_header,
                       path + ": missing raster separator");
  ++pos;  // single whitespace byte before the raster
  if (buf.size() - pos < size_t(w) * size_t(h))
    throw ImageIoError(ImageIoCode::malformed_payload,
                       path + ": raster shorter than " + std::to_string(w) +
                           "x" + std::to_string(h));
  PgmRaw r;
  r.w = int(w);
  r.h = int(h);
  r.bytes = reinterpret_cast<const uint8_t*>(buf.data() + pos);
  return r;
}

}  // namespace

ImageGrid load_pgm(const std::string& path) {
  std::string buf = read_file(path);
  PgmRaw r = parse_pgm(buf, path);
  ImageGrid img(r.w, r.h);
  for (size_t k = 0; k < img.size(); ++k) img.v[k] = r.bytes[k] / 255.0;
  return img;
}

void save_pgm(const ImageGrid& img, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw ImageIoError(ImageIoCode::write_failure, "cannot write " + path);
  f << "P5\n" << img.nx << " " << img.ny << "\n255\n";
  std::vector<uint8_t> bytes(img.size());
  for (size_t k = 0; k < img.size(); ++k) {
    double x = std::clamp(img.v[k], 0.0, 1.0);
    bytes[k] = uint8_t(std::floor(x * 255.0 + 0.5));  // round half up
  }
  f.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  if (!f) throw ImageIoError(ImageIoCode::write_failure, "short write " + path);
}

Mask load_mask_pgm(const std::string& path) {
  std::string buf = read_file(path);
  PgmRaw r = parse_pgm(buf, path);
  Mask m(r.w, r.h);
  for (size_t k = 0; k < m.known.size(); ++k) {
    uint8_t b = r.bytes[k];
    if (b == 0)
      m.known[k] = 0;
    else if (b == 255)
      m.known[k] = 1;
    else
      throw ImageIoError(ImageIoCode::malformed_payload,
                         path + ": mask byte " + std::to_string(b) +
                             " (want 0 or 255)");
  }
  return m;
}

void save_mask_pgm(const Mask& m, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw ImageIoError(ImageIoCode::write_failure, "cannot write " + path);
  f << "P5\n" << m.nx << " " << m.ny << "\n255\n";
  std::vector<uint8_t> bytes(m.known.size());
  for (size_t k = 0; k < bytes.size(); ++k) bytes[k] = m.known[k] ? 255 : 0;
  f.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  if (!f) throw ImageIoError(ImageIoCode::write_failure, "short write " + path);
}

ImageGrid corrupt(const ImageGrid& img, const GaussianNoise& n, uint64_t seed) {
  Rng rng(seed);
  ImageGrid out = img;
  for (double& x : out.v) x += n.sigma * rng.normal();
  return out;
}

ImageGrid corrupt(const ImageGrid& img, const ImpulseNoise& n, uint64_t seed) {
  if (n.fraction < 0.0 || n.fraction > 1.0)
    throw std::invalid_argument("impulse fraction outside [0,1]");
  Rng rng(seed);
  ImageGrid out = img;
  size_t total = img.size();
  size_t count = size_t(std::llround(n.fraction * double(total)));
  // Partial Fisher-Yates: the first `count` entries are a uniform sample
  // without replacement.
  std::vector<uint32_t> idx(total);
  std::iota(idx.begin(), idx.end(), 0u);
  for (size_t k = 0; k < count; ++k) {
    size_t r = k + size_t(rng.below(total - k));
    std::swap(idx[k], idx[r]);
    out.v[idx[k]] = rng.coin() ? 1.0 : 0.0;
  }
  return out;
}

Mask make_mask_random_loss(int nx, int ny, double fraction, uint64_t seed) {
  if (fraction < 0.0 || fraction >= 1.0)
    throw std::invalid_argument("loss fraction outside [0,1)");
  Rng rng(seed);
  Mask m(nx, ny, 1);
  size_t total = m.known.size();
  size_t count = size_t(std::llround(fraction * double(total)));
  std::vector<uint32_t> idx(total);
  std::iota(idx.begin(), idx.end(), 0u);
  for (size_t k = 0; k < count; ++k) {
    size_t r = k + size_t(rng.below(total - k));
    std::swap(idx[k], idx[r]);
    m.known[idx[k]] = 0;
  }
  return m;
}

Mask make_mask_center_square(int nx, int ny) {
  Mask m(nx, ny, 1);
  double h = 1.0 / nx;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      double cx = (i + 0.5) * h;
      double cy = (j + 0.5) * h;
      if (cx >= 0.25 && cx <= 0.75 && cy >= 0.25 && cy <= 0.75)
        m.set(i, j, false);
    }
  return m;
}

double psnr(const ImageGrid& a, const ImageGrid& b) {
  if (!a.same_dims(b)) throw std::invalid_argument("psnr: dims differ");
  double mse = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    double d = a.v[k] - b.v[k];
    mse += d * d;
  }
  mse /= double(a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const ImageGrid& a, const ImageGrid& b) {
  if (!a.same_dims(b)) throw std::invalid_argument("ssim: dims differ");
  constexpr int W = 11;
  if (a.nx < W || a.ny < W)
    throw std::invalid_argument("ssim: image smaller than 11x11 window");
  constexpr double K1 = 0.01, K2 = 0.03, L = 1.0;
  const double C1 = (K1 * L) * (K1 * L);
  const double C2 = (K2 * L) * (K2 * L);

  double w[W][W];
  {
    const double sigma = 1.5;
    double sum = 0.0;
    for (int y = 0; y < W; ++y)
      for (int x = 0; x < W; ++x) {
        double dx = x - (W - 1) / 2.0, dy = y - (W - 1) / 2.0;
        w[y][x] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
        sum += w[y][x];
      }
    for (int y = 0; y < W; ++y)
      for (int x = 0; x < W; ++x) w[y][x] /= sum;
  }

  double acc = 0.0;
  int wins = 0;
  for (int j0 = 0; j0 + W <= a.ny; ++j0)
    for (int i0 = 0; i0 + W <= a.nx; ++i0) {
      double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
      for (int y = 0; y < W; ++y)
        for (int x = 0; x < W; ++x) {
          double va = a.at(i0 + x, j0 + y);
          double vb = b.at(i0 + x, j0 + y);
          double ww = w[y][x];
          mx += ww * va;
          my += ww * vb;
          xx += ww * va * va;
          yy += ww * vb * vb;
          xy += ww * va * vb;
        }
      double sx = xx - mx * mx;
      double sy = yy - my * my;
      double sxy = xy - mx * my;
      double num = (2 * mx * my + C1) * (2 * sxy + C2);
      double den = (mx * mx + my * my + C1) * (sx + sy + C2);
      acc += num / den;
      ++wins;
    }
  return acc / wins;
}

ImageGrid make_phantom(int nx, int ny) {
  ImageGrid img(nx, ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      double x = (i + 0.5) / nx;
      double y = (j + 0.5) / ny;
      double v = 0.25 + 0.35 * x;  // background ramp
      double dx = x - 0.34, dy = y - 0.38;
      if (dx * dx + dy * dy < 0.030) v = 0.85;  // disk
      if (x > 0.55 && x < 0.82 && y > 0.55 && y < 0.78) v = 0.12;  // box
      if (std::abs(x - y - 0.28) < 0.035) v = 0.65;  // diagonal stripe
      img.at(i, j) = std::clamp(v, 0.0, 1.0);
    }
  return img;
}

}  // namespace dgopt
