#include "dgopt/objective.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace dgopt {

namespace {

// Forward-mode dual numbers over N seeds; enough operator surface for the
// stencil expressions below.
template <int N>
struct Dual {
  double v = 0.0;
  std::array<double, N> d{};
};

template <int N>
Dual<N> operator+(Dual<N> a, const Dual<N>& b) {
  a.v += b.v;
  for (int k = 0; k < N; ++k) a.d[k] += b.d[k];
  return a;
}

template <int N>
Dual<N> operator-(Dual<N> a, const Dual<N>& b) {
  a.v -= b.v;
  for (int k = 0; k < N; ++k) a.d[k] -= b.d[k];
  return a;
}

template <int N>
Dual<N> operator*(Dual<N> a, double c) {
  a.v *= c;
  for (int k = 0; k < N; ++k) a.d[k] *= c;
  return a;
}

template <int N>
Dual<N> operator+(Dual<N> a, double c) {
  a.v += c;
  return a;
}

template <int N>
Dual<N> operator*(const Dual<N>& a, const Dual<N>& b) {
  Dual<N> r;
  r.v = a.v * b.v;
  for (int k = 0; k < N; ++k) r.d[k] = a.d[k] * b.v + a.v * b.d[k];
  return r;
}

template <int N>
Dual<N> operator/(const Dual<N>& a, const Dual<N>& b) {
  Dual<N> r;
  r.v = a.v / b.v;
  double inv2 = 1.0 / (b.v * b.v);
  for (int k = 0; k < N; ++k) r.d[k] = (a.d[k] * b.v - a.v * b.d[k]) * inv2;
  return r;
}

template <int N>
Dual<N> sqrt(const Dual<N>& a) {
  Dual<N> r;
  r.v = std::sqrt(a.v);
  double f = 0.5 / r.v;
  for (int k = 0; k < N; ++k) r.d[k] = f * a.d[k];
  return r;
}

// One regularizer term at grid position (i,j). `at(ii,jj)` supplies u values
// for raw (unclamped) indices within the 3x3 box around (i,j); boundary
// clamping is the accessor's business. Scalar type T is double or Dual.
template <typename T, typename At>
T reg_term(const At& at, int i, int j, double h, const ObjectiveSpec& sp) {
  using std::sqrt;
  const double ih = 1.0 / h;
  auto dxm = [&](int ii, int jj) { return (at(ii, jj) - at(ii - 1, jj)) * ih; };
  auto dym = [&](int ii, int jj) { return (at(ii, jj) - at(ii, jj - 1)) * ih; };

  T gx = dxm(i, j);
  T gy = dym(i, j);
  T g2 = gx * gx + gy * gy;

  const bool curv = sp.b != 0.0 && sp.reg != RegKind::tv_eps;
  T kap2{};
  if (curv) {
    auto dxs = [&](int ii, int jj) {
      return (dxm(ii + 1, jj) + dxm(ii, jj) + dxm(ii + 1, jj - 1) +
              dxm(ii, jj - 1)) *
             0.25;
    };
    auto dys = [&](int ii, int jj) {
      return (dym(ii, jj + 1) + dym(ii, jj) + dym(ii - 1, jj) +
              dym(ii - 1, jj + 1)) *
             0.25;
    };
    auto wx = [&](int ii, int jj) {  // face weight at (i-1/2, j)
      T dx = dxm(ii, jj);
      T dy = dys(ii, jj);
      return sqrt(dx * dx + dy * dy + sp.eps);
    };
    auto wy = [&](int ii, int jj) {  // face weight at (i, j-1/2)
      T dx = dxs(ii, jj);
      T dy = dym(ii, jj);
      return sqrt(dx * dx + dy * dy + sp.eps);
    };
    T fx = dxm(i + 1, j) / wx(i + 1, j) - gx / wx(i, j);
    T fy = dym(i, j + 1) / wy(i, j + 1) - gy / wy(i, j);
    T kap = (fx + fy) * ih;
    kap2 = kap * kap;
  }

  T G = sqrt(g2 + sp.eps);
  switch (sp.reg) {
    case RegKind::tv_eps:
      return G * sp.a;
    case RegKind::elastica:
      return curv ? (kap2 * sp.b + sp.a) * G : G * sp.a;
    case RegKind::tv_curvature: {
      T out = sqrt(g2) * sp.a;
      if (curv) out = out + kap2 * sp.b * G;
      return out;
    }
  }
  return T{};  // unreachable
}

double fid_term(double u, double g, FidKind kind, double fid_eps) {
  double d = u - g;
  switch (kind) {
    case FidKind::l2sq:
      return d * d;
    case FidKind::l1:
      return std::abs(d);
    case FidKind::l1_smoothed:
      return std::sqrt(d * d + fid_eps);
  }
  return 0.0;  // unreachable
}

}  // namespace

Objective::Objective(ObjectiveSpec spec, ImageGrid data,
                     std::optional<Mask> mask)
    : spec_(spec), data_(std::move(data)), mask_(std::move(mask)) {
  if (!(spec_.a > 0.0)) throw std::invalid_argument("objective: need a > 0");
  if (spec_.b < 0.0) throw std::invalid_argument("objective: need b >= 0");
  if (!(spec_.eps > 0.0))
    throw std::invalid_argument("objective: need eps > 0");
  if (spec_.fid == FidKind::l1_smoothed && !(spec_.fid_eps > 0.0))
    throw std::invalid_argument("objective: need fid_eps > 0");
  if (data_.nx <= 0 || data_.ny <= 0)
    throw std::invalid_argument("objective: empty data grid");
  if (mask_) {
    if (mask_->nx != data_.nx || mask_->ny != data_.ny)
      throw std::invalid_argument("objective: mask dims differ from data");
    bool any = false;
    for (uint8_t k : mask_->known) any = any || k;
    if (!any) throw std::invalid_argument("objective: mask knows no pixel");
  }
}

double Objective::reg_eval(const ImageGrid& u) const {
  if (!u.same_dims(data_))
    throw std::invalid_argument("objective: dimension mismatch");
  auto at = [&](int i, int j) { return u.atc(i, j); };
  double s = 0.0;
  for (int i = 0; i < u.nx; ++i)
    for (int j = 0; j < u.ny; ++j) s += reg_term<double>(at, i, j, u.h, spec_);
  return spec_.area_weights ? s * u.h * u.h : s;
}

double Objective::fid_eval(const ImageGrid& u) const {
  if (!u.same_dims(data_))
    throw std::invalid_argument("objective: dimension mismatch");
  double s = 0.0;
  for (int i = 0; i < u.nx; ++i)
    for (int j = 0; j < u.ny; ++j) {
      if (mask_ && !mask_->at(i, j)) continue;
      s += fid_term(u.at(i, j), data_.at(i, j), spec_.fid, spec_.fid_eps);
    }
  return spec_.area_weights ? s * u.h * u.h : s;
}

double Objective::eval(const ImageGrid& u) const {
  return fid_eval(u) + reg_eval(u);
}

bool Objective::smooth() const {
  return spec_.reg != RegKind::tv_curvature && spec_.fid != FidKind::l1;
}

int Objective::dependency_radius() const { return 1; }

int Objective::read_radius() const { return curvature_on() ? 2 : 1; }

void Objective::coord_begin(const ImageGrid& u, int i, int j,
                            CoordScratch& s) const {
  if (i < 0 || i >= u.nx || j < 0 || j >= u.ny)
    throw std::out_of_range("objective: coordinate index out of range");
  if (!u.same_dims(data_))
    throw std::invalid_argument("objective: dimension mismatch");
  const int R = read_radius();
  s.i = i;
  s.j = j;
  s.alias = 0;
  int k = 0;
  for (int dj = -R; dj <= R; ++dj)
    for (int di = -R; di <= R; ++di, ++k) {
      int ci = std::clamp(i + di, 0, u.nx - 1);
      int cj = std::clamp(j + dj, 0, u.ny - 1);
      s.win[size_t(k)] = u.at(ci, cj);
      if (ci == i && cj == j) s.alias |= (1u << k);
    }
  s.known = !mask_ || mask_->at(i, j);
  s.g = s.known ? data_.at(i, j) : 0.0;
  s.aux = u.h;
  s.base = 0.0;
  s.base = coord_delta(s, 0.0);  // affected-terms energy at beta = 0
}

double Objective::coord_delta(const CoordScratch& s, double beta) const {
  const int R = read_radius();
  const int W = 2 * R + 1;
  const double h = s.aux;

  std::array<double, 25> buf;
  std::copy_n(s.win.begin(), size_t(W * W), buf.begin());
  if (beta != 0.0) {
    uint32_t m = s.alias;
    while (m) {
      buf[size_t(std::countr_zero(m))] += beta;
      m &= m - 1;
    }
  }
  auto at = [&](int ii, int jj) {
    return buf[size_t((jj - s.j + R) * W + (ii - s.i + R))];
  };

  double sum = 0.0;
  const int nx = data_.nx, ny = data_.ny;
  if (curvature_on()) {
    for (int t = -1; t <= 1; ++t)
      for (int q = -1; q <= 1; ++q) {
        int mi = s.i + q, mj = s.j + t;
        if (mi < 0 || mi >= nx || mj < 0 || mj >= ny) continue;
        sum += reg_term<double>(at, mi, mj, h, spec_);
      }
  } else {
    constexpr int off[3][2] = {{0, 0}, {1, 0}, {0, 1}};
    for (auto& o : off) {
      int mi = s.i + o[0], mj = s.j + o[1];
      if (mi < 0 || mi >= nx || mj < 0 || mj >= ny) continue;
      sum += reg_term<double>(at, mi, mj, h, spec_);
    }
  }
  if (s.known)
    sum += fid_term(at(s.i, s.j), s.g, spec_.fid, spec_.fid_eps);
  if (spec_.area_weights) sum *= h * h;
  return sum - s.base;
}

ImageGrid Objective::gradient(const ImageGrid& u) const {
  if (!smooth())
    throw std::domain_error("gradient undefined for non-smooth objective");
  if (!u.same_dims(data_))
    throw std::invalid_argument("objective: dimension mismatch");
  using D9 = Dual<9>;
  ImageGrid grad(u.nx, u.ny);
  const double wfac = spec_.area_weights ? u.h * u.h : 1.0;

  for (int i = 0; i < u.nx; ++i)
    for (int j = 0; j < u.ny; ++j) {
      // Seed one dual slot per raw read of this term's 3x3 box; slots that
      // clamp onto the same pixel scatter their partials into it additively.
      auto at = [&](int ii, int jj) {
        D9 x;
        x.v = u.atc(ii, jj);
        x.d[size_t((jj - j + 1) * 3 + (ii - i + 1))] = 1.0;
        return x;
      };
      D9 t = reg_term<D9>(at, i, j, u.h, spec_);
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          double p = t.d[size_t((dj + 1) * 3 + (di + 1))];
          if (p == 0.0) continue;
          int ci = std::clamp(i + di, 0, u.nx - 1);
          int cj = std::clamp(j + dj, 0, u.ny - 1);
          grad.at(ci, cj) += wfac * p;
        }
    }

  for (int i = 0; i < u.nx; ++i)
    for (int j = 0; j < u.ny; ++j) {
      if (mask_ && !mask_->at(i, j)) continue;
      double d = u.at(i, j) - data_.at(i, j);
      double p = 0.0;
      if (spec_.fid == FidKind::l2sq)
        p = 2.0 * d;
      else  // l1_smoothed; plain l1 is gated out by smooth()
        p = d / std::sqrt(d * d + spec_.fid_eps);
      grad.at(i, j) += wfac * p;
    }
  return grad;
}

std::string to_string(RegKind k) {
  switch (k) {
    case RegKind::elastica:
      return "elastica";
    case RegKind::tv_eps:
      return "tv_eps";
    case RegKind::tv_curvature:
      return "tv_curvature";
  }
  return "?";
}

std::string to_string(FidKind k) {
  switch (k) {
    case FidKind::l2sq:
      return "l2sq";
    case FidKind::l1:
      return "l1";
    case FidKind::l1_smoothed:
      return "l1_smoothed";
  }
  return "?";
}

}  // namespace dgopt
