#include "nlc/convolution.hpp"

#include "nlc/quadrature.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <vector>

namespace nlc {

int smooth_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int k = m;
    for (int p : {2, 3, 5, 7})
      while (k % p == 0) k /= p;
    if (k == 1) return m;
  }
}

using Complex = std::complex<double>;
using SpectrumArray = Eigen::Array<Complex, Eigen::Dynamic, Eigen::Dynamic>;

struct Convolver::Impl {
  Eigen::ArrayXXd w;
  int K = 0;
  double sum = 0;
  mutable Eigen::FFT<double> row_fft, col_fft;
  mutable std::map<std::pair<int, int>, SpectrumArray> spectra;

  Impl() { row_fft.SetFlag(Eigen::FFT<double>::HalfSpectrum); }

  SpectrumArray forward(const Eigen::ArrayXXd& a) const {
    const int nx = static_cast<int>(a.rows()), ny = static_cast<int>(a.cols());
    const int hx = nx / 2 + 1;
    SpectrumArray c(hx, ny);
    std::vector<Complex> tmp(nx / 2 + 1);
    for (int j = 0; j < ny; ++j) {
      row_fft.fwd(tmp.data(), a.col(j).data(), nx);
      for (int k = 0; k < hx; ++k) c(k, j) = tmp[k];
    }
    std::vector<Complex> in(ny), out(ny);
    for (int k = 0; k < hx; ++k) {
      for (int j = 0; j < ny; ++j) in[j] = c(k, j);
      col_fft.fwd(out.data(), in.data(), ny);
      for (int j = 0; j < ny; ++j) c(k, j) = out[j];
    }
    return c;
  }

  Eigen::ArrayXXd inverse(SpectrumArray c, int nx) const {
    const int ny = static_cast<int>(c.cols());
    const int hx = static_cast<int>(c.rows());
    std::vector<Complex> in(ny), out(ny);
    for (int k = 0; k < hx; ++k) {
      for (int j = 0; j < ny; ++j) in[j] = c(k, j);
      col_fft.inv(out.data(), in.data(), ny);
      for (int j = 0; j < ny; ++j) c(k, j) = out[j];
    }
    Eigen::ArrayXXd a(nx, ny);
    std::vector<Complex> tmp(hx);
    for (int j = 0; j < ny; ++j) {
      for (int k = 0; k < hx; ++k) tmp[k] = c(k, j);
      row_fft.inv(a.col(j).data(), tmp.data(), nx);
    }
    return a;
  }

  const SpectrumArray& spectrum(int nx, int ny) const {
    auto key = std::make_pair(nx, ny);
    auto it = spectra.find(key);
    if (it != spectra.end()) return it->second;
    if (spectra.size() > 16) spectra.clear();
    Eigen::ArrayXXd padded = Eigen::ArrayXXd::Zero(nx, ny);
    for (int b = -K; b <= K; ++b)
      for (int a = -K; a <= K; ++a) padded((a + nx) % nx, (b + ny) % ny) += w(a + K, b + K);
    return spectra.emplace(key, forward(padded)).first->second;
  }

  // Full linear convolution of a compact block, evaluated on the block grown by K.
  Eigen::ArrayXXd convolve_block(const Eigen::ArrayXXd& block) const {
    const int bx = static_cast<int>(block.rows()), by = static_cast<int>(block.cols());
    const int nx = smooth_size(bx + 2 * K), ny = smooth_size(by + 2 * K);
    Eigen::ArrayXXd padded = Eigen::ArrayXXd::Zero(nx, ny);
    padded.topLeftCorner(bx, by) = block;
    SpectrumArray f = forward(padded);
    f *= spectrum(nx, ny);
    const Eigen::ArrayXXd full = inverse(std::move(f), nx);
    // Output index m in [-K, b + K) lives at m mod n.
    Eigen::ArrayXXd out(bx + 2 * K, by + 2 * K);
    for (int j = 0; j < by + 2 * K; ++j)
      for (int i = 0; i < bx + 2 * K; ++i) out(i, j) = full((i - K + nx) % nx, (j - K + ny) % ny);
    return out;
  }
};

Convolver::Convolver(Eigen::ArrayXXd stencil) : impl_(std::make_unique<Impl>()) {
  if (stencil.rows() != stencil.cols() || stencil.rows() % 2 == 0)
    throw ValidationError("stencil", "stencil must be square with odd size");
  impl_->K = static_cast<int>(stencil.rows() / 2);
  impl_->sum = stencil.sum();
  impl_->w = std::move(stencil);
}

Convolver::~Convolver() = default;
Convolver::Convolver(Convolver&&) noexcept = default;
Convolver& Convolver::operator=(Convolver&&) noexcept = default;

int Convolver::half_width() const { return impl_->K; }
double Convolver::stencil_sum() const { return impl_->sum; }
const Eigen::ArrayXXd& Convolver::stencil() const { return impl_->w; }

Eigen::ArrayXXd Convolver::apply(const Eigen::ArrayXXd& in, Extension ext) const {
  const int nx = static_cast<int>(in.rows()), ny = static_cast<int>(in.cols());
  const int K = impl_->K;
  if (ext == Extension::replicate) {
    Eigen::ArrayXXd big(nx + 2 * K, ny + 2 * K);
    for (int j = 0; j < ny + 2 * K; ++j)
      for (int i = 0; i < nx + 2 * K; ++i)
        big(i, j) = in(std::clamp(i - K, 0, nx - 1), std::clamp(j - K, 0, ny - 1));
    const Eigen::ArrayXXd full = impl_->convolve_block(big);
    return full.block(2 * K, 2 * K, nx, ny);
  }
  int i0 = nx, i1 = -1, j0 = ny, j1 = -1;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (in(i, j) != 0) i0 = std::min(i0, i), i1 = std::max(i1, i), j0 = std::min(j0, j), j1 = std::max(j1, j);
  Eigen::ArrayXXd out = Eigen::ArrayXXd::Zero(nx, ny);
  if (i1 < 0) return out;
  const int bx = i1 - i0 + 1, by = j1 - j0 + 1;
  const Eigen::ArrayXXd full = impl_->convolve_block(in.block(i0, j0, bx, by));
  // full(m + K) is the output at node i0 + m.
  const int oi0 = std::max(0, i0 - K), oi1 = std::min(nx - 1, i1 + K);
  const int oj0 = std::max(0, j0 - K), oj1 = std::min(ny - 1, j1 + K);
  out.block(oi0, oj0, oi1 - oi0 + 1, oj1 - oj0 + 1) =
      full.block(oi0 - i0 + K, oj0 - j0 + K, oi1 - oi0 + 1, oj1 - oj0 + 1);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// ∫ over the angular range of the cell [x0,x1]x[y0,y1] (x0 > 0) of M(rho_out) - M(rho_in).
double cell_integral(const RadialProfile& p, double x0, double x1, double y0, double y1) {
  const double reach = p.reach();
  std::vector<double> br{std::atan2(y0, x0), std::atan2(y0, x1), std::atan2(y1, x0), std::atan2(y1, x1)};
  const double tlo = *std::min_element(br.begin(), br.end());
  const double thi = *std::max_element(br.begin(), br.end());
  // Where the reach circle crosses the cell edges.
  for (double x : {x0, x1})
    if (std::abs(x) < reach) {
      const double y = std::sqrt(reach * reach - x * x);
      for (double yy : {y, -y})
        if (yy > y0 && yy < y1) br.push_back(std::atan2(yy, x));
    }
  for (double y : {y0, y1})
    if (std::abs(y) < reach) {
      const double x = std::sqrt(reach * reach - y * y);
      if (x > x0 && x < x1) br.push_back(std::atan2(y, x));
    }
  std::sort(br.begin(), br.end());
  const GaussRule& g = gauss_legendre(12);
  double total = 0;
  for (std::size_t k = 0; k + 1 < br.size(); ++k) {
    const double a = std::max(br[k], tlo), b = std::min(br[k + 1], thi);
    if (!(b > a)) continue;
    const double m = 0.5 * (a + b), w = 0.5 * (b - a);
    double s = 0;
    for (std::size_t q = 0; q < g.nodes.size(); ++q) {
      const double th = m + w * g.nodes[q];
      const double c = std::cos(th), sn = std::sin(th);
      const double tx0 = x0 / c, tx1 = x1 / c;
      double ty0 = -std::numeric_limits<double>::infinity(), ty1 = std::numeric_limits<double>::infinity();
      if (sn > 0) ty0 = y0 / sn, ty1 = y1 / sn;
      if (sn < 0) ty0 = y1 / sn, ty1 = y0 / sn;
      const double tin = std::max({tx0, ty0, 0.0});
      const double tout = std::min(tx1, ty1);
      if (tout > tin) s += g.weights[q] * (p.mass(tout) - p.mass(tin));
    }
    total += s * w;
  }
  return total;
}

double centre_cell_integral(const RadialProfile& p, double h) {
  // Eight copies of the triangle 0 <= theta <= pi/4 out to x = h/2.
  const double half = 0.5 * h;
  std::vector<double> br{0.0, kPi / 4};
  const double reach = p.reach();
  if (reach > half && reach < half * std::sqrt(2.0)) br.insert(br.begin() + 1, std::acos(half / reach));
  double total = 0;
  for (std::size_t k = 0; k + 1 < br.size(); ++k)
    total += integrate([&](double th) { return p.mass(half / std::cos(th)); }, br[k], br[k + 1], 16);
  return 8 * total;
}

}  // namespace

Eigen::ArrayXXd kernel_stencil(const RadialProfile& p, double h, int K) {
  if (p.dimension() != 2) throw ValidationError("n", "grid stencils are planar");
  Eigen::ArrayXXd w = Eigen::ArrayXXd::Zero(2 * K + 1, 2 * K + 1);
  const double reach = p.reach();
  const GaussRule& g4 = gauss_legendre(4);
  for (int i = 0; i <= K; ++i)
    for (int j = 0; j <= i; ++j) {
      double v;
      const double x0 = (i - 0.5) * h, x1 = (i + 0.5) * h, y0 = (j - 0.5) * h, y1 = (j + 0.5) * h;
      const double dmin = std::hypot(std::max(x0, 0.0), std::max(y0, 0.0));
      const double dmax = std::hypot(x1, y1);
      if (dmin >= reach) continue;
      if (i == 0) {
        v = centre_cell_integral(p, h);
      } else if (i <= 64 || dmax > reach) {
        v = cell_integral(p, x0, x1, y0, y1);
      } else {
        v = 0;
        for (std::size_t a = 0; a < 4; ++a)
          for (std::size_t b = 0; b < 4; ++b) {
            const double x = i * h + 0.5 * h * g4.nodes[a], y = j * h + 0.5 * h * g4.nodes[b];
            v += g4.weights[a] * g4.weights[b] * p.value(std::hypot(x, y));
          }
        v *= 0.25 * h * h;
      }
      for (int sx : {-1, 1})
        for (int sy : {-1, 1}) {
          w(K + sx * i, K + sy * j) = v;
          w(K + sx * j, K + sy * i) = v;
        }
    }
  return w;
}

Eigen::ArrayXXd heat_stencil(double t, double h, double sigmas) {
  if (!(t > 0) || !(h > 0)) throw ValidationError("dt", "heat stencil needs t > 0 and h > 0");
  const double sigma = std::sqrt(2 * t);
  const int K = static_cast<int>(std::ceil(sigmas * sigma / h));
  Eigen::ArrayXd w1(2 * K + 1);
  const double s = 1 / (2 * std::sqrt(t));
  for (int a = -K; a <= K; ++a) w1(a + K) = 0.5 * (std::erf((a + 0.5) * h * s) - std::erf((a - 0.5) * h * s));
  w1 /= w1.sum();
  return (w1.matrix() * w1.matrix().transpose()).array();
}

}  // namespace nlc
