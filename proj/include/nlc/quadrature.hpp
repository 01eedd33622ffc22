#pragma once

#include <functional>
#include <vector>

namespace nlc {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Cached; the returned reference stays valid for the life of the program.
const GaussRule& gauss_legendre(int n);

template <class F>
double integrate(F&& f, double a, double b, int order = 20) {
  const GaussRule& g = gauss_legendre(order);
  const double m = 0.5 * (a + b), w = 0.5 * (b - a);
  double s = 0;
  for (std::size_t k = 0; k < g.nodes.size(); ++k) s += g.weights[k] * f(m + w * g.nodes[k]);
  return s * w;
}

template <class F>
double integrate_panels(F&& f, double a, double b, int panels, int order = 20) {
  double s = 0;
  const double step = (b - a) / panels;
  for (int p = 0; p < panels; ++p) s += integrate(f, a + p * step, a + (p + 1) * step, order);
  return s;
}

// Geometric node set on [lo, hi] with roughly `per_decade` nodes per factor of ten,
// with the given breakpoints merged in.
std::vector<double> geometric_nodes(double lo, double hi, int per_decade,
                                    const std::vector<double>& breaks = {});
std::vector<double> uniform_nodes(double lo, double hi, int count);

// Piecewise cubic Hermite table of F(x) = head + ∫_{x0}^x f, where f is the exact slope.
// Node values come from panel-wise Gauss-Legendre quadrature; a tail table ∫_x^{x_end} f
// is kept separately so that small tails do not suffer cancellation.
class CumulativeTable {
 public:
  CumulativeTable() = default;
  CumulativeTable(const std::function<double(double)>& f, std::vector<double> nodes, int order = 20);

  double lo() const { return x_.front(); }
  double hi() const { return x_.back(); }
  double total() const { return prefix_.back(); }
  // ∫_{lo}^{x} f for x in [lo, hi] (clamped).
  double prefix(double x) const;
  // ∫_{x}^{hi} f for x in [lo, hi] (clamped).
  double tail(double x) const;
  bool empty() const { return x_.empty(); }

 private:
  double interp(const std::vector<double>& v, double x, double sign) const;

  std::vector<double> x_, prefix_, tail_, slope_left_, slope_right_;
};

}  // namespace nlc
