#include "nlc/quadrature.hpp"

#include "nlc/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace nlc {

namespace {

GaussRule build_rule(int n) {
  GaussRule g;
  g.nodes.resize(n);
  g.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1);
    const double w = 2 / ((1 - x * x) * dp * dp);
    g.nodes[i] = -x;
    g.nodes[n - 1 - i] = x;
    g.weights[i] = g.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) g.nodes[n / 2] = 0;
  return g;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw ValidationError("order", "Gauss-Legendre order must be positive");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussRule>(build_rule(n));
  return *slot;
}

std::vector<double> geometric_nodes(double lo, double hi, int per_decade,
                                    const std::vector<double>& breaks) {
  if (!(lo > 0) || !(hi > lo)) throw ValidationError("nodes", "need 0 < lo < hi");
  const int count = std::max(2, static_cast<int>(std::ceil(std::log10(hi / lo) * per_decade)) + 1);
  std::vector<double> x(count);
  const double q = std::log(hi / lo) / (count - 1);
  for (int i = 0; i < count; ++i) x[i] = lo * std::exp(q * i);
  x.front() = lo;
  x.back() = hi;
  std::vector<std::pair<double, bool>> tagged;
  for (double v : x) tagged.emplace_back(v, false);
  tagged.front().second = tagged.back().second = true;
  for (double b : breaks)
    if (b > lo && b < hi) tagged.emplace_back(b, true);
  std::sort(tagged.begin(), tagged.end());
  // Drop plain nodes crowding a breakpoint so panels stay well shaped.
  const double crowd = 0.25 * std::expm1(q);
  std::vector<std::pair<double, bool>> kept;
  for (const auto& [v, is_break] : tagged) {
    if (!kept.empty() && v - kept.back().first <= crowd * v) {
      if (is_break && !kept.back().second) kept.back() = {v, true};
      else if (is_break && v > kept.back().first) kept.emplace_back(v, true);
      continue;
    }
    kept.emplace_back(v, is_break);
  }
  std::vector<double> out;
  for (const auto& k : kept) out.push_back(k.first);
  return out;
}

std::vector<double> uniform_nodes(double lo, double hi, int count) {
  std::vector<double> x(count);
  for (int i = 0; i < count; ++i) x[i] = lo + (hi - lo) * i / (count - 1);
  x.back() = hi;
  return x;
}

CumulativeTable::CumulativeTable(const std::function<double(double)>& f, std::vector<double> nodes,
                                 int order)
    : x_(std::move(nodes)) {
  const std::size_t n = x_.size();
  if (n < 2) throw ValidationError("nodes", "cumulative table needs at least two nodes");
  std::vector<double> panel(n - 1);
  slope_left_.resize(n - 1);
  slope_right_.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    panel[i] = integrate(f, x_[i], x_[i + 1], order);
    // One-sided slopes so jumps of f at nodes are honoured.
    slope_left_[i] = f(std::nextafter(x_[i], x_[i + 1]));
    slope_right_[i] = f(std::nextafter(x_[i + 1], x_[i]));
  }
  prefix_.assign(n, 0.0);
  tail_.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) prefix_[i] = prefix_[i - 1] + panel[i - 1];
  for (std::size_t i = n - 1; i-- > 0;) tail_[i] = tail_[i + 1] + panel[i];
}

double CumulativeTable::interp(const std::vector<double>& v, double x, double sign) const {
  if (x <= x_.front()) return v.front();
  if (x >= x_.back()) return v.back();
  const std::size_t i =
      static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) - 1;
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * v[i] + h01 * v[i + 1] +
         sign * h * (h10 * slope_left_[i] + h11 * slope_right_[i]);
}

double CumulativeTable::prefix(double x) const { return interp(prefix_, x, 1.0); }
double CumulativeTable::tail(double x) const { return interp(tail_, x, -1.0); }

}  // namespace nlc
