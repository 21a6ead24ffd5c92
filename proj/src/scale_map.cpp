#include "fbmlt/scale_map.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace fbmlt {

namespace {
constexpr double kChunk = 0.5;
}

ScaleMap::ScaleMap(std::function<double(double)> v, double v_min, double v_max)
    : v_(std::move(v)), v_min_(v_min), v_max_(v_max) {
  if (!(v_min > 0.0) || !(v_max >= v_min)) throw std::invalid_argument("ScaleMap: need 0 < v_min <= v_max");
  const double v0 = v_(0.0);
  if (std::abs(v0) < v_min) throw std::invalid_argument("ScaleMap: |v(0)| is below the declared lower bound");
  sign_ = v0 > 0.0 ? 1.0 : -1.0;
}

double ScaleMap::integrate(double a, double b) const {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [this](double u) { return 1.0 / v_(u); };
  const double len = b - a;
  const auto chunks = std::max<long>(1, static_cast<long>(std::ceil(std::abs(len) / kChunk)));
  double total = 0.0;
  for (long c = 0; c < chunks; ++c) {
    const double lo = a + len * static_cast<double>(c) / static_cast<double>(chunks);
    const double hi = c + 1 == chunks ? b : a + len * static_cast<double>(c + 1) / static_cast<double>(chunks);
    total += gauss_kronrod<double, 21>::integrate(f, lo, hi, 6, 1e-13);
  }
  return total;
}

double ScaleMap::operator()(double x) const {
  if (x == 0.0) return 0.0;
  return integrate(0.0, x);
}

double ScaleMap::inverse(double y) const {
  if (y == 0.0) return 0.0;
  // |S'| lies in [1/v_max, 1/v_min], which brackets the root.
  const double a = sign_ * y * v_min_;
  const double b = sign_ * y * v_max_;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  if (lo == hi) return lo;
  auto fn = [&](double x) { return std::make_pair((*this)(x) - y, 1.0 / v_(x)); };
  std::uintmax_t iters = 100;
  const double guess = sign_ * y * std::abs(v_(0.0));
  return boost::math::tools::newton_raphson_iterate(fn, std::clamp(guess, lo, hi), lo, hi, 50, iters);
}

} // namespace fbmlt
