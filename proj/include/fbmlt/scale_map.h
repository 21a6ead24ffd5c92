#pragma once

#include <functional>

namespace fbmlt {

/// S(x) = int_0^x du / v(u) for a 1-d diffusion coefficient bounded away
/// from zero, with its inverse. Used as the closed-form reference
/// X_t = S^{-1}(S(x0) + B_t) for drift-free 1-d equations.
class ScaleMap {
 public:
  /// v must satisfy v_min <= |v| and keep one sign.
  ScaleMap(std::function<double(double)> v, double v_min, double v_max);

  double operator()(double x) const;
  double inverse(double y) const;
  double solution(double x0, double b) const { return inverse((*this)(x0) + b); }

 private:
  double integrate(double a, double b) const;

  std::function<double(double)> v_;
  double v_min_;
  double v_max_;
  double sign_;
};

} // namespace fbmlt
