#pragma once

#include <cmath>
#include <functional>
#include <numbers>

#include "layerfem/coordinate.hpp"
#include "layerfem/error.hpp"

namespace layerfem {

/// -eps * Laplace(u) + b u_x + c u = f on (0,1)^2, u = 0 on the boundary.
struct Problem {
  using Coefficient = std::function<double(const Point&)>;

  Coefficient b;
  Coefficient b_x;
  Coefficient c;
  Coefficient f;
  double eps = 1e-6;
  double beta = 1.0;  ///< b >= beta > 0
  double mu0 = 1.0;   ///< c - b_x / 2 >= mu0 > 0

  /// Spot-checks b >= beta and c - b_x/2 >= mu0 on a (samples+1)^2 lattice.
  void validate(int samples = 32) const {
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    if (!(beta > 0.0)) throw InvalidArgument("beta must be positive");
    if (!(mu0 > 0.0)) throw InvalidArgument("mu0 must be positive");
    for (int j = 0; j <= samples; ++j)
      for (int i = 0; i <= samples; ++i) {
        const Point p = Point::from_values(static_cast<double>(i) / samples, static_cast<double>(j) / samples);
        const double bv = b(p);
        if (bv < beta) throw InvalidArgument("b falls below beta at a sample point");
        if (c(p) - 0.5 * b_x(p) < mu0) throw InvalidArgument("c - b_x/2 falls below mu0 at a sample point");
      }
  }
};

/// Layer decomposition of the manufactured solution at a point.
struct LayerFactors {
  double smooth_x = 0.0;  ///< sin(pi x / 2)
  double layer_x = 0.0;   ///< (e^{-(1-x)/eps} - e^{-1/eps}) / (1 - e^{-1/eps})
  double layer_y = 0.0;   ///< e^{-y/sqrt(eps)} + e^{-(1-y)/sqrt(eps)} - e^{-1/sqrt(eps)} (scaled by 1/(1 - e^{-1/sqrt eps}))
  double factor_x = 0.0;  ///< X(x) = smooth_x - layer_x
  double factor_y = 0.0;  ///< Y(y)
};

/// u(x,y) = X(x) Y(y) with
///   X(x) = sin(pi x/2) - (e^{-(1-x)/eps} - e^{-1/eps}) / (1 - e^{-1/eps})
///   Y(y) = (1 - e^{-y/s}) (1 - e^{-(1-y)/s}) / (1 - e^{-1/s}),  s = sqrt(eps).
/// Every exponential has a nonpositive argument; eps^{-1} prefactors are folded
/// into the exponent so nothing overflows for eps down to 1e-300.
class ExactSolution {
 public:
  explicit ExactSolution(double eps)
      : eps_(eps),
        s_(std::sqrt(eps)),
        log_eps_(std::log(eps)),
        log_s_(0.5 * std::log(eps)),
        dx_(-std::expm1(-1.0 / eps)),
        dy_(-std::expm1(-1.0 / std::sqrt(eps))),
        e_x_(std::exp(-1.0 / eps)),
        e_y_(std::exp(-1.0 / std::sqrt(eps))) {
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  }

  double eps() const { return eps_; }

  double X(const Coordinate& x) const { return std::sin(kHalfPi * x.value) - layer_x(x); }

  double dX(const Coordinate& x) const {
    return kHalfPi * std::cos(kHalfPi * x.value) - std::exp(-x.complement / eps_ - log_eps_) / dx_;
  }

  double Y(const Coordinate& y) const {
    return -std::expm1(-y.value / s_) * -std::expm1(-y.complement / s_) / dy_;
  }

  double dY(const Coordinate& y) const {
    return (std::exp(-y.value / s_ - log_s_) - std::exp(-y.complement / s_ - log_s_)) / dy_;
  }

  double value(const Point& p) const { return X(p.x) * Y(p.y); }
  double value(double x, double y) const { return value(Point::from_values(x, y)); }

  Vec2 grad(const Point& p) const { return {dX(p.x) * Y(p.y), X(p.x) * dY(p.y)}; }
  Vec2 grad(double x, double y) const { return grad(Point::from_values(x, y)); }

  /// -eps X'' + (2 - x) X', grouped: smooth part plus -t e^{-t} / D with t = (1-x)/eps.
  double x_operator(const Coordinate& x) const {
    const double smooth =
        eps_ * kHalfPi * kHalfPi * std::sin(kHalfPi * x.value) + (2.0 - x.value) * kHalfPi * std::cos(kHalfPi * x.value);
    return smooth + x_layer_bracket(x);
  }

  /// The layer part of -eps X'' + (2 - x) X', i.e. -(1-x) e^{-(1-x)/eps} / (eps D).
  double x_layer_bracket(const Coordinate& x) const {
    const double t = x.complement / eps_;
    return -t * std::exp(-t) / dx_;
  }

  /// -eps Y'' = (e^{-y/s} + e^{-(1-y)/s}) / D_y.
  double y_operator(const Coordinate& y) const {
    return (std::exp(-y.value / s_) + std::exp(-y.complement / s_)) / dy_;
  }

  /// f = Y [-eps X'' + (2-x) X'] + X (-eps Y'') + 1.5 X Y.
  double rhs(const Point& p) const {
    const double X_ = X(p.x), Y_ = Y(p.y);
    return Y_ * x_operator(p.x) + X_ * y_operator(p.y) + 1.5 * X_ * Y_;
  }
  double rhs(double x, double y) const { return rhs(Point::from_values(x, y)); }

  LayerFactors layer_factors(const Point& p) const {
    LayerFactors lf;
    lf.smooth_x = std::sin(kHalfPi * p.x.value);
    lf.layer_x = layer_x(p.x);
    lf.layer_y = (std::exp(-p.y.value / s_) + std::exp(-p.y.complement / s_) - e_y_) / dy_;
    lf.factor_x = lf.smooth_x - lf.layer_x;
    lf.factor_y = Y(p.y);
    return lf;
  }

 private:
  static constexpr double kHalfPi = std::numbers::pi / 2.0;

  double layer_x(const Coordinate& x) const { return (std::exp(-x.complement / eps_) - e_x_) / dx_; }

  double eps_, s_, log_eps_, log_s_, dx_, dy_, e_x_, e_y_;
};

/// The benchmark: b = 2 - x, c = 1.5, f manufactured from ExactSolution.
struct BenchmarkProblem {
  ExactSolution exact;
  Problem problem;
};

inline BenchmarkProblem benchmark_problem(double eps, double mu0 = 2.0, double beta = 1.0) {
  ExactSolution exact(eps);
  Problem pr;
  pr.b = [](const Point& p) { return 2.0 - p.x.value; };
  pr.b_x = [](const Point&) { return -1.0; };
  pr.c = [](const Point&) { return 1.5; };
  pr.f = [exact](const Point& p) { return exact.rhs(p); };
  pr.eps = eps;
  pr.beta = beta;
  pr.mu0 = mu0;
  return {exact, std::move(pr)};
}

inline double exact_u(double x, double y, double eps) { return ExactSolution(eps).value(x, y); }
inline Vec2 exact_grad(double x, double y, double eps) { return ExactSolution(eps).grad(x, y); }
inline double rhs_f(double x, double y, double eps) { return ExactSolution(eps).rhs(x, y); }
inline LayerFactors layer_factors(double x, double y, double eps) {
  return ExactSolution(eps).layer_factors(Point::from_values(x, y));
}

}  // namespace layerfem
