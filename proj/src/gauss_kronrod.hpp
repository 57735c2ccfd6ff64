#pragma once

// Vector-valued adaptive G10/K21 engine shared by the quadrature front ends.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "nonmark/quadrature.hpp"

namespace nonmark::quad::detail {

using VecEval = std::function<void(double, std::span<Complex>)>;

struct VecEstimate {
  std::vector<Complex> value;
  std::vector<double> error;
  std::vector<double> abs_value;  // integral of |f_k|, a scale for cancelling integrals
  int panels = 0;
  bool converged = true;
};

/// Integrates n components over the panels delimited by the sorted `grid`.
/// Throws NonFinite on NaN/inf samples. Sets converged = false when the
/// subdivision budget runs out (the caller decides whether that is fatal).
VecEstimate adaptive(const VecEval& f, std::size_t n, std::span<const double> grid,
                     const QuadratureConfig& cfg);

/// Initial grid over [a, b]: uniform core panels, geometric outside the core,
/// plus any extra breakpoints falling strictly inside (a, b).
std::vector<double> initial_grid(double a, double b, const QuadratureConfig& cfg,
                                 std::span<const double> extra = {});

/// Sorted, deduplicated union of `grid` with period-locked points on [a, b].
std::vector<double> add_periodic_points(std::vector<double> grid, double a, double b,
                                        double spacing);

}  // namespace nonmark::quad::detail
