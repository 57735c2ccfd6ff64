#pragma once

#include <functional>
#include <span>
#include <vector>

#include "nonmark/correlations.hpp"
#include "nonmark/matrix2.hpp"
#include "nonmark/quadrature.hpp"
#include "nonmark/response.hpp"

namespace nonmark {

/// sqrt(1 - |<f,g>|^2 / (||f||^2 ||g||^2)), clamped to [0, 1].
/// Throws ZeroNorm when either norm is below 1e-14.
double distance(const quad::Integrand& f, const quad::Integrand& g, const quad::QuadratureConfig& cfg);

/// Same, from precomputed moments.
double distance(const quad::PairMoments& m);

struct EntryDiagnostics {
  double tail = 0.0;  // relative size of the modelled tail beyond +-W
  int panels = 0;
  bool parity_used = false;
};

/// Entrywise distances between two 2x2 matrix-valued functions of frequency.
struct MatrixDistance {
  RealMatrix2 value;
  Matrix2<EntryDiagnostics> diagnostics;
};

using MatrixPairEval = std::function<void(double w, ComplexMatrix2& f, ComplexMatrix2& g)>;
MatrixDistance matrix_distance(const MatrixPairEval& eval, quad::Parity parity,
                               std::span<const double> breakpoints, const quad::QuadratureConfig& cfg);

struct QuantifierReport {
  RealMatrix2 n1;
  RealMatrix2 n2;
  Matrix2<EntryDiagnostics> n1_diagnostics;
  Matrix2<EntryDiagnostics> n2_diagnostics;
  CovarianceMatrix covariance;  // only filled when n2 was computed
  bool has_n1 = false;
  bool has_n2 = false;
};

/// Divisibility violation: distance between -i chi' and chi chi_plus^-1 chi.
/// Zero by definition for a decoupled oscillator.
MatrixDistance n1(const Model& m);
/// Regression-theorem violation: distance between the exact and predicted spectra.
MatrixDistance n2(const Model& m);

QuantifierReport quantify(const Model& m, bool want_n1 = true, bool want_n2 = true);

}  // namespace nonmark
