#pragma once

#include "nonmark/matrix2.hpp"
#include "nonmark/response.hpp"

namespace nonmark {

/// Equilibrium covariances. Off-diagonal entries vanish identically.
struct CovarianceMatrix {
  double qq = 0.0;
  double pp = 0.0;
  /// Relative change of pp when the cutoff is doubled (quantum branch only).
  double cutoff_change = 0.0;
  bool cutoff_sensitive = false;  // cutoff_change > 1%

  RealMatrix2 matrix() const { return RealMatrix2::from(qq, 0.0, 0.0, pp); }
};

/// Classical branch (hbar = 0): (2/(pi beta)) int_0^inf Im chi / w and w Im chi.
/// Quantum branch: (hbar/pi) int_0^cutoff coth(beta hbar w / 2) Im chi, with an
/// extra w^2 for pp. Results are memoised per (params, density, quadrature).
CovarianceMatrix covariance0(const Model& m);

/// Fluctuation-dissipation spectrum [[1, iw], [-iw, w^2]] * C_qq(w),
/// C_qq = 2 hbar Im chi / (1 - exp(-beta hbar w)), or 2 Im chi / (beta w) classically.
ComplexMatrix2 exact_spectrum(const Model& m, double w);

/// Regression-theorem prediction, entry by entry.
ComplexMatrix2 rt_spectrum(const Model& m, double w, const CovarianceMatrix& c0);
/// Same prediction as chi chi_plus^-1 C0 - C0 chi_plus^-1 chi^dagger.
ComplexMatrix2 rt_spectrum_general(const Model& m, double w, const CovarianceMatrix& c0);

/// Drops every memoised covariance.
void clear_covariance_cache();

}  // namespace nonmark
