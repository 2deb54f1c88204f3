#ifndef OPLAB_SPECTRAL_HPP
#define OPLAB_SPECTRAL_HPP

#include <complex>
#include <functional>
#include <vector>

#include "oplab/types.hpp"

namespace oplab {

using EigSelector = std::function<bool(std::complex<double>)>;

/// Complex Schur form with the selected eigenvalues moved to the leading
/// diagonal block (bubble reordering by unitary similarity).
struct OrderedSchur {
  Eigen::MatrixXcd U;  // unitary
  Eigen::MatrixXcd T;  // upper triangular, selected eigenvalues first
  int selected = 0;
};

OrderedSchur ordered_schur(const Matrix& A, const EigSelector& select);

/// Oblique spectral projector onto the invariant subspace of the selected
/// eigenvalues (real part of U [[I, X], [0, 0]] U*, X from a Sylvester
/// solve). Requires the selector to split the spectrum cleanly.
Matrix spectral_projector(const Matrix& A, const EigSelector& select);

struct EigenClusterInfo {
  std::complex<double> lambda;  // cluster representative
  int algebraic = 0;
  int geometric = 0;       // at the base rank tolerance
  int geometric_alt = 0;   // at 10x the tolerance
  bool semisimple = false;
  bool borderline = false;  // the two rank estimates disagree
};

/// Clusters the spectrum and reports semisimplicity per cluster; the
/// geometric multiplicity is d - rank(A - lambda I), computed at two rank
/// tolerances (tol, 10 tol) so borderline cases are surfaced.
std::vector<EigenClusterInfo> eigen_clusters(const Matrix& A, double tol);

}  // namespace oplab

#endif
