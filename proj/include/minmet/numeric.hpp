#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>

namespace minmet {

using Matrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Thrown when an iterative kernel fails to reach its threshold within the cap.
struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PowerIterOptions {
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;
  double threshold = 1e-13;
  int max_iterations = 20000;
};

/// Largest singular value of m, by power iteration on m* m.
/// Deterministic for a fixed seed. Throws NonConvergence at the iteration cap.
double operator_norm_power_iteration(const Matrix& m, const PowerIterOptions& opts = {});

/// operator_norm_power_iteration with a dense SVD fallback on non-convergence.
double operator_norm(const Matrix& m, const PowerIterOptions& opts = {});

/// Principal matrix square root by the Denman-Beavers iteration, with an
/// eigendecomposition fallback for (near-)normal matrices whose spectrum
/// touches the negative real axis guard. Requires no eigenvalue on (-inf, 0].
Matrix principal_sqrt(const Matrix& a, double tol = 1e-13);

/// exp(A) for skew-Hermitian A via the spectral decomposition of -iA.
Matrix exp_skew_hermitian(const Matrix& a);

/// Nearest unitary factor (polar projection through the SVD).
Matrix project_unitary(const Matrix& m);

/// Frobenius-normalised deviation from the unitary manifold: ||g* g - Id||.
double unitarity_drift(const Matrix& g);

}  // namespace minmet
