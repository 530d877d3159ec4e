#include "minmet/numeric.hpp"

#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace minmet {

namespace {

// Deterministic start-vector stream; this sits on the hot path of every
// distance evaluation, so no heavyweight engine here.
struct SplitMix {
  std::uint64_t state;
  double unit() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z ^= z >> 31;
    return 2.0 * (static_cast<double>(z >> 11) * 0x1p-53) - 1.0;
  }
};

template <typename MatT, typename VecT>
double largest_eigenvalue_sqrt(const MatT& b, double scale, const PowerIterOptions& opts) {
  SplitMix sm{opts.seed};
  VecT v(b.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(sm.unit(), sm.unit());
  v.normalize();

  VecT w(b.rows());
  double lambda = 0.0;
  double best_residual = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    w.noalias() = b * v;
    const double next = std::real(v.dot(w));  // Rayleigh quotient of the current v
    const double residual = (w - next * v).norm();
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;  // v landed in the kernel; spectrum reached only at 0
    v = w / wn;
    // Both tests are relative to the scale of b: an absolute test would accept
    // arbitrary vectors for small matrices and reject everything for large ones.
    const bool settled = std::abs(next - lambda) <= opts.threshold * scale;
    lambda = next;
    if (settled && residual <= opts.threshold * scale) {
      return std::sqrt(std::max(0.0, lambda));
    }
    // A residual that has stopped decreasing means the iterate is trapped by a
    // near-degenerate top pair (split below the threshold's reach); further
    // iterations cannot help, so give the caller its exact fallback right away.
    if (residual < 0.9 * best_residual) {
      best_residual = residual;
      since_best = 0;
    } else if (settled && ++since_best >= 25) {
      break;
    }
  }
  throw NonConvergence("operator norm power iteration stalled short of the threshold");
}

}  // namespace

double operator_norm_power_iteration(const Matrix& m, const PowerIterOptions& opts) {
  const auto n = m.cols();
  if (n == 0) return 0.0;
  if (n == 1) return std::abs(m(0, 0));
  const Matrix b = m.adjoint() * m;
  const double scale = b.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  // Fixed-size kernels keep the small-dimension hot path allocation-free.
  switch (n) {
    case 2:
      return largest_eigenvalue_sqrt<Eigen::Matrix2cd, Eigen::Vector2cd>(b, scale, opts);
    case 3:
      return largest_eigenvalue_sqrt<Eigen::Matrix3cd, Eigen::Vector3cd>(b, scale, opts);
    case 4:
      return largest_eigenvalue_sqrt<Eigen::Matrix4cd, Eigen::Vector4cd>(b, scale, opts);
    default:
      return largest_eigenvalue_sqrt<Matrix, Eigen::VectorXcd>(b, scale, opts);
  }
}

double operator_norm(const Matrix& m, const PowerIterOptions& opts) {
  try {
    return operator_norm_power_iteration(m, opts);
  } catch (const NonConvergence&) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  }
}

namespace {

Matrix sqrt_by_eigendecomposition(const Matrix& a) {
  Eigen::ComplexEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) {
    throw NonConvergence("eigendecomposition failed in principal sqrt");
  }
  Eigen::VectorXcd vals = es.eigenvalues();
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    const Complex z = vals(i);
    if (std::real(z) <= 0.0 && std::abs(std::imag(z)) < 1e-14) {
      throw NonConvergence("principal sqrt undefined: eigenvalue on the closed negative axis");
    }
    vals(i) = std::sqrt(z);  // principal branch
  }
  const Matrix& v = es.eigenvectors();
  return v * vals.asDiagonal() * v.inverse();
}

}  // namespace

Matrix principal_sqrt(const Matrix& a, double tol) {
  const auto n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  // Guard: Denman-Beavers needs the spectrum away from the negative real axis;
  // near -1 eigenvalues make (Y + Z^-1) ill-conditioned.
  if (std::abs(Eigen::FullPivLU<Matrix>(a + id).determinant()) < 1e-8) {
    return sqrt_by_eigendecomposition(a);
  }
  Matrix y = a;
  Matrix z = id;
  for (int it = 0; it < 60; ++it) {
    const Matrix y_next = 0.5 * (y + z.inverse());
    const Matrix z_next = 0.5 * (z + y.inverse());
    const double step = (y_next - y).norm();
    y = y_next;
    z = z_next;
    if (step <= tol * std::max(1.0, y.norm())) break;
  }
  if ((y * y - a).norm() > 1e-10 * std::max(1.0, a.norm())) {
    return sqrt_by_eigendecomposition(a);
  }
  return y;
}

Matrix exp_skew_hermitian(const Matrix& a) {
  // a = iH with H Hermitian; exp(a) = V diag(e^{i lambda}) V*.
  const Matrix h = Complex(0, -1) * a;
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) {
    throw NonConvergence("spectral decomposition failed in exp_skew_hermitian");
  }
  const auto& vals = es.eigenvalues();
  Eigen::VectorXcd phases(vals.size());
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    phases(i) = std::exp(Complex(0, vals(i)));
  }
  const Matrix& v = es.eigenvectors();
  return v * phases.asDiagonal() * v.adjoint();
}

Matrix project_unitary(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

double unitarity_drift(const Matrix& g) {
  const auto n = g.cols();
  return (g.adjoint() * g - Matrix::Identity(n, n)).norm();
}

}  // namespace minmet
