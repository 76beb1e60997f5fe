#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <limits>

namespace lrmr {

using Index = Eigen::Index;

/// Real n x p matrix. Storage is Eigen's default column-major layout, so
/// column j of X is contiguous and vec(X) stacks the columns of X.
using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thin singular value decomposition X = U diag(sigma) V^T with
/// q = min(n, p) triplets: U is n x q, V is p x q, sigma is nonincreasing.
///
/// Each left singular vector is signed so that its largest-magnitude entry
/// is positive (the first such entry on ties); the matching right vector
/// is flipped with it.
struct SvdFactors {
  DenseMatrix U;
  Vector sigma;
  DenseMatrix V;

  Index rows() const { return U.rows(); }
  Index cols() const { return V.rows(); }
  DenseMatrix recompose() const;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Throws InvalidInput if X is empty or has a non-finite entry.
void require_finite(const DenseMatrix& X, const char* what = "matrix");

SvdFactors svd(const DenseMatrix& X);

/// Singular values of X, nonincreasing, length min(n, p).
Vector singular_values(const DenseMatrix& X);

/// Leading `count` singular triplets by randomized block power iteration
/// with a Rayleigh-Ritz step, for matrices too large for a full SVD each
/// iteration. Converges when the residual ||X v_j - sigma_j u_j|| of every
/// returned triplet drops below `tol * sigma_1`; otherwise falls back to
/// the full decomposition and truncates it.
SvdFactors partial_svd(const DenseMatrix& X, Index count, double tol = 1e-10,
                       std::uint64_t seed = 0x5eed, int max_sweeps = 300);

/// k-spectral truncation: the best rank-k approximation X_[k].
DenseMatrix truncate_k(const SvdFactors& f, Index k);

/// Componentwise max(sigma_j, eps).
Vector eps_stabilize(const Vector& sigma, double eps);

/// l_q norm of the singular values; q = kInfinity gives the operator norm.
double schatten_norm(const DenseMatrix& X, double q);

inline double nuclear_norm(const DenseMatrix& X) { return schatten_norm(X, 1.0); }
inline double operator_norm(const DenseMatrix& X) { return schatten_norm(X, kInfinity); }

/// Sum of the singular values beyond index k: the nuclear-norm distance
/// from X to the nearest matrix of rank at most k.
double best_k_error(const DenseMatrix& X, Index k);

/// Plain-text matrix: "rows cols" then one line per row.
DenseMatrix read_matrix_text(std::istream& in);
void write_matrix_text(std::ostream& out, const DenseMatrix& X);

}  // namespace lrmr
