#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "lrmr/matcore.hpp"

namespace lrmr {

/// Measurement vector in R^m. For completion operators the entries are
/// grouped by column: the block of column 0 first, then column 1, and so
/// on, each block listing rows in ascending order.
using MeasurementVec = Eigen::VectorXd;

/// Observed position (row, col), zero-based.
struct Entry {
  Index row = 0;
  Index col = 0;
  friend bool operator==(const Entry&, const Entry&) = default;
};

/// General linear map given by an m x (n p) coefficient array acting on
/// vec(X) (columns stacked).
struct DenseOperator {
  DenseMatrix coeffs;
  Index n = 0;
  Index p = 0;
};

/// Entry-sampling map. It is separable: S(X) = (S_0 X_0, ..., S_{p-1} X_{p-1})
/// where S_j selects the rows listed in `rows_by_col[j]` from column j.
struct CompletionOperator {
  Index n = 0;
  Index p = 0;
  std::vector<std::vector<Index>> rows_by_col;
  std::vector<Index> offsets;  // size p + 1; block j is [offsets[j], offsets[j+1])
};

/// Linear map S: R^{n x p} -> R^m. Immutable after construction.
class MeasurementOp {
 public:
  /// Wraps a coefficient array; throws InvalidInput for non-finite or
  /// mis-sized coefficients.
  static MeasurementOp dense(DenseMatrix coeffs, Index n, Index p);

  /// Throws InvalidArgument for duplicate or out-of-range entries.
  static MeasurementOp completion(Index n, Index p, std::span<const Entry> observed);

  Index rows() const;
  Index cols() const;
  /// Number of measurements m.
  Index size() const;

  bool is_completion() const { return std::holds_alternative<CompletionOperator>(impl_); }
  const CompletionOperator& as_completion() const;
  const DenseOperator& as_dense() const;

  /// Observed entries in measurement order (completion operators only).
  std::vector<Entry> entries() const;

  /// The m x (n p) coefficient array of this operator.
  DenseMatrix coefficient_matrix() const;

 private:
  explicit MeasurementOp(std::variant<DenseOperator, CompletionOperator> impl)
      : impl_(std::move(impl)) {}

  std::variant<DenseOperator, CompletionOperator> impl_;
};

/// Dense operator with i.i.d. N(0, 1/m) coefficients.
MeasurementOp gaussian_op(Index n, Index p, Index m, std::uint64_t seed);

MeasurementOp completion_op(Index n, Index p, std::span<const Entry> observed);

/// Exactly floor(fraction * n * p) positions drawn uniformly without
/// replacement; sorted by column, then row.
std::vector<Entry> uniform_mask(Index n, Index p, double fraction, std::uint64_t seed);

MeasurementVec apply(const MeasurementOp& op, const DenseMatrix& X);
DenseMatrix adjoint(const MeasurementOp& op, const MeasurementVec& lambda);

/// Nonzero H in the kernel of `op`, the projection of a random Gaussian
/// matrix onto ker S. Throws NoKernel when m = n p.
DenseMatrix kernel_sample(const MeasurementOp& op, std::uint64_t seed);

/// The problem X^T: returns the operator acting on p x n matrices with
/// S'(X^T) = P S(X) for a permutation P, together with P M.
std::pair<MeasurementOp, MeasurementVec> transpose_problem(const MeasurementOp& op,
                                                            const MeasurementVec& M);
/// Inverse of the permutation applied by transpose_problem, for mapping
/// per-measurement data back.
std::vector<Index> transpose_permutation(const MeasurementOp& op);

/// Mask file: header "n p", then one "row col" pair per line.
struct MaskFile {
  Index n = 0;
  Index p = 0;
  std::vector<Entry> entries;
};
MaskFile read_mask(std::istream& in);
void write_mask(std::ostream& out, Index n, Index p, std::span<const Entry> entries);

/// Values file: one real per line, in mask-file order.
std::vector<double> read_values(std::istream& in);

}  // namespace lrmr
