#include "lrmr/measure.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "lrmr/errors.hpp"
#include "lrmr/random.hpp"

namespace lrmr {
namespace {

constexpr std::uint64_t kMaskStream = 0x6d61736b;  // "mask"
constexpr std::uint64_t kKernelStream = 0x6b65726e;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void check_shape(const MeasurementOp& op, const DenseMatrix& X) {
  if (X.rows() != op.rows() || X.cols() != op.cols()) {
    std::ostringstream msg;
    msg << "matrix is " << X.rows() << "x" << X.cols() << ", operator expects " << op.rows()
        << "x" << op.cols();
    throw InvalidArgument(msg.str());
  }
}

}  // namespace

MeasurementOp MeasurementOp::dense(DenseMatrix coeffs, Index n, Index p) {
  if (n < 1 || p < 1) throw InvalidArgument("operator dimensions must be positive");
  if (coeffs.rows() < 1 || coeffs.cols() != n * p) {
    throw InvalidInput("coefficient array must be m x (n p) with m >= 1");
  }
  if (!coeffs.allFinite()) throw InvalidInput("coefficient array has non-finite entries");
  return MeasurementOp(DenseOperator{std::move(coeffs), n, p});
}

MeasurementOp MeasurementOp::completion(Index n, Index p, std::span<const Entry> observed) {
  if (n < 1 || p < 1) throw InvalidArgument("operator dimensions must be positive");
  if (observed.empty()) throw InvalidArgument("completion operator needs at least one entry");
  CompletionOperator c;
  c.n = n;
  c.p = p;
  c.rows_by_col.assign(p, {});
  for (const Entry& e : observed) {
    if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= p) {
      throw InvalidArgument("observed entry (" + std::to_string(e.row) + ", " +
                            std::to_string(e.col) + ") out of range");
    }
    c.rows_by_col[e.col].push_back(e.row);
  }
  c.offsets.assign(p + 1, 0);
  for (Index j = 0; j < p; ++j) {
    auto& rows = c.rows_by_col[j];
    std::sort(rows.begin(), rows.end());
    if (std::adjacent_find(rows.begin(), rows.end()) != rows.end()) {
      throw InvalidArgument("duplicate observed entry in column " + std::to_string(j));
    }
    c.offsets[j + 1] = c.offsets[j] + static_cast<Index>(rows.size());
  }
  return MeasurementOp(std::move(c));
}

Index MeasurementOp::rows() const {
  return std::visit([](const auto& o) { return o.n; }, impl_);
}

Index MeasurementOp::cols() const {
  return std::visit([](const auto& o) { return o.p; }, impl_);
}

Index MeasurementOp::size() const {
  return std::visit(Overloaded{[](const DenseOperator& d) { return d.coeffs.rows(); },
                               [](const CompletionOperator& c) { return c.offsets.back(); }},
                    impl_);
}

const CompletionOperator& MeasurementOp::as_completion() const {
  if (!is_completion()) throw InvalidArgument("operator is not an entry-sampling operator");
  return std::get<CompletionOperator>(impl_);
}

const DenseOperator& MeasurementOp::as_dense() const {
  if (is_completion()) throw InvalidArgument("operator is not a dense operator");
  return std::get<DenseOperator>(impl_);
}

std::vector<Entry> MeasurementOp::entries() const {
  const auto& c = as_completion();
  std::vector<Entry> out;
  out.reserve(size());
  for (Index j = 0; j < c.p; ++j)
    for (Index i : c.rows_by_col[j]) out.push_back({i, j});
  return out;
}

DenseMatrix MeasurementOp::coefficient_matrix() const {
  return std::visit(Overloaded{[](const DenseOperator& d) { return d.coeffs; },
                               [this](const CompletionOperator& c) {
                                 DenseMatrix A = DenseMatrix::Zero(size(), c.n * c.p);
                                 for (Index j = 0; j < c.p; ++j) {
                                   Index a = c.offsets[j];
                                   for (Index i : c.rows_by_col[j]) A(a++, j * c.n + i) = 1.0;
                                 }
                                 return A;
                               }},
                    impl_);
}

MeasurementOp gaussian_op(Index n, Index p, Index m, std::uint64_t seed) {
  if (n < 1 || p < 1) throw InvalidArgument("operator dimensions must be positive");
  if (m < 1 || m > n * p) throw InvalidArgument("measurement count must lie in [1, n p]");
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  DenseMatrix A(m, n * p);
  // Row-by-row fill so a prefix of rows does not depend on m's column layout.
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < n * p; ++b) A(a, b) = scale * rng.normal();
  return MeasurementOp::dense(std::move(A), n, p);
}

MeasurementOp completion_op(Index n, Index p, std::span<const Entry> observed) {
  return MeasurementOp::completion(n, p, observed);
}

std::vector<Entry> uniform_mask(Index n, Index p, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw InvalidArgument("sampling fraction must lie in (0, 1]");
  }
  const auto total = static_cast<std::uint64_t>(n * p);
  auto count = static_cast<std::uint64_t>(std::floor(fraction * static_cast<double>(total)));
  count = std::min(count, total);
  Rng rng = Rng::stream(seed, kMaskStream);
  std::vector<Entry> out;
  out.reserve(count);
  // Linear index is column-major, so ascending order is column, then row.
  for (std::uint64_t idx : rng.sample_without_replacement(total, count)) {
    out.push_back({static_cast<Index>(idx % n), static_cast<Index>(idx / n)});
  }
  return out;
}

MeasurementVec apply(const MeasurementOp& op, const DenseMatrix& X) {
  check_shape(op, X);
  if (op.is_completion()) {
    const auto& c = op.as_completion();
    MeasurementVec y(op.size());
    for (Index j = 0; j < c.p; ++j) {
      Index a = c.offsets[j];
      for (Index i : c.rows_by_col[j]) y(a++) = X(i, j);
    }
    return y;
  }
  const auto& d = op.as_dense();
  return d.coeffs * X.reshaped();
}

DenseMatrix adjoint(const MeasurementOp& op, const MeasurementVec& lambda) {
  if (lambda.size() != op.size()) {
    throw InvalidArgument("measurement vector has length " + std::to_string(lambda.size()) +
                          ", operator has " + std::to_string(op.size()));
  }
  if (op.is_completion()) {
    const auto& c = op.as_completion();
    DenseMatrix X = DenseMatrix::Zero(c.n, c.p);
    for (Index j = 0; j < c.p; ++j) {
      Index a = c.offsets[j];
      for (Index i : c.rows_by_col[j]) X(i, j) = lambda(a++);
    }
    return X;
  }
  const auto& d = op.as_dense();
  Vector v = d.coeffs.transpose() * lambda;
  return v.reshaped(d.n, d.p);
}

DenseMatrix kernel_sample(const MeasurementOp& op, std::uint64_t seed) {
  const Index n = op.rows();
  const Index p = op.cols();
  if (op.size() >= n * p) throw NoKernel("operator observes all n p degrees of freedom");
  Rng rng = Rng::stream(seed, kKernelStream);
  DenseMatrix Z(n, p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < n; ++i) Z(i, j) = rng.normal();

  if (op.is_completion()) {
    // S S^* = I: projecting onto the kernel zeroes the observed entries.
    return Z - adjoint(op, apply(op, Z));
  }
  const DenseMatrix& A = op.as_dense().coeffs;
  Eigen::LDLT<DenseMatrix> gram(A * A.transpose());
  if (gram.info() != Eigen::Success) throw IllPosed("S S^* is singular");
  // Two projection passes keep ||S(H)|| at roundoff level relative to ||H||.
  DenseMatrix H = Z;
  for (int pass = 0; pass < 2; ++pass) {
    H -= adjoint(op, gram.solve(apply(op, H)));
  }
  if (H.norm() == 0.0) throw NoKernel("kernel projection vanished");
  return H;
}

std::vector<Index> transpose_permutation(const MeasurementOp& op) {
  // perm[a] = measurement index of old measurement a in the transposed problem.
  std::vector<Index> perm(op.size());
  if (!op.is_completion()) {
    std::iota(perm.begin(), perm.end(), Index{0});
    return perm;
  }
  const auto& c = op.as_completion();
  // In the transposed problem, blocks are old rows and entries within a
  // block are sorted by old column.
  std::vector<Index> count(c.n + 1, 0);
  for (Index j = 0; j < c.p; ++j)
    for (Index i : c.rows_by_col[j]) ++count[i + 1];
  for (Index i = 0; i < c.n; ++i) count[i + 1] += count[i];
  for (Index j = 0; j < c.p; ++j) {
    Index a = c.offsets[j];
    for (Index i : c.rows_by_col[j]) perm[a++] = count[i]++;
  }
  return perm;
}

std::pair<MeasurementOp, MeasurementVec> transpose_problem(const MeasurementOp& op,
                                                            const MeasurementVec& M) {
  if (M.size() != op.size()) throw InvalidArgument("measurement vector length mismatch");
  const Index n = op.rows();
  const Index p = op.cols();
  if (op.is_completion()) {
    std::vector<Entry> flipped;
    flipped.reserve(op.size());
    for (const Entry& e : op.entries()) flipped.push_back({e.col, e.row});
    const std::vector<Index> perm = transpose_permutation(op);
    MeasurementVec Mt(M.size());
    for (Index a = 0; a < M.size(); ++a) Mt(perm[a]) = M(a);
    return {MeasurementOp::completion(p, n, flipped), std::move(Mt)};
  }
  const DenseMatrix& A = op.as_dense().coeffs;
  DenseMatrix At(A.rows(), A.cols());
  for (Index a = 0; a < A.rows(); ++a) {
    const DenseMatrix row = A.row(a).reshaped(n, p);
    At.row(a) = row.transpose().reshaped().transpose();
  }
  return {MeasurementOp::dense(std::move(At), p, n), M};
}

MaskFile read_mask(std::istream& in) {
  MaskFile mask;
  if (!(in >> mask.n >> mask.p) || mask.n < 1 || mask.p < 1) {
    throw FormatError("mask header must be 'n p' with positive sizes");
  }
  Index row = 0;
  Index col = 0;
  while (in >> row) {
    if (!(in >> col)) throw FormatError("mask line has a row index without a column index");
    mask.entries.push_back({row, col});
  }
  if (!in.eof()) throw FormatError("mask file has a non-integer token");
  return mask;
}

void write_mask(std::ostream& out, Index n, Index p, std::span<const Entry> entries) {
  std::ostringstream buf;
  buf << n << ' ' << p << '\n';
  for (const Entry& e : entries) buf << e.row << ' ' << e.col << '\n';
  out << buf.str();
}

std::vector<double> read_values(std::istream& in) {
  std::vector<double> values;
  double v = 0.0;
  while (in >> v) {
    if (!std::isfinite(v)) throw FormatError("values file has a non-finite entry");
    values.push_back(v);
  }
  if (!in.eof()) throw FormatError("values file has a non-numeric token");
  return values;
}

}  // namespace lrmr
