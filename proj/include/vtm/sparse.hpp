#pragma once

/// Minimal sparse matrices (CSR) with a triplet builder, plus a 2x2 block
/// composer for the monolithic mixed systems.

#include <Eigen/Sparse>
#include <algorithm>
#include <fstream>
#include <numeric>
#include <vector>

#include "vtm/core.hpp"

namespace vtm {

struct Triplets {
  index_t nrows = 0, ncols = 0;
  std::vector<Eigen::Triplet<double>> entries;

  Triplets(index_t nr, index_t nc) : nrows(nr), ncols(nc) {}
  void add(index_t i, index_t j, double v) {
    if (v != 0.0) entries.emplace_back(i, j, v);
  }
};

class SparseMatrix {
 public:
  index_t nrows = 0, ncols = 0;
  std::vector<index_t> row_ptr; // size nrows + 1
  std::vector<index_t> col_idx;
  std::vector<double> values;

  SparseMatrix() = default;

  static SparseMatrix from_triplets(const Triplets& t) {
    Eigen::SparseMatrix<double, Eigen::RowMajor> m(t.nrows, t.ncols);
    m.setFromTriplets(t.entries.begin(), t.entries.end());
    m.makeCompressed();
    SparseMatrix out;
    out.nrows = t.nrows;
    out.ncols = t.ncols;
    out.row_ptr.assign(m.outerIndexPtr(), m.outerIndexPtr() + t.nrows + 1);
    out.col_idx.assign(m.innerIndexPtr(), m.innerIndexPtr() + m.nonZeros());
    out.values.assign(m.valuePtr(), m.valuePtr() + m.nonZeros());
    return out;
  }

  index_t nnz() const { return static_cast<index_t>(values.size()); }

  Eigen::VectorXd operator*(const Eigen::VectorXd& x) const {
    require(x.size() == ncols, "matvec: size mismatch");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(nrows);
    for (index_t i = 0; i < nrows; ++i) {
      double acc = 0.0;
      for (index_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
        acc += values[k] * x[col_idx[k]];
      y[i] = acc;
    }
    return y;
  }

  /// y = A^T x without forming the transpose.
  Eigen::VectorXd transpose_apply(const Eigen::VectorXd& x) const {
    require(x.size() == nrows, "transpose_apply: size mismatch");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(ncols);
    for (index_t i = 0; i < nrows; ++i)
      for (index_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
        y[col_idx[k]] += values[k] * x[i];
    return y;
  }

  Eigen::SparseMatrix<double> to_eigen() const {
    Eigen::SparseMatrix<double> m(nrows, ncols);
    std::vector<Eigen::Triplet<double>> tr;
    tr.reserve(values.size());
    for (index_t i = 0; i < nrows; ++i)
      for (index_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
        tr.emplace_back(i, col_idx[k], values[k]);
    m.setFromTriplets(tr.begin(), tr.end());
    return m;
  }

  /// MatrixMarket coordinate dump (1-based), for offline inspection.
  void write_matrix_market(const std::string& path) const {
    std::ofstream out(path);
    require(out.good(), "write_matrix_market: cannot open " + path);
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << nrows << " " << ncols << " " << nnz() << "\n";
    out.precision(17);
    for (index_t i = 0; i < nrows; ++i)
      for (index_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
        out << i + 1 << " " << col_idx[k] + 1 << " " << values[k] << "\n";
  }
};

/// Sparse-sparse product A * B (delegated to Eigen).
inline SparseMatrix multiply(const SparseMatrix& A, const SparseMatrix& B) {
  require(A.ncols == B.nrows, "multiply: shape mismatch");
  Eigen::SparseMatrix<double, Eigen::RowMajor> m =
      (A.to_eigen() * B.to_eigen()).pruned();
  m.makeCompressed();
  SparseMatrix out;
  out.nrows = A.nrows;
  out.ncols = B.ncols;
  out.row_ptr.assign(m.outerIndexPtr(), m.outerIndexPtr() + out.nrows + 1);
  out.col_idx.assign(m.innerIndexPtr(), m.innerIndexPtr() + m.nonZeros());
  out.values.assign(m.valuePtr(), m.valuePtr() + m.nonZeros());
  return out;
}

inline SparseMatrix transpose(const SparseMatrix& A) {
  Triplets t(A.ncols, A.nrows);
  t.entries.reserve(A.nnz());
  for (index_t i = 0; i < A.nrows; ++i)
    for (index_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
      t.add(A.col_idx[k], i, A.values[k]);
  return SparseMatrix::from_triplets(t);
}

/// a*A + b*B with general (different) sparsity patterns.
inline SparseMatrix add_scaled(double a, const SparseMatrix& A, double b,
                               const SparseMatrix& B) {
  require(A.nrows == B.nrows && A.ncols == B.ncols, "add_scaled: shape mismatch");
  Triplets t(A.nrows, A.ncols);
  t.entries.reserve(A.nnz() + B.nnz());
  for (index_t i = 0; i < A.nrows; ++i)
    for (index_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
      t.add(i, A.col_idx[k], a * A.values[k]);
  for (index_t i = 0; i < B.nrows; ++i)
    for (index_t k = B.row_ptr[i]; k < B.row_ptr[i + 1]; ++k)
      t.add(i, B.col_idx[k], b * B.values[k]);
  return SparseMatrix::from_triplets(t);
}

/// Append a scaled block of A into a monolithic triplet set at the offsets.
inline void add_block(Triplets& t, const SparseMatrix& A, index_t row_off,
                      index_t col_off, double scale = 1.0) {
  for (index_t i = 0; i < A.nrows; ++i)
    for (index_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
      t.add(row_off + i, col_off + A.col_idx[k], scale * A.values[k]);
}

/// Monolithic 2x2 block system [[A00, A01], [A10, A11]].
struct BlockSystem {
  index_t n0 = 0, n1 = 0;
  SparseMatrix matrix;

  static BlockSystem assemble(const SparseMatrix& A00, const SparseMatrix& A01,
                              const SparseMatrix& A10, const SparseMatrix& A11) {
    require(A00.nrows == A01.nrows && A10.nrows == A11.nrows &&
                A00.ncols == A10.ncols && A01.ncols == A11.ncols,
            "block system: inconsistent block shapes");
    BlockSystem sys;
    sys.n0 = A00.nrows;
    sys.n1 = A10.nrows;
    Triplets t(sys.n0 + sys.n1, A00.ncols + A01.ncols);
    add_block(t, A00, 0, 0);
    add_block(t, A01, 0, A00.ncols);
    add_block(t, A10, sys.n0, 0);
    add_block(t, A11, sys.n0, A00.ncols);
    sys.matrix = SparseMatrix::from_triplets(t);
    return sys;
  }
};

} // namespace vtm
