#ifndef JBD_SPARSE_HPP
#define JBD_SPARSE_HPP

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "jbd/dense.hpp"

namespace jbd
{

struct Triplet
{
    std::size_t row;
    std::size_t col;
    double value;
};

/// Immutable compressed-row matrix. Stored values are finite and nonzero and
/// column indices are strictly increasing within each row.
class SparseMatrix
{
  public:
    SparseMatrix() = default;
    /// Validates the CSR arrays; throws DimensionMismatch or NonFinite.
    SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                 std::vector<std::size_t> col_idx, std::vector<double> values);

    /// Duplicates are summed and entries that sum to zero are dropped.
    static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                      std::vector<Triplet> entries);
    static SparseMatrix from_dense(const DenseMatrix& m);
    static SparseMatrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return values_.size(); }

    const std::vector<std::size_t>& row_ptr() const noexcept { return row_ptr_; }
    const std::vector<std::size_t>& col_idx() const noexcept { return col_idx_; }
    const std::vector<double>& values() const noexcept { return values_; }

    DenseMatrix to_dense() const;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
};

DenseVector matvec(const SparseMatrix& m, std::span<const double> x);
DenseVector matvec_transposed(const SparseMatrix& m, std::span<const double> y);

inline DenseVector matvec(const SparseMatrix& m, const DenseVector& x)
{
    return matvec(m, x.span());
}
inline DenseVector matvec_transposed(const SparseMatrix& m, const DenseVector& y)
{
    return matvec_transposed(m, y.span());
}

/// Vertical concatenation (A; L).
SparseMatrix stack(const SparseMatrix& top, const SparseMatrix& bottom);

/// Reads a coordinate real/integer Matrix Market file, general or symmetric.
SparseMatrix read_matrix_market(const std::filesystem::path& path);
/// Writes coordinate real general with 17 significant digits.
void write_matrix_market(const SparseMatrix& m, const std::filesystem::path& path);

} // namespace jbd

#endif
