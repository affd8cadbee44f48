#ifndef JBD_DENSE_HPP
#define JBD_DENSE_HPP

#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <vector>

#include "jbd/error.hpp"

namespace jbd
{

/// Unit roundoff as used throughout the bounds (2.22e-16 in IEEE double).
inline constexpr double kEps = std::numeric_limits<double>::epsilon();

class DenseVector
{
  public:
    DenseVector() = default;
    explicit DenseVector(std::size_t n, double value = 0.0);
    /// Throws NonFinite if any entry is NaN or Inf.
    explicit DenseVector(std::vector<double> entries);
    DenseVector(std::initializer_list<double> entries);

    static DenseVector unit(std::size_t n, std::size_t i);

    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> span() noexcept { return data_; }
    std::span<const double> span() const noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

  private:
    std::vector<double> data_;
};

/// Column-major dense matrix. Columns are contiguous so a Lanczos basis can
/// grow by appending a column without relayout.
class DenseMatrix
{
  public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double value = 0.0);
    /// Column-major entries; throws DimensionMismatch / NonFinite.
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

    static DenseMatrix identity(std::size_t n);
    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

    std::span<double> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
    std::span<const double> col(std::size_t j) const
    {
        return {data_.data() + j * rows_, rows_};
    }
    DenseVector column(std::size_t j) const;

    /// Appends a column; an empty matrix adopts the column length as its row count.
    void append_column(std::span<const double> values);
    /// Leading `count` columns as a new matrix.
    DenseMatrix leading_columns(std::size_t count) const;
    /// Rows [first, first + count) of every column.
    DenseMatrix row_block(std::size_t first, std::size_t count) const;

    DenseMatrix transposed() const;

    std::span<const double> entries() const noexcept { return data_; }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Level-1 kernels on spans.
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale(double a, std::span<double> x);

inline double norm2(const DenseVector& x) { return norm2(x.span()); }
inline double dot(const DenseVector& x, const DenseVector& y) { return dot(x.span(), y.span()); }

DenseVector operator+(const DenseVector& x, const DenseVector& y);
DenseVector operator-(const DenseVector& x, const DenseVector& y);
DenseVector operator*(double a, const DenseVector& x);

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(double a, const DenseMatrix& m);

/// y = M x
DenseVector multiply(const DenseMatrix& m, std::span<const double> x);
/// y = M^T x
DenseVector multiply_transposed(const DenseMatrix& m, std::span<const double> x);
/// C = A B
DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);
/// C = A^T B
DenseMatrix multiply_transposed(const DenseMatrix& a, const DenseMatrix& b);

double frobenius_norm(const DenseMatrix& m);

/// Eigenvalues (ascending) of a symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off` (size n-1). Implicit QL.
std::vector<double> symmetric_tridiagonal_eigenvalues(std::vector<double> diag,
                                                      std::vector<double> off);
/// Eigenvalues (ascending) of a symmetric matrix; only the lower triangle is read.
std::vector<double> symmetric_eigenvalues(const DenseMatrix& m);
/// Largest singular value, through the Gram matrix of the narrower side.
double spectral_norm(const DenseMatrix& m);
/// max |lambda| of a symmetric matrix.
double symmetric_spectral_norm(const DenseMatrix& m);

struct QrFactors
{
    DenseMatrix q; ///< rows x cols, orthonormal columns
    DenseMatrix r; ///< cols x cols, upper triangular with nonnegative diagonal
};

/// Householder QR of a tall full-column-rank matrix. Throws RankDeficient when
/// |R_jj| <= max(rows, cols) * eps * ||M||_F.
QrFactors householder_qr(const DenseMatrix& m);

/// Solves R x = b for upper triangular R.
DenseVector solve_upper(const DenseMatrix& r, std::span<const double> b);

/// Modified Gram-Schmidt sweep(s) of `v` against the unit columns of `basis`.
/// Passes must be 1 or 2. Throws BreakdownToZero when the result collapses.
DenseVector mgs_orthogonalize(const DenseVector& v, const DenseMatrix& basis, int passes);

/// In-place variant over the leading `count` columns; never throws.
void orthogonalize_in_place(std::span<double> v, const DenseMatrix& basis, std::size_t count,
                            int passes);

/// Largest |basis_j^T v| over the leading `count` columns.
double max_abs_inner(std::span<const double> v, const DenseMatrix& basis, std::size_t count);

/// sin of the angle between x and y, both normalized first.
double subspace_angle_sin(const DenseVector& x, const DenseVector& y);

} // namespace jbd

#endif
