#ifndef JBD_BIDIAG_HPP
#define JBD_BIDIAG_HPP

#include <cstddef>
#include <vector>

#include "jbd/dense.hpp"

namespace jbd
{

struct UpperBidiagonal;

/// B_k: (k+1) x k lower bidiagonal with diagonal alpha[0..k-1] and
/// subdiagonal beta[1..k]. beta[0] holds the norm of the starting vector.
struct LowerBidiagonal
{
    std::vector<double> alpha;
    std::vector<double> beta;

    std::size_t order() const noexcept { return alpha.size(); }
    /// Throws DimensionMismatch unless beta has order() + 1 entries.
    void validate() const;
    DenseMatrix to_dense() const;
    /// Transpose of the leading k x k block (drop the last row of B_k). It has
    /// the same singular values, so 1 / its sigma_min is the inverse norm of
    /// the square recurrence matrix.
    UpperBidiagonal leading_square_transposed() const;
};

/// k x k upper bidiagonal with diagonal alpha_hat and superdiagonal beta_hat.
struct UpperBidiagonal
{
    std::vector<double> alpha_hat;
    std::vector<double> beta_hat;

    std::size_t order() const noexcept { return alpha_hat.size(); }
    void validate() const;
    DenseMatrix to_dense() const;
};

/// P = diag(1, -1, 1, ...).
struct SignAlternation
{
    std::size_t order = 0;

    static double sign(std::size_t i) noexcept { return (i % 2 == 0) ? 1.0 : -1.0; }
    DenseMatrix to_dense() const;
    /// M P: flips the sign of every odd column.
    DenseMatrix apply_right(const DenseMatrix& m) const;
    /// P M: flips the sign of every odd row.
    DenseMatrix apply_left(const DenseMatrix& m) const;
};

enum class SvdVectors
{
    None,
    /// Only the last row of the right factor (what residual bounds need).
    LastRightRow,
    Full,
};

/// Singular values in descending order; B = left * diag(values) * right^T.
/// With SvdVectors::LastRightRow, `right` is 1 x k and `left` is empty.
struct BidiagonalSvd
{
    std::vector<double> values;
    DenseMatrix left;
    DenseMatrix right;
};

BidiagonalSvd svd_lower(const LowerBidiagonal& b, SvdVectors want = SvdVectors::Full);
BidiagonalSvd svd_upper(const UpperBidiagonal& b, SvdVectors want = SvdVectors::Full);

double smallest_singular_value(const LowerBidiagonal& b);
double smallest_singular_value(const UpperBidiagonal& b);
double largest_singular_value(const LowerBidiagonal& b);
double largest_singular_value(const UpperBidiagonal& b);

/// beta_hat_i = alpha_{i+1} beta_{i+1} / alpha_hat_i. Throws Breakdown when
/// alpha_hat <= tolerance.
double coupling_coefficient(double alpha_next, double beta_next, double alpha_hat,
                            double tolerance = 0.0);

/// E_k = B_k^T B_k + P Bhat_k^T Bhat_k P - I as a symmetric tridiagonal.
struct IdentityDefect
{
    std::vector<double> diag;
    std::vector<double> off;
    double norm = 0.0;
};

IdentityDefect identity_defect(const LowerBidiagonal& b, const UpperBidiagonal& bhat);
/// Same matrix formed densely; used to cross-check the banded record.
DenseMatrix identity_defect_dense(const LowerBidiagonal& b, const UpperBidiagonal& bhat);

/// Right singular vector of B_k for the singular value `sigma` by inverse
/// iteration on B_k^T B_k - sigma^2 I. O(k); unit norm.
DenseVector right_singular_vector(const LowerBidiagonal& b, double sigma);
/// B_k w / ||B_k w||.
DenseVector left_from_right(const LowerBidiagonal& b, const DenseVector& w);

/// Low-level kernel: SVD of the upper bidiagonal (d, e) by implicit QR with
/// Demmel-Kahan zero-shift sweeps. On return d holds the (unsorted, possibly
/// negative) singular values and e is zero. Left rotations are applied to the
/// leading d.size() columns of *left, right rotations to those of *right.
void bidiagonal_qr(std::vector<double>& d, std::vector<double>& e, DenseMatrix* left,
                   DenseMatrix* right);

} // namespace jbd

#endif
