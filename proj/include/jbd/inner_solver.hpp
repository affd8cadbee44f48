#ifndef JBD_INNER_SOLVER_HPP
#define JBD_INNER_SOLVER_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <span>

#include "jbd/bidiag.hpp"
#include "jbd/dense.hpp"
#include "jbd/sparse.hpp"

namespace jbd
{

enum class InnerMode
{
    Reference,
    Iterative,
};

struct LsqrConfig
{
    double atol = 100.0 * kEps;
    double btol = 100.0 * kEps;
    std::size_t max_iterations = 2000;

    /// Throws InvalidConfig unless both tolerances lie in (0, 1) and
    /// max_iterations >= 1.
    void validate() const;
};

/// Z = (A; L) with an optional dense thin QR of Z for exact projections.
class StackedOperator
{
  public:
    StackedOperator(SparseMatrix a, SparseMatrix l);

    std::size_t rows_a() const noexcept { return a_.rows(); }
    std::size_t rows_l() const noexcept { return l_.rows(); }
    std::size_t rows() const noexcept { return a_.rows() + l_.rows(); }
    std::size_t cols() const noexcept { return a_.cols(); }

    const SparseMatrix& a() const noexcept { return a_; }
    const SparseMatrix& l() const noexcept { return l_; }

    /// Householder QR of the dense stack. Throws RankDeficient.
    void build_cache();
    bool has_cache() const noexcept { return q_.has_value(); }
    /// Throws MissingCache when build_cache has not run.
    const DenseMatrix& q() const;
    const DenseMatrix& r() const;

    /// Z x
    DenseVector apply(std::span<const double> x) const;
    /// Z^T y
    DenseVector apply_transposed(std::span<const double> y) const;

  private:
    SparseMatrix a_;
    SparseMatrix l_;
    std::optional<DenseMatrix> q_;
    std::optional<DenseMatrix> r_;
};

struct Projection
{
    DenseVector projected; ///< Z x ~ Q Q^T u
    DenseVector x;         ///< argmin ||Z x - u||
    std::size_t iterations = 0;
};

Projection project(const StackedOperator& op, std::span<const double> u_padded,
                   const LsqrConfig& cfg, InnerMode mode);

/// Projection of (u_top; 0) where u_top has length rows_a(). In reference
/// mode only the top block of Q is touched.
Projection project_top(const StackedOperator& op, std::span<const double> u_top,
                       const LsqrConfig& cfg, InnerMode mode);

struct LsqrResult
{
    DenseVector x;
    std::size_t iterations = 0;
    double residual_norm = 0.0;
    double normal_residual_norm = 0.0;
};

/// Paige-Saunders LSQR for min ||Z x - b||. Throws NotConverged when
/// max_iterations is hit before either stopping test holds.
LsqrResult lsqr(const StackedOperator& op, std::span<const double> b, const LsqrConfig& cfg);

using Applier = std::function<DenseVector(std::span<const double>)>;

/// Golub-Kahan lower bidiagonalization M V_k = U_{k+1} B_k.
struct LanczosState
{
    DenseMatrix u;         ///< u_1 .. u_{k+1}
    DenseMatrix v;         ///< v_1 .. v_{k+1} (the last one while running)
    LowerBidiagonal b;     ///< alpha_1 .. alpha_{k+1}, beta_1 .. beta_{k+1}
    std::size_t steps = 0; ///< k
    double tolerance = 0.0;
    bool reorthogonalize = true;
    bool terminated = false;

    /// B_k built from alpha_1..alpha_k and beta_1..beta_{k+1}.
    LowerBidiagonal bidiagonal() const;
};

/// beta_1 u_1 = b, alpha_1 v_1 = M^T u_1. `tolerance` is the breakdown
/// threshold for every later coefficient. Throws ZeroStart on b = 0 and
/// Breakdown if alpha_1 already vanishes.
LanczosState lanczos_init(std::span<const double> b, const Applier& mt, double tolerance,
                          bool reorthogonalize);

/// One step: p = M v_i - alpha_i u_i, r = M^T u_{i+1} - beta_{i+1} v_i.
/// Returns false (and marks the state terminated) on breakdown; stepping a
/// terminated state throws Breakdown.
bool lanczos_bidiag_step(LanczosState& state, const Applier& m, const Applier& mt);

/// Largest singular value of B_k after `iterations` steps on Z from the
/// all-ones start. A lower bound on ||Z|| that is nondecreasing in iterations.
double estimate_stacked_norm(const StackedOperator& op, std::size_t iterations);

/// Rough condition number of M from a short bidiagonalization; never larger
/// than the true value (up to rounding).
double estimate_condition(const SparseMatrix& m, std::size_t iterations);

} // namespace jbd

#endif
