#ifndef JBD_GSVD_HPP
#define JBD_GSVD_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "jbd/dense.hpp"
#include "jbd/inner_solver.hpp"
#include "jbd/jbd.hpp"
#include "jbd/sparse.hpp"

namespace jbd
{

/// Approximate generalized singular pair {c, s} with c^2 + s^2 = 1 and its vectors.
struct RitzApproximation
{
    /// Position in the natural order: descending c for the lower factor,
    /// ascending s for the upper factor.
    std::size_t index = 0;
    double c = 0.0;
    double s = 0.0;
    /// c / s, +infinity when s = 0.
    double gsv = 0.0;
    bool from_upper = false;

    DenseVector w; ///< right singular vector of B_k (or Bhat_k), length k
    DenseVector p; ///< left singular vector of B_k (k+1) or Bhat_k (k)

    std::optional<DenseVector> x;
    std::optional<DenseVector> y;
    std::optional<DenseVector> z;

    /// ||R|| alpha_{k+1} beta_{k+1} |e_k^T w|; NaN for upper-factor pairs.
    double residual_bound = 0.0;
    std::optional<double> residual_direct;
};

double generalized_value(double c, double s);

/// Throws InsufficientSteps when the state has fewer than `count` steps.
std::vector<RitzApproximation> extract_ritz_from_lower(const JbdState& state, std::size_t count,
                                                       Which which, double norm_r = 1.0);
std::vector<RitzApproximation> extract_ritz_from_upper(const JbdState& state, std::size_t count,
                                                       Which which);

/// x minimizing ||Z x - Vtilde_k w|| (lower) or ||Z x - Vtilde_k P w|| (upper).
DenseVector recover_right_vector(const StackedOperator& op, const JbdState& state,
                                 std::span<const double> w, const LsqrConfig& cfg,
                                 InnerMode mode, bool upper = false);

struct LeftVectors
{
    DenseVector y;
    std::optional<DenseVector> z;
};

/// y = U_{k+1} p and z = Uhat_k p_hat.
LeftVectors recover_left_vectors(const JbdState& state, const DenseVector& p,
                                 const std::optional<DenseVector>& p_hat);

double residual_bound(const JbdState& state, double w_last_component, double norm_r);

/// ||(s^2 A^T A - c^2 L^T L) x|| by sparse products.
double residual_direct(const SparseMatrix& a, const SparseMatrix& l,
                       const RitzApproximation& ritz);

/// |s_a c_t - s_t c_a|
double angle_error(double c_approx, double s_approx, double c_true, double s_true);

/// Fills x, y (lower) or x, z (upper) and the direct residual.
void complete_vectors(const StackedOperator& op, const JbdState& state, RitzApproximation& ritz,
                      const LsqrConfig& cfg, InnerMode mode);

/// Relabels a pair computed on the swapped stack (L; A) in terms of {A, L}.
void unswap(RitzApproximation& ritz);

} // namespace jbd

#endif
