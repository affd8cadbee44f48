#ifndef JBD_DIAGNOSTICS_HPP
#define JBD_DIAGNOSTICS_HPP

#include <cstddef>
#include <optional>

#include "jbd/dense.hpp"
#include "jbd/inner_solver.hpp"
#include "jbd/jbd.hpp"

namespace jbd
{

/// Tolerance constants shared by every verifier and plotted bound.
struct DiagnosticTolerances
{
    double base = 100.0 * kEps;      ///< additive floor for the hard checks
    double relative_slack = 1e-8;    ///< relative slack on the deviation check
    double plot_factor = 10.0;       ///< factor in the plotted O(||B^{-1}|| eps) bounds
};

struct OrthoLevels
{
    double xi = 0.0;  ///< max_{i != j} |w_i^T w_j|
    double eta = 0.0; ///< ||I - W^T W||
};

/// Levels of the leading `count` columns of W (all columns by default).
OrthoLevels ortho_levels(const DenseMatrix& w, std::optional<std::size_t> count = std::nullopt);

/// Norms of the recurrence error matrices at the current step.
struct ErrorMatrixNorms
{
    std::size_t k = 0;
    double f_tilde = 0.0;    ///< (I,0) Vt_k - U_{k+1} B_k
    double g_tilde = 0.0;    ///< Q Q^T (U_{k+1}; 0) - Vt_k B_k^T - alpha_{k+1} vt_{k+1} e^T
    double f_bar = 0.0;      ///< (0,I) Vt_k P - Uhat_k Bhat_k
    double f = 0.0;          ///< Q_A V_k - U_{k+1} B_k
    double g = 0.0;          ///< Q_A^T U_{k+1} - V_k B_k^T - alpha_{k+1} v_{k+1} e^T
    double e = 0.0;          ///< ||E_k||
    double f_hat = 0.0;      ///< Q_L Vhat_k - Uhat_k Bhat_k
    double g_hat = 0.0;      ///< Q_L^T Uhat_k - Vhat_k Bhat_k^T - beta_hat_k vhat_{k+1} e_k^T
    double deviation = 0.0;  ///< ||Vt_k - Q V_k||
    double inv_norm_lower = 0.0;
    double inv_norm_upper = 0.0;
};

/// Throws MissingCache unless the operator carries its dense QR.
ErrorMatrixNorms measure_recurrence_errors(const JbdState& state, const StackedOperator& op);

struct Verification
{
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// lhs = ||Vt_k - Q V_k||, rhs = ||Gt_k Bsq_k^{-1}|| where Bsq_k is the
/// square k x k recurrence matrix and Gt_k = Q Q^T (U_k; 0) - Vt_k Bsq_k.
Verification verify_column_space_deviation(const JbdState& state, const StackedOperator& op,
                                           const DiagnosticTolerances& tol = {});

/// lhs = eta(Uhat_k), rhs = ||Bhat_k^{-1}||^2 (eta(Vt_k) + 2 eta(U_{k+1}) + base).
Verification verify_uhat_orthogonality_bound(const JbdState& state,
                                             const DiagnosticTolerances& tol = {});

/// lhs = |eta(Vt_k) - eta(V_k)|, rhs = ||Bsq_k^{-1}||^2 base^2 + base.
Verification verify_vtilde_v_orthogonality_gap(const JbdState& state, const StackedOperator& op,
                                               const DiagnosticTolerances& tol = {});

/// One row of the per-step diagnostics table. Q-dependent entries are NaN
/// when no dense QR is available.
struct DiagnosticRow
{
    std::size_t k = 0;
    double eta_u = 0.0;
    double eta_vtilde = 0.0;
    double eta_uhat = 0.0;
    double uhat_bound = 0.0;
    double norm_f = 0.0;
    double bound_f = 0.0;
    double norm_e = 0.0;
    double norm_f_hat = 0.0;
    double norm_g_hat = 0.0;
    double inv_norm_lower = 0.0;
    double inv_norm_upper = 0.0;
    double bound_g_hat = 0.0;
};

DiagnosticRow diagnostics_row(const JbdState& state, const StackedOperator* op,
                              const DiagnosticTolerances& tol = {});

} // namespace jbd

#endif
