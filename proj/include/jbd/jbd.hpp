#ifndef JBD_JBD_HPP
#define JBD_JBD_HPP

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "jbd/bidiag.hpp"
#include "jbd/dense.hpp"
#include "jbd/inner_solver.hpp"
#include "jbd/sparse.hpp"

namespace jbd
{

enum class ReorthKind
{
    None,
    Full,
    OneSided,
    Semi,
};

/// Denominator of the semiorthogonality bar sqrt(delta / den).
enum class SemiDenominator
{
    TwoKPlusOne,
    K,
};

struct ReorthStrategy
{
    ReorthKind kind = ReorthKind::Full;
    SemiDenominator denominator = SemiDenominator::TwoKPlusOne;
    /// Semi mode evaluates the bar with max(k, horizon) so that pairs accepted
    /// early still satisfy the bar at the end of a run of `horizon` steps.
    std::size_t horizon = 0;

    /// sqrt(inv_norm * eps / den(k)).
    double bar(std::size_t k, double inv_norm) const;
};

enum class Which
{
    Largest,
    Smallest,
};

/// `which` refers to the generalized singular values of the pair as it is
/// stored in the operator; callers that swapped the pair flip it first.
struct StoppingRule
{
    std::size_t target = 1;
    Which which = Which::Largest;
    double tolerance = 1e-10;
    double norm_r = 1.0;
};

struct JbdConfig
{
    ReorthStrategy strategy;
    LsqrConfig lsqr;
    InnerMode mode = InnerMode::Reference;
    /// ||Z|| estimate; 0 asks jbd_init to run estimate_stacked_norm.
    double norm_estimate = 0.0;
    std::size_t norm_iterations = 30;
};

/// After k completed steps: u holds u_1..u_{k+1}, vtilde holds
/// vtilde_1..vtilde_{k+1}, uhat holds uhat_1..uhat_{k+1}; on breakdown the
/// trailing vector that would have been zero is absent.
struct JbdState
{
    std::size_t m = 0;
    std::size_t p = 0;
    std::size_t n = 0;
    std::size_t steps = 0;

    DenseMatrix u;
    DenseMatrix vtilde;
    DenseMatrix uhat;

    std::vector<double> alpha;
    std::vector<double> beta;
    std::vector<double> alpha_hat;
    std::vector<double> beta_hat;

    JbdConfig config;
    double norm_estimate = 0.0;
    double breakdown_tolerance = 0.0;
    bool terminated = false;
    std::string breakdown_detail;

    /// Semi mode bookkeeping: reorthogonalizations triggered per basis.
    std::size_t semi_u_reorths = 0;
    std::size_t semi_v_reorths = 0;

    /// B_k
    LowerBidiagonal lower() const;
    /// Bhat_k
    UpperBidiagonal upper() const;
    double alpha_next() const { return alpha.size() > steps ? alpha[steps] : 0.0; }
    double beta_next() const { return beta.size() > steps ? beta[steps] : 0.0; }
};

/// beta_1 u_1 = b, alpha_1 vtilde_1 = Q Q^T (u_1; 0), alpha_hat_1 uhat_1 =
/// vtilde_1(m+1:m+p). Throws ZeroStart or Breakdown.
JbdState jbd_init(const StackedOperator& op, const DenseVector& b, const JbdConfig& cfg);

/// One iteration of the joint recurrence. On a tiny coefficient the state is
/// marked terminated and false is returned.
bool jbd_step(const StackedOperator& op, JbdState& state);

struct StepRecord
{
    std::size_t k = 0;
    /// Singular values of B_k, descending.
    std::vector<double> ritz_lower;
    /// Singular values of Bhat_k, descending (empty unless recorded).
    std::vector<double> ritz_upper;
    /// Indices into ritz_lower picked by the stopping rule and their bounds.
    std::vector<std::size_t> selected;
    std::vector<double> bounds;
    double inv_norm_lower = 0.0; ///< 1 / sigma_min of the square k x k part of B_k
    double inv_norm_upper = 0.0; ///< 1 / sigma_min(Bhat_k)
    double norm_lower = 0.0;     ///< ||B_k||
    double norm_upper = 0.0;     ///< ||Bhat_k P|| = ||Bhat_k||
    double defect_norm = 0.0;    ///< ||E_k||
};

enum class Termination
{
    MaxSteps,
    Converged,
    Breakdown,
};

std::string_view to_string(Termination t) noexcept;

struct RunOptions
{
    bool record_upper = true;
    /// Called after every accepted step with the live state and its record.
    std::function<void(const JbdState&, const StepRecord&)> on_step;
};

struct RunResult
{
    JbdState state;
    std::vector<StepRecord> history;
    Termination termination = Termination::MaxSteps;
};

/// Indices of the `count` values at the requested end of a descending list.
std::vector<std::size_t> select_indices(std::size_t size, std::size_t count, Which which);

RunResult run_jbd(const StackedOperator& op, const DenseVector& b, JbdConfig cfg,
                  std::size_t max_steps, const StoppingRule& stop, const RunOptions& options = {});

enum class SwapHint
{
    Auto,
    Keep,
    Swap,
};

struct SwapDecision
{
    StackedOperator op;
    bool swapped = false;
    double kappa_a = 0.0;
    double kappa_l = 0.0;
};

/// Orders the pair so the better-conditioned factor sits on top.
SwapDecision maybe_swap_pair(const SparseMatrix& a, const SparseMatrix& l, SwapHint hint,
                             std::size_t iterations = 20);

inline Which flip(Which w) { return w == Which::Largest ? Which::Smallest : Which::Largest; }

} // namespace jbd

#endif
