#include "jbd/jbd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace jbd
{

double ReorthStrategy::bar(std::size_t k, double inv_norm) const
{
    const double kk = static_cast<double>(std::max(k, horizon));
    const double den = denominator == SemiDenominator::TwoKPlusOne ? 2.0 * kk + 1.0 : kk;
    return std::sqrt(inv_norm * kEps / std::max(den, 1.0));
}

std::string_view to_string(Termination t) noexcept
{
    switch (t)
    {
    case Termination::MaxSteps: return "max_steps";
    case Termination::Converged: return "converged";
    case Termination::Breakdown: return "breakdown";
    }
    return "unknown";
}

LowerBidiagonal JbdState::lower() const
{
    LowerBidiagonal b;
    b.alpha.assign(alpha.begin(), alpha.begin() + static_cast<long>(steps));
    b.beta.assign(beta.begin(), beta.begin() + static_cast<long>(steps + 1));
    return b;
}

UpperBidiagonal JbdState::upper() const
{
    UpperBidiagonal b;
    b.alpha_hat.assign(alpha_hat.begin(), alpha_hat.begin() + static_cast<long>(steps));
    if (steps > 1)
    {
        b.beta_hat.assign(beta_hat.begin(), beta_hat.begin() + static_cast<long>(steps - 1));
    }
    return b;
}

namespace
{

std::span<const double> top_part(const DenseMatrix& vt, std::size_t j, std::size_t m)
{
    return vt.col(j).subspan(0, m);
}

std::span<const double> bottom_part(const DenseMatrix& vt, std::size_t j, std::size_t m)
{
    return vt.col(j).subspan(m);
}

// Inverse norm of the square recurrence matrix available so far.
double current_inverse_norm(const JbdState& s)
{
    if (s.steps == 0)
    {
        return 1.0 / s.alpha[0];
    }
    const double smin = smallest_singular_value(s.lower().leading_square_transposed());
    return smin > 0.0 ? 1.0 / smin : std::numeric_limits<double>::infinity();
}

// Applies the configured rule to `w` before it is normalized against `basis`.
// Returns true if an explicit reorthogonalization happened.
bool reorthogonalize(std::span<double> w, const DenseMatrix& basis, bool always, bool semi,
                     double bar)
{
    if (always)
    {
        orthogonalize_in_place(w, basis, basis.cols(), 2);
        return true;
    }
    if (semi)
    {
        const double nrm = norm2(w);
        if (nrm > 0.0 && max_abs_inner(w, basis, basis.cols()) / nrm > bar)
        {
            orthogonalize_in_place(w, basis, basis.cols(), 2);
            return true;
        }
    }
    return false;
}

} // namespace

JbdState jbd_init(const StackedOperator& op, const DenseVector& b, const JbdConfig& cfg)
{
    if (b.size() != op.rows_a())
    {
        throw Error(ErrorKind::DimensionMismatch,
                    "starting vector has length " + std::to_string(b.size()) + ", expected " +
                        std::to_string(op.rows_a()));
    }
    cfg.lsqr.validate();
    if (cfg.mode == InnerMode::Reference && !op.has_cache())
    {
        throw Error(ErrorKind::MissingCache, "reference mode needs the dense QR of Z");
    }
    JbdState s;
    s.m = op.rows_a();
    s.p = op.rows_l();
    s.n = op.cols();
    s.config = cfg;
    s.norm_estimate =
        cfg.norm_estimate > 0.0 ? cfg.norm_estimate : estimate_stacked_norm(op, cfg.norm_iterations);
    s.breakdown_tolerance = static_cast<double>(s.m + s.p) * kEps * s.norm_estimate;

    const double beta1 = norm2(b);
    if (beta1 == 0.0)
    {
        throw Error(ErrorKind::ZeroStart, "starting vector is zero");
    }
    DenseVector u1 = (1.0 / beta1) * b;
    Projection pr = project_top(op, u1.span(), cfg.lsqr, cfg.mode);
    const double alpha1 = norm2(pr.projected);
    if (alpha1 <= s.breakdown_tolerance)
    {
        throw Error(ErrorKind::Breakdown, "alpha_1 below breakdown tolerance");
    }
    scale(1.0 / alpha1, pr.projected.span());
    std::vector<double> uh(pr.projected.begin() + static_cast<long>(s.m), pr.projected.end());
    const double alpha_hat1 = norm2(uh);
    if (alpha_hat1 <= s.breakdown_tolerance)
    {
        throw Error(ErrorKind::Breakdown, "alpha_hat_1 below breakdown tolerance");
    }
    scale(1.0 / alpha_hat1, uh);

    s.u.append_column(u1.span());
    s.vtilde.append_column(pr.projected.span());
    s.uhat.append_column(uh);
    s.beta.push_back(beta1);
    s.alpha.push_back(alpha1);
    s.alpha_hat.push_back(alpha_hat1);
    return s;
}

bool jbd_step(const StackedOperator& op, JbdState& s)
{
    if (s.terminated)
    {
        throw Error(ErrorKind::Breakdown, "recurrence already terminated");
    }
    const std::size_t i = s.steps;
    const ReorthKind kind = s.config.strategy.kind;
    const bool semi = kind == ReorthKind::Semi;
    const double tau = s.breakdown_tolerance;
    const double bar = semi ? s.config.strategy.bar(i + 1, current_inverse_norm(s)) : 0.0;

    // beta_{i+1} u_{i+1} = vtilde_i(1:m) - alpha_i u_i
    std::vector<double> r(top_part(s.vtilde, i, s.m).begin(), top_part(s.vtilde, i, s.m).end());
    axpy(-s.alpha[i], s.u.col(i), r);
    if (reorthogonalize(r, s.u, kind == ReorthKind::Full, semi, bar) && semi)
    {
        ++s.semi_u_reorths;
    }
    const double beta = norm2(r);
    if (beta <= tau)
    {
        s.beta.push_back(0.0);
        s.steps = i + 1;
        s.terminated = true;
        s.breakdown_detail = "beta_" + std::to_string(i + 2) + " below tolerance";
        return false;
    }
    scale(1.0 / beta, r);
    s.u.append_column(r);
    s.beta.push_back(beta);

    // alpha_{i+1} vtilde_{i+1} = Q Q^T (u_{i+1}; 0) - beta_{i+1} vtilde_i. Under full
    // reorthogonalization the projector is applied after the subtraction, which
    // keeps vtilde inside range(Q) even when the square B_k is nearly singular.
    DenseVector g;
    if (kind == ReorthKind::Full)
    {
        std::vector<double> padded(s.m + s.p, 0.0);
        std::copy(r.begin(), r.end(), padded.begin());
        axpy(-beta, s.vtilde.col(i), padded);
        g = std::move(project(op, padded, s.config.lsqr, s.config.mode).projected);
    }
    else
    {
        g = std::move(project_top(op, r, s.config.lsqr, s.config.mode).projected);
        axpy(-beta, s.vtilde.col(i), g.span());
    }
    if (reorthogonalize(g.span(), s.vtilde, kind == ReorthKind::Full || kind == ReorthKind::OneSided,
                        semi, bar) &&
        semi)
    {
        ++s.semi_v_reorths;
    }
    const double alpha = norm2(g);
    if (alpha <= tau)
    {
        s.alpha.push_back(0.0);
        s.beta_hat.push_back(0.0);
        s.steps = i + 1;
        s.terminated = true;
        s.breakdown_detail = "alpha_" + std::to_string(i + 2) + " below tolerance";
        return false;
    }
    scale(1.0 / alpha, g.span());
    s.vtilde.append_column(g.span());
    s.alpha.push_back(alpha);

    const double beta_hat = coupling_coefficient(alpha, beta, s.alpha_hat[i]);
    s.beta_hat.push_back(beta_hat);

    // alpha_hat_{i+1} uhat_{i+1} = (-1)^i vtilde_{i+1}(m+1:m+p) - beta_hat_i uhat_i
    const double sign = SignAlternation::sign(i + 1);
    std::vector<double> h(bottom_part(s.vtilde, i + 1, s.m).begin(),
                          bottom_part(s.vtilde, i + 1, s.m).end());
    scale(sign, h);
    axpy(-beta_hat, s.uhat.col(i), h);
    if (kind == ReorthKind::Full)
    {
        orthogonalize_in_place(h, s.uhat, s.uhat.cols(), 2);
    }
    const double alpha_hat = norm2(h);
    s.steps = i + 1;
    if (alpha_hat <= tau)
    {
        s.alpha_hat.push_back(0.0);
        s.terminated = true;
        s.breakdown_detail = "alpha_hat_" + std::to_string(i + 2) + " below tolerance";
        return false;
    }
    scale(1.0 / alpha_hat, h);
    s.uhat.append_column(h);
    s.alpha_hat.push_back(alpha_hat);
    return true;
}

std::vector<std::size_t> select_indices(std::size_t size, std::size_t count, Which which)
{
    count = std::min(count, size);
    std::vector<std::size_t> idx(count);
    for (std::size_t j = 0; j < count; ++j)
    {
        idx[j] = which == Which::Largest ? j : size - 1 - j;
    }
    return idx;
}

RunResult run_jbd(const StackedOperator& op, const DenseVector& b, JbdConfig cfg,
                  std::size_t max_steps, const StoppingRule& stop, const RunOptions& options)
{
    if (max_steps < 1)
    {
        throw Error(ErrorKind::InvalidConfig, "max_steps must be at least 1");
    }
    if (!(stop.tolerance > 0.0) || !(stop.norm_r > 0.0))
    {
        throw Error(ErrorKind::InvalidConfig, "stopping tolerance and norm must be positive");
    }
    if (cfg.strategy.kind == ReorthKind::Semi)
    {
        cfg.strategy.horizon = std::max(cfg.strategy.horizon, max_steps);
    }
    RunResult out;
    out.state = jbd_init(op, b, cfg);
    JbdState& s = out.state;

    while (s.steps < max_steps && !s.terminated)
    {
        jbd_step(op, s);

        StepRecord rec;
        rec.k = s.steps;
        const LowerBidiagonal lower = s.lower();
        const UpperBidiagonal upper = s.upper();
        const BidiagonalSvd svd = svd_lower(lower, SvdVectors::LastRightRow);
        rec.ritz_lower = svd.values;
        rec.norm_lower = svd.values.front();
        const double smin_sq = smallest_singular_value(lower.leading_square_transposed());
        rec.inv_norm_lower = smin_sq > 0.0 ? 1.0 / smin_sq : std::numeric_limits<double>::infinity();
        const BidiagonalSvd usvd = svd_upper(upper, SvdVectors::None);
        rec.norm_upper = usvd.values.front();
        rec.inv_norm_upper = usvd.values.back() > 0.0 ? 1.0 / usvd.values.back()
                                                       : std::numeric_limits<double>::infinity();
        if (options.record_upper)
        {
            rec.ritz_upper = usvd.values;
        }
        rec.defect_norm = identity_defect(lower, upper).norm;

        rec.selected = select_indices(rec.ritz_lower.size(), stop.target, stop.which);
        const double coupling = stop.norm_r * s.alpha_next() * s.beta_next();
        bool all_below = rec.selected.size() == stop.target;
        for (std::size_t idx : rec.selected)
        {
            const double bnd = coupling * std::abs(svd.right(0, idx));
            rec.bounds.push_back(bnd);
            all_below = all_below && bnd <= stop.tolerance;
        }
        if (options.on_step)
        {
            options.on_step(s, rec);
        }
        out.history.push_back(std::move(rec));

        if (s.terminated)
        {
            out.termination = Termination::Breakdown;
            return out;
        }
        if (all_below)
        {
            out.termination = Termination::Converged;
            return out;
        }
    }
    out.termination = s.terminated ? Termination::Breakdown : Termination::MaxSteps;
    return out;
}

SwapDecision maybe_swap_pair(const SparseMatrix& a, const SparseMatrix& l, SwapHint hint,
                             std::size_t iterations)
{
    double ka = 0.0;
    double kl = 0.0;
    bool swap = hint == SwapHint::Swap;
    if (hint == SwapHint::Auto)
    {
        ka = estimate_condition(a, iterations);
        kl = estimate_condition(l, iterations);
        swap = kl < ka;
    }
    if (swap)
    {
        return SwapDecision{StackedOperator(l, a), true, ka, kl};
    }
    return SwapDecision{StackedOperator(a, l), false, ka, kl};
}

} // namespace jbd
