#include "jbd/gsvd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace jbd
{

double generalized_value(double c, double s)
{
    return s == 0.0 ? std::numeric_limits<double>::infinity() : c / s;
}

namespace
{

void require_steps(const JbdState& state, std::size_t count)
{
    if (state.steps < count || state.steps == 0)
    {
        throw Error(ErrorKind::InsufficientSteps,
                    "need " + std::to_string(std::max<std::size_t>(count, 1)) +
                        " steps, state has " + std::to_string(state.steps));
    }
}

DenseVector column_of(const DenseMatrix& m, std::size_t j) { return m.column(j); }

} // namespace

std::vector<RitzApproximation> extract_ritz_from_lower(const JbdState& state, std::size_t count,
                                                       Which which, double norm_r)
{
    require_steps(state, count);
    const BidiagonalSvd svd = svd_lower(state.lower(), SvdVectors::Full);
    const std::size_t k = state.steps;
    std::vector<RitzApproximation> out;
    for (std::size_t idx : select_indices(k, count, which))
    {
        RitzApproximation r;
        r.index = idx;
        r.c = std::clamp(svd.values[idx], 0.0, 1.0);
        r.s = std::sqrt(std::max(0.0, (1.0 - r.c) * (1.0 + r.c)));
        r.gsv = generalized_value(r.c, r.s);
        r.w = column_of(svd.right, idx);
        r.p = column_of(svd.left, idx);
        r.residual_bound = residual_bound(state, r.w[k - 1], norm_r);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<RitzApproximation> extract_ritz_from_upper(const JbdState& state, std::size_t count,
                                                       Which which)
{
    require_steps(state, count);
    const BidiagonalSvd svd = svd_upper(state.upper(), SvdVectors::Full);
    const std::size_t k = state.steps;
    std::vector<RitzApproximation> out;
    // Ascending s: the largest generalized values come from the smallest s.
    for (std::size_t pos : select_indices(k, count, flip(which)))
    {
        RitzApproximation r;
        r.from_upper = true;
        r.index = k - 1 - pos;
        r.s = std::clamp(svd.values[pos], 0.0, 1.0);
        r.c = std::sqrt(std::max(0.0, (1.0 - r.s) * (1.0 + r.s)));
        r.gsv = generalized_value(r.c, r.s);
        r.w = column_of(svd.right, pos);
        r.p = column_of(svd.left, pos);
        r.residual_bound = std::numeric_limits<double>::quiet_NaN();
        out.push_back(std::move(r));
    }
    return out;
}

DenseVector recover_right_vector(const StackedOperator& op, const JbdState& state,
                                 std::span<const double> w, const LsqrConfig& cfg,
                                 InnerMode mode, bool upper)
{
    const std::size_t k = state.steps;
    if (w.size() != k)
    {
        throw Error(ErrorKind::DimensionMismatch, "right vector coefficients need length k");
    }
    DenseVector target(op.rows());
    for (std::size_t j = 0; j < k; ++j)
    {
        const double coef = upper ? SignAlternation::sign(j) * w[j] : w[j];
        axpy(coef, state.vtilde.col(j), target.span());
    }
    return project(op, target.span(), cfg, mode).x;
}

LeftVectors recover_left_vectors(const JbdState& state, const DenseVector& p,
                                 const std::optional<DenseVector>& p_hat)
{
    const std::size_t k = state.steps;
    if (p.size() != k + 1)
    {
        throw Error(ErrorKind::DimensionMismatch, "p needs length k+1");
    }
    LeftVectors out{DenseVector(state.m), std::nullopt};
    // After a beta breakdown u_{k+1} is absent and the matching entry of p is zero.
    const std::size_t ucols = std::min(state.u.cols(), k + 1);
    for (std::size_t j = 0; j < ucols; ++j)
    {
        axpy(p[j], state.u.col(j), out.y.span());
    }
    if (p_hat)
    {
        if (p_hat->size() != k)
        {
            throw Error(ErrorKind::DimensionMismatch, "p_hat needs length k");
        }
        DenseVector z(state.p);
        for (std::size_t j = 0; j < k; ++j)
        {
            axpy((*p_hat)[j], state.uhat.col(j), z.span());
        }
        out.z = std::move(z);
    }
    return out;
}

double residual_bound(const JbdState& state, double w_last_component, double norm_r)
{
    return norm_r * state.alpha_next() * state.beta_next() * std::abs(w_last_component);
}

double residual_direct(const SparseMatrix& a, const SparseMatrix& l,
                       const RitzApproximation& ritz)
{
    if (!ritz.x)
    {
        throw Error(ErrorKind::DomainError, "residual needs the recovered right vector");
    }
    const DenseVector ata = matvec_transposed(a, matvec(a, *ritz.x));
    const DenseVector ltl = matvec_transposed(l, matvec(l, *ritz.x));
    DenseVector r = (ritz.s * ritz.s) * ata;
    axpy(-ritz.c * ritz.c, ltl.span(), r.span());
    return norm2(r);
}

double angle_error(double c_approx, double s_approx, double c_true, double s_true)
{
    return std::abs(s_approx * c_true - s_true * c_approx);
}

void complete_vectors(const StackedOperator& op, const JbdState& state, RitzApproximation& ritz,
                      const LsqrConfig& cfg, InnerMode mode)
{
    ritz.x = recover_right_vector(op, state, ritz.w.span(), cfg, mode, ritz.from_upper);
    if (ritz.from_upper)
    {
        DenseVector z(state.p);
        for (std::size_t j = 0; j < state.steps; ++j)
        {
            axpy(ritz.p[j], state.uhat.col(j), z.span());
        }
        ritz.z = std::move(z);
    }
    else
    {
        ritz.y = recover_left_vectors(state, ritz.p, std::nullopt).y;
    }
    ritz.residual_direct = residual_direct(op.a(), op.l(), ritz);
}

void unswap(RitzApproximation& ritz)
{
    std::swap(ritz.c, ritz.s);
    std::swap(ritz.y, ritz.z);
    ritz.gsv = generalized_value(ritz.c, ritz.s);
}

} // namespace jbd
