#include "jbd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace jbd
{

namespace
{

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double inverse(double smin)
{
    return smin > 0.0 ? 1.0 / smin : std::numeric_limits<double>::infinity();
}

// alpha_{k+1} vt_{k+1} e_{k+1}^T subtracted from column k of m.
void subtract_last(DenseMatrix& m, std::size_t col, double coef, std::span<const double> v)
{
    axpy(-coef, v, m.col(col));
}

// X Bsq = G for the k x k upper bidiagonal Bsq (diag alpha, superdiag beta_2..beta_k).
DenseMatrix top_rows(const DenseMatrix& m, std::size_t rows) { return m.row_block(0, rows); }
DenseMatrix bottom_rows(const DenseMatrix& m, std::size_t first)
{
    return m.row_block(first, m.rows() - first);
}

} // namespace

OrthoLevels ortho_levels(const DenseMatrix& w, std::optional<std::size_t> count)
{
    const std::size_t k = std::min(count.value_or(w.cols()), w.cols());
    OrthoLevels out;
    if (k == 0)
    {
        return out;
    }
    const DenseMatrix lead = w.leading_columns(k);
    DenseMatrix gram = multiply_transposed(lead, lead);
    for (std::size_t j = 0; j < k; ++j)
    {
        for (std::size_t i = 0; i < k; ++i)
        {
            if (i != j)
            {
                out.xi = std::max(out.xi, std::abs(gram(i, j)));
            }
        }
        gram(j, j) -= 1.0;
    }
    out.eta = symmetric_spectral_norm(gram);
    return out;
}

ErrorMatrixNorms measure_recurrence_errors(const JbdState& s, const StackedOperator& op)
{
    const DenseMatrix& q = op.q();
    const std::size_t k = s.steps;
    const std::size_t m = s.m;
    ErrorMatrixNorms out;
    out.k = k;

    const DenseMatrix bk = s.lower().to_dense();
    const UpperBidiagonal upper = s.upper();
    const DenseMatrix bh = upper.to_dense();
    const SignAlternation pk{k};
    const bool have_next_v = s.vtilde.cols() > k;
    const double alpha_next = s.alpha_next();

    // U_{k+1}; after a beta breakdown only U_k exists and the last row of B_k is zero.
    DenseMatrix u = s.u.leading_columns(k + 1);
    if (u.cols() < k + 1)
    {
        u.append_column(std::vector<double>(m, 0.0));
    }
    const DenseMatrix vt = s.vtilde.leading_columns(k);
    const DenseMatrix uh = s.uhat.leading_columns(k);
    const DenseMatrix qa = top_rows(q, m);
    const DenseMatrix ql = bottom_rows(q, m);

    const DenseMatrix ub = multiply(u, bk);
    out.f_tilde = spectral_norm(top_rows(vt, m) - ub);

    const DenseMatrix qau = multiply_transposed(qa, u); // Q_A^T U_{k+1}
    DenseMatrix gt = multiply(q, qau);
    {
        DenseMatrix padded(s.m + s.p, k + 1);
        for (std::size_t j = 0; j < k + 1; ++j)
        {
            // QQ^T (U;0) - Vt B^T
            auto c = padded.col(j);
            for (std::size_t l = 0; l < k; ++l)
            {
                const double coef = bk(j, l);
                if (coef != 0.0)
                {
                    axpy(coef, vt.col(l), c);
                }
            }
        }
        gt = gt - padded;
        if (have_next_v)
        {
            subtract_last(gt, k, alpha_next, s.vtilde.col(k));
        }
    }
    out.g_tilde = spectral_norm(gt);

    out.f_bar = spectral_norm(pk.apply_right(bottom_rows(vt, m)) - multiply(uh, bh));

    const DenseMatrix v = multiply_transposed(q, vt); // V_k = Q^T Vt_k
    out.deviation = spectral_norm(vt - multiply(q, v));
    out.f = spectral_norm(multiply(qa, v) - ub);

    DenseMatrix g = qau - multiply(v, bk.transposed());
    DenseVector v_next;
    if (have_next_v)
    {
        v_next = multiply_transposed(q, s.vtilde.col(k));
        subtract_last(g, k, alpha_next, v_next.span());
    }
    out.g = spectral_norm(g);

    const DenseMatrix vhat = pk.apply_right(v);
    out.f_hat = spectral_norm(multiply(ql, vhat) - multiply(uh, bh));
    DenseMatrix ghat = multiply_transposed(ql, uh) - multiply(vhat, bh.transposed());
    if (have_next_v && s.beta_hat.size() >= k)
    {
        const double coef = s.beta_hat[k - 1] * SignAlternation::sign(k);
        subtract_last(ghat, k - 1, coef, v_next.span());
    }
    out.g_hat = spectral_norm(ghat);

    out.e = identity_defect(s.lower(), upper).norm;
    out.inv_norm_lower = inverse(smallest_singular_value(s.lower().leading_square_transposed()));
    out.inv_norm_upper = inverse(smallest_singular_value(upper));
    return out;
}

Verification verify_column_space_deviation(const JbdState& s, const StackedOperator& op,
                                           const DiagnosticTolerances& tol)
{
    const DenseMatrix& q = op.q();
    const std::size_t k = s.steps;
    const std::size_t rows = q.rows();
    const std::size_t n = q.cols();
    const DenseMatrix vt = s.vtilde.leading_columns(k);
    const UpperBidiagonal sq = s.lower().leading_square_transposed();

    // Gt_k is a rounding-level residual, so it is accumulated in extended
    // precision; in double its leading digits cancel away.
    using wide = long double;
    std::vector<wide> x(rows * k);
    std::vector<wide> t(n);
    for (std::size_t j = 0; j < k; ++j)
    {
        const auto uj = s.u.col(j);
        for (std::size_t c = 0; c < n; ++c)
        {
            const auto qc = q.col(c);
            wide acc = 0.0L;
            for (std::size_t i = 0; i < s.m; ++i)
            {
                acc += static_cast<wide>(qc[i]) * uj[i];
            }
            t[c] = acc;
        }
        wide* xj = x.data() + j * rows;
        for (std::size_t c = 0; c < n; ++c)
        {
            const auto qc = q.col(c);
            for (std::size_t i = 0; i < rows; ++i)
            {
                xj[i] += static_cast<wide>(qc[i]) * t[c];
            }
        }
        for (std::size_t i = 0; i < rows; ++i)
        {
            xj[i] -= static_cast<wide>(vt(i, j)) * sq.alpha_hat[j];
            if (j > 0)
            {
                xj[i] -= static_cast<wide>(vt(i, j - 1)) * sq.beta_hat[j - 1];
            }
        }
    }
    // Gt_k Bsq_k^{-1} by forward substitution over columns.
    DenseMatrix solved(rows, k);
    for (std::size_t j = 0; j < k; ++j)
    {
        wide* xj = x.data() + j * rows;
        for (std::size_t i = 0; i < rows; ++i)
        {
            if (j > 0)
            {
                xj[i] -= static_cast<wide>(sq.beta_hat[j - 1]) * xj[i - rows];
            }
            xj[i] /= sq.alpha_hat[j];
            solved(i, j) = static_cast<double>(xj[i]);
        }
    }

    const DenseMatrix qv = multiply(q, multiply_transposed(q, vt));
    Verification out;
    out.lhs = spectral_norm(vt - qv);
    out.rhs = spectral_norm(solved);
    out.holds = out.lhs <= out.rhs * (1.0 + tol.relative_slack) + tol.base;
    return out;
}

Verification verify_uhat_orthogonality_bound(const JbdState& s, const DiagnosticTolerances& tol)
{
    const std::size_t k = s.steps;
    Verification out;
    out.lhs = ortho_levels(s.uhat, k).eta;
    const double inv = inverse(smallest_singular_value(s.upper()));
    const double eta_v = ortho_levels(s.vtilde, k).eta;
    const double eta_u = ortho_levels(s.u, k + 1).eta;
    out.rhs = inv * inv * (eta_v + 2.0 * eta_u + tol.base);
    out.holds = out.lhs <= out.rhs;
    return out;
}

Verification verify_vtilde_v_orthogonality_gap(const JbdState& s, const StackedOperator& op,
                                               const DiagnosticTolerances& tol)
{
    const std::size_t k = s.steps;
    const DenseMatrix vt = s.vtilde.leading_columns(k);
    const DenseMatrix v = multiply_transposed(op.q(), vt);
    Verification out;
    out.lhs = std::abs(ortho_levels(vt).eta - ortho_levels(v).eta);
    const double inv = inverse(smallest_singular_value(s.lower().leading_square_transposed()));
    out.rhs = inv * inv * tol.base * tol.base + tol.base;
    out.holds = out.lhs <= out.rhs;
    return out;
}

DiagnosticRow diagnostics_row(const JbdState& s, const StackedOperator* op,
                              const DiagnosticTolerances& tol)
{
    const std::size_t k = s.steps;
    DiagnosticRow row;
    row.k = k;
    row.eta_u = ortho_levels(s.u, k + 1).eta;
    row.eta_vtilde = ortho_levels(s.vtilde, k).eta;
    row.eta_uhat = ortho_levels(s.uhat, k).eta;
    row.inv_norm_lower = inverse(smallest_singular_value(s.lower().leading_square_transposed()));
    row.inv_norm_upper = inverse(smallest_singular_value(s.upper()));
    row.uhat_bound = row.inv_norm_upper * row.inv_norm_upper *
                     (row.eta_vtilde + 2.0 * row.eta_u + tol.base);
    row.norm_e = identity_defect(s.lower(), s.upper()).norm;
    row.bound_f = tol.plot_factor * row.inv_norm_lower * kEps;
    row.bound_g_hat = tol.plot_factor * (row.inv_norm_lower + row.inv_norm_upper) * kEps;
    if (op != nullptr && op->has_cache())
    {
        const ErrorMatrixNorms e = measure_recurrence_errors(s, *op);
        row.norm_f = e.f;
        row.norm_f_hat = e.f_hat;
        row.norm_g_hat = e.g_hat;
    }
    else
    {
        row.norm_f = kNaN;
        row.norm_f_hat = kNaN;
        row.norm_g_hat = kNaN;
    }
    return row;
}

} // namespace jbd
