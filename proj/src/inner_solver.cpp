#include "jbd/inner_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace jbd
{

void LsqrConfig::validate() const
{
    if (!(atol > 0.0 && atol < 1.0) || !(btol > 0.0 && btol < 1.0))
    {
        throw Error(ErrorKind::InvalidConfig, "LSQR tolerances must lie in (0, 1)");
    }
    if (max_iterations < 1)
    {
        throw Error(ErrorKind::InvalidConfig, "LSQR needs at least one iteration");
    }
}

StackedOperator::StackedOperator(SparseMatrix a, SparseMatrix l)
    : a_(std::move(a)), l_(std::move(l))
{
    if (a_.cols() != l_.cols())
    {
        throw Error(ErrorKind::DimensionMismatch,
                    "A has " + std::to_string(a_.cols()) + " columns, L has " +
                        std::to_string(l_.cols()));
    }
}

void StackedOperator::build_cache()
{
    if (q_)
    {
        return;
    }
    const DenseMatrix z = stack(a_, l_).to_dense();
    QrFactors f = householder_qr(z);
    q_ = std::move(f.q);
    r_ = std::move(f.r);
}

const DenseMatrix& StackedOperator::q() const
{
    if (!q_)
    {
        throw Error(ErrorKind::MissingCache, "dense Q of the stacked matrix was not built");
    }
    return *q_;
}

const DenseMatrix& StackedOperator::r() const
{
    if (!r_)
    {
        throw Error(ErrorKind::MissingCache, "dense R of the stacked matrix was not built");
    }
    return *r_;
}

DenseVector StackedOperator::apply(std::span<const double> x) const
{
    const DenseVector top = matvec(a_, x);
    const DenseVector bottom = matvec(l_, x);
    std::vector<double> out(top.begin(), top.end());
    out.insert(out.end(), bottom.begin(), bottom.end());
    return DenseVector(std::move(out));
}

DenseVector StackedOperator::apply_transposed(std::span<const double> y) const
{
    if (y.size() != rows())
    {
        throw Error(ErrorKind::DimensionMismatch, "Z^T y: y length " + std::to_string(y.size()));
    }
    DenseVector out = matvec_transposed(a_, y.subspan(0, rows_a()));
    const DenseVector bottom = matvec_transposed(l_, y.subspan(rows_a()));
    axpy(1.0, bottom.span(), out.span());
    return out;
}

namespace
{

Projection reference_from_coefficients(const StackedOperator& op, const DenseVector& qtu)
{
    Projection out;
    out.projected = multiply(op.q(), qtu.span());
    out.x = solve_upper(op.r(), qtu.span());
    return out;
}

Projection iterative(const StackedOperator& op, std::span<const double> u_padded,
                     const LsqrConfig& cfg)
{
    LsqrResult res = lsqr(op, u_padded, cfg);
    Projection out;
    out.projected = op.apply(res.x.span());
    out.x = std::move(res.x);
    out.iterations = res.iterations;
    return out;
}

} // namespace

Projection project(const StackedOperator& op, std::span<const double> u_padded,
                   const LsqrConfig& cfg, InnerMode mode)
{
    if (u_padded.size() != op.rows())
    {
        throw Error(ErrorKind::DimensionMismatch,
                    "project: vector length " + std::to_string(u_padded.size()) + ", expected " +
                        std::to_string(op.rows()));
    }
    if (mode == InnerMode::Reference)
    {
        return reference_from_coefficients(op, multiply_transposed(op.q(), u_padded));
    }
    return iterative(op, u_padded, cfg);
}

Projection project_top(const StackedOperator& op, std::span<const double> u_top,
                       const LsqrConfig& cfg, InnerMode mode)
{
    if (u_top.size() != op.rows_a())
    {
        throw Error(ErrorKind::DimensionMismatch,
                    "project_top: vector length " + std::to_string(u_top.size()) +
                        ", expected " + std::to_string(op.rows_a()));
    }
    if (mode == InnerMode::Reference)
    {
        const DenseMatrix& q = op.q();
        DenseVector qtu(q.cols());
        for (std::size_t j = 0; j < q.cols(); ++j)
        {
            qtu[j] = dot(q.col(j).subspan(0, op.rows_a()), u_top);
        }
        return reference_from_coefficients(op, qtu);
    }
    std::vector<double> padded(op.rows(), 0.0);
    std::copy(u_top.begin(), u_top.end(), padded.begin());
    return iterative(op, padded, cfg);
}

LsqrResult lsqr(const StackedOperator& op, std::span<const double> b, const LsqrConfig& cfg)
{
    cfg.validate();
    if (b.size() != op.rows())
    {
        throw Error(ErrorKind::DimensionMismatch, "lsqr: right-hand side length");
    }
    const std::size_t n = op.cols();
    LsqrResult out;
    out.x = DenseVector(n);

    DenseVector u(std::vector<double>(b.begin(), b.end()));
    double beta = norm2(u);
    const double bnorm = beta;
    if (beta == 0.0)
    {
        return out;
    }
    scale(1.0 / beta, u.span());
    DenseVector v = op.apply_transposed(u.span());
    double alpha = norm2(v);
    if (alpha == 0.0)
    {
        out.residual_norm = bnorm;
        return out;
    }
    scale(1.0 / alpha, v.span());

    DenseVector w = v;
    double phibar = beta;
    double rhobar = alpha;
    double anorm = 0.0;

    for (std::size_t itn = 1; itn <= cfg.max_iterations; ++itn)
    {
        DenseVector zv = op.apply(v.span());
        axpy(-alpha, u.span(), zv.span());
        u = std::move(zv);
        beta = norm2(u);
        if (beta > 0.0)
        {
            scale(1.0 / beta, u.span());
        }
        anorm = std::sqrt(anorm * anorm + alpha * alpha + beta * beta);

        DenseVector ztu = op.apply_transposed(u.span());
        axpy(-beta, v.span(), ztu.span());
        v = std::move(ztu);
        alpha = norm2(v);
        if (alpha > 0.0)
        {
            scale(1.0 / alpha, v.span());
        }

        const double rho = std::hypot(rhobar, beta);
        const double c = rhobar / rho;
        const double s = beta / rho;
        const double theta = s * alpha;
        rhobar = -c * alpha;
        const double phi = c * phibar;
        phibar = s * phibar;

        axpy(phi / rho, w.span(), out.x.span());
        DenseVector wn = v;
        axpy(-theta / rho, w.span(), wn.span());
        w = std::move(wn);

        out.iterations = itn;
        out.residual_norm = phibar;
        out.normal_residual_norm = phibar * alpha * std::abs(c);
        const double xnorm = norm2(out.x);

        const bool test1 = out.residual_norm <= cfg.btol * bnorm + cfg.atol * anorm * xnorm;
        const bool test2 = out.residual_norm == 0.0 ||
                           out.normal_residual_norm / (anorm * out.residual_norm) <= cfg.atol;
        if (test1 || test2 || alpha == 0.0 || beta == 0.0)
        {
            return out;
        }
    }
    throw Error(ErrorKind::NotConverged,
                "LSQR hit " + std::to_string(cfg.max_iterations) + " iterations");
}

LowerBidiagonal LanczosState::bidiagonal() const
{
    LowerBidiagonal out;
    out.alpha.assign(b.alpha.begin(), b.alpha.begin() + static_cast<long>(steps));
    out.beta.assign(b.beta.begin(), b.beta.begin() + static_cast<long>(steps + 1));
    return out;
}

LanczosState lanczos_init(std::span<const double> b, const Applier& mt, double tolerance,
                          bool reorthogonalize)
{
    LanczosState s;
    s.tolerance = tolerance;
    s.reorthogonalize = reorthogonalize;
    const double beta = norm2(b);
    if (beta == 0.0)
    {
        throw Error(ErrorKind::ZeroStart, "starting vector is zero");
    }
    std::vector<double> u(b.begin(), b.end());
    scale(1.0 / beta, u);
    DenseVector v = mt(u);
    const double alpha = norm2(v);
    if (alpha <= tolerance || alpha == 0.0)
    {
        throw Error(ErrorKind::Breakdown, "alpha_1 below breakdown tolerance");
    }
    scale(1.0 / alpha, v.span());
    s.u.append_column(u);
    s.v.append_column(v.span());
    s.b.alpha.push_back(alpha);
    s.b.beta.push_back(beta);
    return s;
}

bool lanczos_bidiag_step(LanczosState& s, const Applier& m, const Applier& mt)
{
    if (s.terminated)
    {
        throw Error(ErrorKind::Breakdown, "bidiagonalization already terminated");
    }
    const std::size_t i = s.steps;
    DenseVector p = m(s.v.col(i));
    axpy(-s.b.alpha[i], s.u.col(i), p.span());
    if (s.reorthogonalize)
    {
        orthogonalize_in_place(p.span(), s.u, s.u.cols(), 2);
    }
    const double beta = norm2(p);
    s.steps = i + 1;
    if (beta <= s.tolerance || beta == 0.0)
    {
        s.b.beta.push_back(0.0);
        s.terminated = true;
        return false;
    }
    scale(1.0 / beta, p.span());
    s.u.append_column(p.span());
    s.b.beta.push_back(beta);

    DenseVector r = mt(p.span());
    axpy(-beta, s.v.col(i), r.span());
    if (s.reorthogonalize)
    {
        orthogonalize_in_place(r.span(), s.v, s.v.cols(), 2);
    }
    const double alpha = norm2(r);
    if (alpha <= s.tolerance || alpha == 0.0)
    {
        s.b.alpha.push_back(0.0);
        s.terminated = true;
        return false;
    }
    scale(1.0 / alpha, r.span());
    s.v.append_column(r.span());
    s.b.alpha.push_back(alpha);
    return true;
}

double estimate_stacked_norm(const StackedOperator& op, std::size_t iterations)
{
    if (iterations < 1)
    {
        throw Error(ErrorKind::InvalidConfig, "norm estimate needs at least one iteration");
    }
    const Applier m = [&](std::span<const double> x) { return op.apply(x); };
    const Applier mt = [&](std::span<const double> y) { return op.apply_transposed(y); };
    const std::vector<double> ones(op.rows(), 1.0);
    LanczosState s = lanczos_init(ones, mt, 0.0, true);
    double estimate = s.b.alpha[0];
    for (std::size_t it = 0; it < iterations; ++it)
    {
        const bool ok = lanczos_bidiag_step(s, m, mt);
        estimate = std::max(estimate, largest_singular_value(s.bidiagonal()));
        if (!ok)
        {
            break;
        }
        // Breakdown threshold relative to the running estimate.
        s.tolerance = static_cast<double>(op.rows()) * kEps * estimate;
    }
    return estimate;
}

double estimate_condition(const SparseMatrix& mat, std::size_t iterations)
{
    const Applier m = [&](std::span<const double> x) { return matvec(mat, x); };
    const Applier mt = [&](std::span<const double> y) { return matvec_transposed(mat, y); };
    const std::vector<double> ones(mat.rows(), 1.0);
    LanczosState s = lanczos_init(ones, mt, 0.0, true);
    iterations = std::min(iterations, mat.cols());
    for (std::size_t it = 0; it < iterations; ++it)
    {
        if (!lanczos_bidiag_step(s, m, mt))
        {
            break;
        }
        s.tolerance = static_cast<double>(mat.rows() + mat.cols()) * kEps * s.b.alpha[0];
    }
    const BidiagonalSvd svd = svd_lower(s.bidiagonal(), SvdVectors::None);
    if (svd.values.empty() || svd.values.back() == 0.0)
    {
        return std::numeric_limits<double>::infinity();
    }
    return svd.values.front() / svd.values.back();
}

} // namespace jbd
