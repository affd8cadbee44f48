#include "jbd/bidiag.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace jbd
{

namespace
{

struct Rotation
{
    double c;
    double s;
    double r;
};

// [c s; -s c] [f; g] = [r; 0]
Rotation make_rotation(double f, double g)
{
    if (g == 0.0)
    {
        return {1.0, 0.0, f};
    }
    if (f == 0.0)
    {
        return {0.0, 1.0, g};
    }
    const double r = std::hypot(f, g);
    return {f / r, g / r, r};
}

// Columns (i, j) of m become (c a_i + s a_j, -s a_i + c a_j).
void rotate_columns(DenseMatrix* m, std::size_t i, std::size_t j, double c, double s)
{
    if (m == nullptr || (c == 1.0 && s == 0.0))
    {
        return;
    }
    auto a = m->col(i);
    auto b = m->col(j);
    for (std::size_t r = 0; r < a.size(); ++r)
    {
        const double x = a[r];
        const double y = b[r];
        a[r] = c * x + s * y;
        b[r] = -s * x + c * y;
    }
}

// Row j is zero on the diagonal; push its superdiagonal entry out to the right.
void chase_row(std::vector<double>& d, std::vector<double>& e, std::size_t j, std::size_t hi,
               DenseMatrix* left)
{
    double f = e[j];
    e[j] = 0.0;
    for (std::size_t i = j + 1; i <= hi && f != 0.0; ++i)
    {
        const Rotation g = make_rotation(d[i], f);
        d[i] = g.r;
        if (i < hi)
        {
            f = -g.s * e[i];
            e[i] = g.c * e[i];
        }
        else
        {
            f = 0.0;
        }
        rotate_columns(left, i, j, g.c, g.s);
    }
}

// Column j is zero on the diagonal; push its superdiagonal entry up and out.
void chase_column(std::vector<double>& d, std::vector<double>& e, std::size_t j, std::size_t lo,
                  DenseMatrix* right)
{
    double f = e[j - 1];
    e[j - 1] = 0.0;
    for (std::size_t i = j; i-- > lo && f != 0.0;)
    {
        const Rotation g = make_rotation(d[i], f);
        d[i] = g.r;
        if (i > lo)
        {
            f = -g.s * e[i - 1];
            e[i - 1] = g.c * e[i - 1];
        }
        else
        {
            f = 0.0;
        }
        rotate_columns(right, i, j, g.c, g.s);
    }
}

void shifted_sweep(std::vector<double>& d, std::vector<double>& e, std::size_t lo, std::size_t hi,
                   double mu, DenseMatrix* left, DenseMatrix* right)
{
    double f = d[lo] * d[lo] - mu;
    double g = d[lo] * e[lo];
    for (std::size_t i = lo; i < hi; ++i)
    {
        Rotation rr = make_rotation(f, g);
        if (i > lo)
        {
            e[i - 1] = rr.r;
        }
        f = rr.c * d[i] + rr.s * e[i];
        e[i] = rr.c * e[i] - rr.s * d[i];
        g = rr.s * d[i + 1];
        d[i + 1] = rr.c * d[i + 1];
        rotate_columns(right, i, i + 1, rr.c, rr.s);

        Rotation rl = make_rotation(f, g);
        d[i] = rl.r;
        f = rl.c * e[i] + rl.s * d[i + 1];
        d[i + 1] = rl.c * d[i + 1] - rl.s * e[i];
        if (i + 1 < hi)
        {
            g = rl.s * e[i + 1];
            e[i + 1] = rl.c * e[i + 1];
        }
        rotate_columns(left, i, i + 1, rl.c, rl.s);
    }
    e[hi - 1] = f;
}

// Zero-shift sweep that keeps small singular values to high relative accuracy.
void zero_shift_sweep(std::vector<double>& d, std::vector<double>& e, std::size_t lo,
                      std::size_t hi, DenseMatrix* left, DenseMatrix* right)
{
    double cs = 1.0;
    double oldcs = 1.0;
    double oldsn = 0.0;
    for (std::size_t i = lo; i < hi; ++i)
    {
        const Rotation rr = make_rotation(d[i] * cs, e[i]);
        cs = rr.c;
        const double sn = rr.s;
        if (i > lo)
        {
            e[i - 1] = oldsn * rr.r;
        }
        const Rotation rl = make_rotation(oldcs * rr.r, d[i + 1] * sn);
        oldcs = rl.c;
        oldsn = rl.s;
        d[i] = rl.r;
        rotate_columns(right, i, i + 1, cs, sn);
        rotate_columns(left, i, i + 1, oldcs, oldsn);
    }
    const double h = d[hi] * cs;
    d[hi] = h * oldcs;
    e[hi - 1] = h * oldsn;
}

double wilkinson_shift(const std::vector<double>& d, const std::vector<double>& e,
                       std::size_t lo, std::size_t hi)
{
    const double a = d[hi - 1] * d[hi - 1] + (hi - 1 > lo ? e[hi - 2] * e[hi - 2] : 0.0);
    const double b = d[hi - 1] * e[hi - 1];
    const double c = d[hi] * d[hi] + e[hi - 1] * e[hi - 1];
    const double half = 0.5 * (a - c);
    const double root = std::hypot(half, b);
    if (root == 0.0)
    {
        return c;
    }
    const double denom = half + std::copysign(root, half);
    return denom == 0.0 ? c : c - b * b / denom;
}

void finish(BidiagonalSvd& out, std::vector<double> d, DenseMatrix left, DenseMatrix right,
            std::size_t k, bool have_left, bool have_right)
{
    for (std::size_t i = 0; i < k; ++i)
    {
        if (d[i] < 0.0)
        {
            d[i] = -d[i];
            if (have_right)
            {
                scale(-1.0, right.col(i));
            }
        }
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
    out.values.resize(k);
    for (std::size_t i = 0; i < k; ++i)
    {
        out.values[i] = d[order[i]];
    }
    if (have_left)
    {
        out.left = DenseMatrix(left.rows(), k);
        for (std::size_t i = 0; i < k; ++i)
        {
            auto src = left.col(order[i]);
            std::copy(src.begin(), src.end(), out.left.col(i).begin());
        }
    }
    if (have_right)
    {
        out.right = DenseMatrix(right.rows(), k);
        for (std::size_t i = 0; i < k; ++i)
        {
            auto src = right.col(order[i]);
            std::copy(src.begin(), src.end(), out.right.col(i).begin());
        }
    }
}

DenseMatrix right_accumulator(std::size_t k, SvdVectors want)
{
    if (want == SvdVectors::Full)
    {
        return DenseMatrix::identity(k);
    }
    DenseMatrix row(1, k);
    if (k > 0)
    {
        row(0, k - 1) = 1.0;
    }
    return row;
}

} // namespace

void bidiagonal_qr(std::vector<double>& d, std::vector<double>& e, DenseMatrix* left,
                   DenseMatrix* right)
{
    const std::size_t k = d.size();
    if (k == 0)
    {
        return;
    }
    if (e.size() + 1 != k)
    {
        throw Error(ErrorKind::DimensionMismatch, "bidiagonal superdiagonal length");
    }
    double smax = 0.0;
    for (double v : d)
    {
        smax = std::max(smax, std::abs(v));
    }
    for (double v : e)
    {
        smax = std::max(smax, std::abs(v));
    }
    if (smax == 0.0)
    {
        return;
    }
    const double zero_diag = kEps * kEps * smax;
    const std::size_t max_sweeps = 30 * k;
    std::size_t sweeps = 0;

    std::size_t hi = k - 1;
    while (hi > 0)
    {
        for (std::size_t i = 0; i < hi; ++i)
        {
            if (std::abs(e[i]) <= kEps * (std::abs(d[i]) + std::abs(d[i + 1])) ||
                std::abs(e[i]) <= zero_diag)
            {
                e[i] = 0.0;
            }
        }
        if (e[hi - 1] == 0.0)
        {
            --hi;
            continue;
        }
        std::size_t lo = hi - 1;
        while (lo > 0 && e[lo - 1] != 0.0)
        {
            --lo;
        }

        bool split = false;
        for (std::size_t j = lo; j <= hi; ++j)
        {
            if (std::abs(d[j]) <= zero_diag)
            {
                d[j] = 0.0;
                if (j < hi)
                {
                    chase_row(d, e, j, hi, left);
                }
                if (j > lo)
                {
                    chase_column(d, e, j, lo, right);
                }
                split = true;
                break;
            }
        }
        if (split)
        {
            continue;
        }

        if (++sweeps > max_sweeps)
        {
            throw Error(ErrorKind::NoConvergence,
                        "bidiagonal QR exceeded " + std::to_string(max_sweeps) + " sweeps");
        }
        double bmax = 0.0;
        for (std::size_t j = lo; j <= hi; ++j)
        {
            bmax = std::max(bmax, std::abs(d[j]));
            if (j < hi)
            {
                bmax = std::max(bmax, std::abs(e[j]));
            }
        }
        const double mu = wilkinson_shift(d, e, lo, hi);
        if (mu <= 0.0 || mu <= kEps * bmax * bmax)
        {
            zero_shift_sweep(d, e, lo, hi, left, right);
        }
        else
        {
            shifted_sweep(d, e, lo, hi, mu, left, right);
        }
    }
}

void LowerBidiagonal::validate() const
{
    if (beta.size() != alpha.size() + 1)
    {
        throw Error(ErrorKind::DimensionMismatch,
                    "lower bidiagonal needs k+1 beta values, got " + std::to_string(beta.size()) +
                        " for k = " + std::to_string(alpha.size()));
    }
}

DenseMatrix LowerBidiagonal::to_dense() const
{
    validate();
    const std::size_t k = order();
    DenseMatrix b(k + 1, k);
    for (std::size_t i = 0; i < k; ++i)
    {
        b(i, i) = alpha[i];
        b(i + 1, i) = beta[i + 1];
    }
    return b;
}

UpperBidiagonal LowerBidiagonal::leading_square_transposed() const
{
    validate();
    UpperBidiagonal u;
    u.alpha_hat = alpha;
    if (order() > 1)
    {
        u.beta_hat.assign(beta.begin() + 1, beta.begin() + static_cast<long>(order()));
    }
    return u;
}

void UpperBidiagonal::validate() const
{
    const std::size_t want = alpha_hat.empty() ? 0 : alpha_hat.size() - 1;
    if (beta_hat.size() != want)
    {
        throw Error(ErrorKind::DimensionMismatch,
                    "upper bidiagonal needs k-1 superdiagonal values, got " +
                        std::to_string(beta_hat.size()));
    }
}

DenseMatrix UpperBidiagonal::to_dense() const
{
    validate();
    const std::size_t k = order();
    DenseMatrix b(k, k);
    for (std::size_t i = 0; i < k; ++i)
    {
        b(i, i) = alpha_hat[i];
        if (i + 1 < k)
        {
            b(i, i + 1) = beta_hat[i];
        }
    }
    return b;
}

DenseMatrix SignAlternation::to_dense() const
{
    DenseMatrix p(order, order);
    for (std::size_t i = 0; i < order; ++i)
    {
        p(i, i) = sign(i);
    }
    return p;
}

DenseMatrix SignAlternation::apply_right(const DenseMatrix& m) const
{
    if (m.cols() != order)
    {
        throw Error(ErrorKind::DimensionMismatch, "sign alternation order");
    }
    DenseMatrix out = m;
    for (std::size_t j = 1; j < order; j += 2)
    {
        scale(-1.0, out.col(j));
    }
    return out;
}

DenseMatrix SignAlternation::apply_left(const DenseMatrix& m) const
{
    if (m.rows() != order)
    {
        throw Error(ErrorKind::DimensionMismatch, "sign alternation order");
    }
    DenseMatrix out = m;
    for (std::size_t j = 0; j < out.cols(); ++j)
    {
        for (std::size_t i = 1; i < order; i += 2)
        {
            out(i, j) = -out(i, j);
        }
    }
    return out;
}

BidiagonalSvd svd_lower(const LowerBidiagonal& b, SvdVectors want)
{
    b.validate();
    const std::size_t k = b.order();
    BidiagonalSvd out;
    if (k == 0)
    {
        return out;
    }
    const bool full = want == SvdVectors::Full;
    DenseMatrix left = full ? DenseMatrix::identity(k + 1) : DenseMatrix();
    DenseMatrix right = want == SvdVectors::None ? DenseMatrix() : right_accumulator(k, want);

    // Left rotations fold the subdiagonal into an upper bidiagonal R; row k
    // ends up zero.
    std::vector<double> d(k), e(k - 1);
    double di = b.alpha[0];
    for (std::size_t i = 0; i < k; ++i)
    {
        const Rotation g = make_rotation(di, b.beta[i + 1]);
        d[i] = g.r;
        if (i + 1 < k)
        {
            e[i] = g.s * b.alpha[i + 1];
            di = g.c * b.alpha[i + 1];
        }
        if (full)
        {
            rotate_columns(&left, i, i + 1, g.c, g.s);
        }
    }
    bidiagonal_qr(d, e, full ? &left : nullptr, want == SvdVectors::None ? nullptr : &right);
    finish(out, std::move(d), full ? left.leading_columns(k) : DenseMatrix(), std::move(right), k,
           full, want != SvdVectors::None);
    return out;
}

BidiagonalSvd svd_upper(const UpperBidiagonal& b, SvdVectors want)
{
    b.validate();
    const std::size_t k = b.order();
    BidiagonalSvd out;
    if (k == 0)
    {
        return out;
    }
    const bool full = want == SvdVectors::Full;
    DenseMatrix left = full ? DenseMatrix::identity(k) : DenseMatrix();
    DenseMatrix right = want == SvdVectors::None ? DenseMatrix() : right_accumulator(k, want);
    std::vector<double> d = b.alpha_hat;
    std::vector<double> e = b.beta_hat;
    bidiagonal_qr(d, e, full ? &left : nullptr, want == SvdVectors::None ? nullptr : &right);
    finish(out, std::move(d), std::move(left), std::move(right), k, full,
           want != SvdVectors::None);
    return out;
}

double smallest_singular_value(const LowerBidiagonal& b)
{
    const auto s = svd_lower(b, SvdVectors::None);
    return s.values.empty() ? 0.0 : s.values.back();
}

double smallest_singular_value(const UpperBidiagonal& b)
{
    const auto s = svd_upper(b, SvdVectors::None);
    return s.values.empty() ? 0.0 : s.values.back();
}

double largest_singular_value(const LowerBidiagonal& b)
{
    const auto s = svd_lower(b, SvdVectors::None);
    return s.values.empty() ? 0.0 : s.values.front();
}

double largest_singular_value(const UpperBidiagonal& b)
{
    const auto s = svd_upper(b, SvdVectors::None);
    return s.values.empty() ? 0.0 : s.values.front();
}

double coupling_coefficient(double alpha_next, double beta_next, double alpha_hat,
                            double tolerance)
{
    if (!(alpha_hat > tolerance) || alpha_hat <= 0.0)
    {
        throw Error(ErrorKind::Breakdown, "alpha_hat below breakdown tolerance");
    }
    return alpha_next * beta_next / alpha_hat;
}

IdentityDefect identity_defect(const LowerBidiagonal& b, const UpperBidiagonal& bhat)
{
    b.validate();
    bhat.validate();
    const std::size_t k = b.order();
    if (bhat.order() != k)
    {
        throw Error(ErrorKind::DimensionMismatch, "identity_defect orders differ");
    }
    IdentityDefect out;
    out.diag.resize(k);
    out.off.resize(k == 0 ? 0 : k - 1);
    for (std::size_t i = 0; i < k; ++i)
    {
        const double bh_prev = i > 0 ? bhat.beta_hat[i - 1] : 0.0;
        // Sum the O(1) terms first so the cancellation against 1 is exact.
        out.diag[i] = (b.alpha[i] * b.alpha[i] + b.beta[i + 1] * b.beta[i + 1]) +
                      (bhat.alpha_hat[i] * bhat.alpha_hat[i] + bh_prev * bh_prev) - 1.0;
        if (i + 1 < k)
        {
            out.off[i] =
                b.alpha[i + 1] * b.beta[i + 1] - bhat.alpha_hat[i] * bhat.beta_hat[i];
        }
    }
    if (k > 0)
    {
        const auto ev = symmetric_tridiagonal_eigenvalues(out.diag, out.off);
        out.norm = std::max(std::abs(ev.front()), std::abs(ev.back()));
    }
    return out;
}

DenseMatrix identity_defect_dense(const LowerBidiagonal& b, const UpperBidiagonal& bhat)
{
    const DenseMatrix bk = b.to_dense();
    const DenseMatrix bh = bhat.to_dense();
    const SignAlternation p{b.order()};
    const DenseMatrix lower_gram = multiply_transposed(bk, bk);
    const DenseMatrix upper_gram = p.apply_left(p.apply_right(multiply_transposed(bh, bh)));
    return lower_gram + upper_gram - DenseMatrix::identity(b.order());
}

namespace
{

// In-place partial-pivot solve of a tridiagonal system (sub, diag, super).
void tridiagonal_solve(std::vector<double> sub, std::vector<double> diag,
                       std::vector<double> sup, std::vector<double>& rhs, double tiny)
{
    const std::size_t n = diag.size();
    std::vector<double> sup2(n, 0.0);
    std::vector<bool> swapped(n, false);
    for (std::size_t i = 0; i + 1 < n; ++i)
    {
        if (diag[i] == 0.0 && sub[i] == 0.0)
        {
            diag[i] = tiny;
        }
        if (std::abs(diag[i]) >= std::abs(sub[i]))
        {
            const double fact = sub[i] / diag[i];
            sub[i] = fact;
            diag[i + 1] -= fact * sup[i];
        }
        else
        {
            const double fact = diag[i] / sub[i];
            diag[i] = sub[i];
            sub[i] = fact;
            const double temp = sup[i];
            sup[i] = diag[i + 1];
            diag[i + 1] = temp - fact * diag[i + 1];
            if (i + 2 < n)
            {
                sup2[i] = sup[i + 1];
                sup[i + 1] = -fact * sup[i + 1];
            }
            swapped[i] = true;
        }
    }
    for (double& d : diag)
    {
        if (d == 0.0)
        {
            d = tiny;
        }
    }
    for (std::size_t i = 0; i + 1 < n; ++i)
    {
        if (!swapped[i])
        {
            rhs[i + 1] -= sub[i] * rhs[i];
        }
        else
        {
            const double temp = rhs[i];
            rhs[i] = rhs[i + 1];
            rhs[i + 1] = temp - sub[i] * rhs[i];
        }
    }
    for (std::size_t i = n; i-- > 0;)
    {
        double v = rhs[i];
        if (i + 1 < n)
        {
            v -= sup[i] * rhs[i + 1];
        }
        if (i + 2 < n)
        {
            v -= sup2[i] * rhs[i + 2];
        }
        rhs[i] = v / diag[i];
    }
}

} // namespace

DenseVector right_singular_vector(const LowerBidiagonal& b, double sigma)
{
    b.validate();
    const std::size_t k = b.order();
    if (k == 0)
    {
        return DenseVector();
    }
    std::vector<double> diag(k), off(k > 0 ? k - 1 : 0);
    double gram_scale = sigma * sigma;
    for (std::size_t i = 0; i < k; ++i)
    {
        const double gii = b.alpha[i] * b.alpha[i] + b.beta[i + 1] * b.beta[i + 1];
        gram_scale = std::max(gram_scale, gii);
        diag[i] = gii - sigma * sigma;
        if (i + 1 < k)
        {
            off[i] = b.alpha[i + 1] * b.beta[i + 1];
        }
    }
    if (gram_scale == 0.0)
    {
        return DenseVector::unit(k, k - 1);
    }
    const double tiny = kEps * gram_scale;
    std::vector<double> w(k);
    for (std::size_t i = 0; i < k; ++i)
    {
        w[i] = 1.0 + 0.5 * std::sin(static_cast<double>(i) + 1.0);
    }
    scale(1.0 / norm2(w), w);
    for (int it = 0; it < 3; ++it)
    {
        std::vector<double> next = w;
        tridiagonal_solve(off, diag, off, next, tiny);
        const double nrm = norm2(next);
        if (!std::isfinite(nrm) || nrm == 0.0)
        {
            break;
        }
        scale(1.0 / nrm, next);
        w = std::move(next);
    }
    return DenseVector(std::move(w));
}

DenseVector left_from_right(const LowerBidiagonal& b, const DenseVector& w)
{
    const std::size_t k = b.order();
    DenseVector p(k + 1);
    for (std::size_t i = 0; i < k; ++i)
    {
        p[i] += b.alpha[i] * w[i];
        p[i + 1] += b.beta[i + 1] * w[i];
    }
    const double nrm = norm2(p);
    if (nrm > 0.0)
    {
        scale(1.0 / nrm, p.span());
    }
    return p;
}

} // namespace jbd
