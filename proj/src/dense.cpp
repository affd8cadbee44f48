#include "jbd/dense.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace jbd
{

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind)
    {
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::BreakdownToZero: return "BreakdownToZero";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnsupportedField: return "UnsupportedField";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::MissingCache: return "MissingCache";
    case ErrorKind::ZeroStart: return "ZeroStart";
    case ErrorKind::Breakdown: return "Breakdown";
    case ErrorKind::InsufficientSteps: return "InsufficientSteps";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

namespace
{

void require_finite(std::span<const double> values)
{
    for (double v : values)
    {
        if (!std::isfinite(v))
        {
            throw Error(ErrorKind::NonFinite, "entry is NaN or Inf");
        }
    }
}

void require_same_size(std::size_t a, std::size_t b, const char* where)
{
    if (a != b)
    {
        throw Error(ErrorKind::DimensionMismatch,
                    std::string(where) + ": " + std::to_string(a) + " vs " + std::to_string(b));
    }
}

} // namespace

// ---------------------------------------------------------------------------
// DenseVector

DenseVector::DenseVector(std::size_t n, double value) : data_(n, value)
{
    require_finite(data_);
}

DenseVector::DenseVector(std::vector<double> entries) : data_(std::move(entries))
{
    require_finite(data_);
}

DenseVector::DenseVector(std::initializer_list<double> entries) : data_(entries)
{
    require_finite(data_);
}

DenseVector DenseVector::unit(std::size_t n, std::size_t i)
{
    DenseVector e(n);
    e[i] = 1.0;
    return e;
}

// ---------------------------------------------------------------------------
// DenseMatrix

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double value)
    : rows_(rows), cols_(cols), data_(rows * cols, value)
{
    require_finite(data_);
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries))
{
    require_same_size(data_.size(), rows * cols, "DenseMatrix entries");
    require_finite(data_);
}

DenseMatrix DenseMatrix::identity(std::size_t n)
{
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
    {
        m(i, i) = 1.0;
    }
    return m;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows)
{
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    DenseMatrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows)
    {
        require_same_size(row.size(), c, "from_rows row length");
        std::size_t j = 0;
        for (double v : row)
        {
            m(i, j++) = v;
        }
        ++i;
    }
    require_finite(m.data_);
    return m;
}

DenseVector DenseMatrix::column(std::size_t j) const
{
    auto c = col(j);
    return DenseVector(std::vector<double>(c.begin(), c.end()));
}

void DenseMatrix::append_column(std::span<const double> values)
{
    if (cols_ == 0 && rows_ == 0)
    {
        rows_ = values.size();
    }
    require_same_size(values.size(), rows_, "append_column");
    data_.insert(data_.end(), values.begin(), values.end());
    ++cols_;
}

DenseMatrix DenseMatrix::leading_columns(std::size_t count) const
{
    count = std::min(count, cols_);
    return DenseMatrix(rows_, count,
                       std::vector<double>(data_.begin(), data_.begin() + count * rows_));
}

DenseMatrix DenseMatrix::row_block(std::size_t first, std::size_t count) const
{
    DenseMatrix out(count, cols_);
    for (std::size_t j = 0; j < cols_; ++j)
    {
        std::copy_n(data_.begin() + j * rows_ + first, count, out.col(j).begin());
    }
    return out;
}

DenseMatrix DenseMatrix::transposed() const
{
    DenseMatrix t(cols_, rows_);
    for (std::size_t j = 0; j < cols_; ++j)
    {
        for (std::size_t i = 0; i < rows_; ++i)
        {
            t(j, i) = (*this)(i, j);
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// Level 1

double dot(std::span<const double> x, std::span<const double> y)
{
    require_same_size(x.size(), y.size(), "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        s += x[i] * y[i];
    }
    return s;
}

double norm2(std::span<const double> x)
{
    double amax = 0.0;
    for (double v : x)
    {
        amax = std::max(amax, std::abs(v));
    }
    if (amax == 0.0)
    {
        return 0.0;
    }
    // Scale only when squaring could leave the normal range.
    if (amax > 1e150 || amax < 1e-150)
    {
        double s = 0.0;
        for (double v : x)
        {
            const double t = v / amax;
            s += t * t;
        }
        return amax * std::sqrt(s);
    }
    double s = 0.0;
    for (double v : x)
    {
        s += v * v;
    }
    return std::sqrt(s);
}

void axpy(double a, std::span<const double> x, std::span<double> y)
{
    require_same_size(x.size(), y.size(), "axpy");
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        y[i] += a * x[i];
    }
}

void scale(double a, std::span<double> x)
{
    for (double& v : x)
    {
        v *= a;
    }
}

DenseVector operator+(const DenseVector& x, const DenseVector& y)
{
    require_same_size(x.size(), y.size(), "vector +");
    DenseVector z = x;
    axpy(1.0, y.span(), z.span());
    return z;
}

DenseVector operator-(const DenseVector& x, const DenseVector& y)
{
    require_same_size(x.size(), y.size(), "vector -");
    DenseVector z = x;
    axpy(-1.0, y.span(), z.span());
    return z;
}

DenseVector operator*(double a, const DenseVector& x)
{
    DenseVector z = x;
    scale(a, z.span());
    return z;
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b)
{
    require_same_size(a.rows(), b.rows(), "matrix + rows");
    require_same_size(a.cols(), b.cols(), "matrix + cols");
    DenseMatrix c = a;
    for (std::size_t j = 0; j < a.cols(); ++j)
    {
        axpy(1.0, b.col(j), c.col(j));
    }
    return c;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b)
{
    require_same_size(a.rows(), b.rows(), "matrix - rows");
    require_same_size(a.cols(), b.cols(), "matrix - cols");
    DenseMatrix c = a;
    for (std::size_t j = 0; j < a.cols(); ++j)
    {
        axpy(-1.0, b.col(j), c.col(j));
    }
    return c;
}

DenseMatrix operator*(double a, const DenseMatrix& m)
{
    DenseMatrix c = m;
    for (std::size_t j = 0; j < m.cols(); ++j)
    {
        scale(a, c.col(j));
    }
    return c;
}

// ---------------------------------------------------------------------------
// Level 2/3

DenseVector multiply(const DenseMatrix& m, std::span<const double> x)
{
    require_same_size(m.cols(), x.size(), "multiply");
    DenseVector y(m.rows());
    for (std::size_t j = 0; j < m.cols(); ++j)
    {
        if (x[j] != 0.0)
        {
            axpy(x[j], m.col(j), y.span());
        }
    }
    return y;
}

DenseVector multiply_transposed(const DenseMatrix& m, std::span<const double> x)
{
    require_same_size(m.rows(), x.size(), "multiply_transposed");
    DenseVector y(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j)
    {
        y[j] = dot(m.col(j), x);
    }
    return y;
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b)
{
    require_same_size(a.cols(), b.rows(), "multiply");
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j)
    {
        auto cj = c.col(j);
        for (std::size_t l = 0; l < a.cols(); ++l)
        {
            const double blj = b(l, j);
            if (blj != 0.0)
            {
                axpy(blj, a.col(l), cj);
            }
        }
    }
    return c;
}

DenseMatrix multiply_transposed(const DenseMatrix& a, const DenseMatrix& b)
{
    require_same_size(a.rows(), b.rows(), "multiply_transposed");
    DenseMatrix c(a.cols(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j)
    {
        for (std::size_t i = 0; i < a.cols(); ++i)
        {
            c(i, j) = dot(a.col(i), b.col(j));
        }
    }
    return c;
}

double frobenius_norm(const DenseMatrix& m) { return norm2(m.entries()); }

// ---------------------------------------------------------------------------
// Symmetric eigenvalues

std::vector<double> symmetric_tridiagonal_eigenvalues(std::vector<double> d,
                                                      std::vector<double> off)
{
    const std::size_t n = d.size();
    if (n == 0)
    {
        return d;
    }
    if (off.size() + 1 != n)
    {
        throw Error(ErrorKind::DimensionMismatch, "tridiagonal off-diagonal length");
    }
    std::vector<double> e(n, 0.0);
    std::copy(off.begin(), off.end(), e.begin());
    double anorm = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        if (!std::isfinite(d[i]) || !std::isfinite(e[i]))
        {
            throw Error(ErrorKind::NonFinite, "tridiagonal entries");
        }
        anorm = std::max(anorm, std::abs(d[i]) + std::abs(e[i]) + (i > 0 ? std::abs(e[i - 1]) : 0.0));
    }
    const double floor = 0.5 * kEps * anorm;

    for (std::size_t l = 0; l < n; ++l)
    {
        int iter = 0;
        std::size_t m = l;
        do
        {
            for (m = l; m + 1 < n; ++m)
            {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= kEps * dd || std::abs(e[m]) <= floor)
                {
                    break;
                }
            }
            if (m != l)
            {
                if (++iter > 200)
                {
                    throw Error(ErrorKind::NoConvergence, "tridiagonal QL iteration");
                }
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0;
                double c = 1.0;
                double p = 0.0;
                bool underflow = false;
                for (std::size_t ii = m; ii-- > l;)
                {
                    const double f = s * e[ii];
                    const double b = c * e[ii];
                    r = std::hypot(f, g);
                    e[ii + 1] = r;
                    if (r == 0.0)
                    {
                        d[ii + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[ii + 1] - p;
                    r = (d[ii] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[ii + 1] = g + p;
                    g = c * r - b;
                }
                if (underflow)
                {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    std::sort(d.begin(), d.end());
    return d;
}

std::vector<double> symmetric_eigenvalues(const DenseMatrix& m)
{
    const std::size_t n = m.rows();
    require_same_size(n, m.cols(), "symmetric_eigenvalues");
    if (n == 0)
    {
        return {};
    }
    // Full symmetric copy reduced in place to tridiagonal form by Householder.
    DenseMatrix a(n, n);
    for (std::size_t j = 0; j < n; ++j)
    {
        for (std::size_t i = j; i < n; ++i)
        {
            a(i, j) = m(i, j);
            a(j, i) = m(i, j);
        }
    }
    std::vector<double> v(n), p(n), w(n);
    for (std::size_t k = 0; k + 2 < n; ++k)
    {
        const std::size_t len = n - k - 1;
        double xnorm = 0.0;
        {
            std::span<const double> x(&a(k + 1, k), len);
            xnorm = norm2(x);
        }
        if (xnorm == 0.0)
        {
            continue;
        }
        const double x0 = a(k + 1, k);
        const double alpha = -std::copysign(xnorm, x0);
        for (std::size_t i = 0; i < len; ++i)
        {
            v[i] = a(k + 1 + i, k);
        }
        v[0] -= alpha;
        const double vtv = xnorm * xnorm - x0 * x0 + v[0] * v[0];
        if (vtv == 0.0)
        {
            continue;
        }
        const double tau = 2.0 / vtv;
        // p = tau * A22 v
        for (std::size_t i = 0; i < len; ++i)
        {
            p[i] = 0.0;
        }
        for (std::size_t j = 0; j < len; ++j)
        {
            const double vj = tau * v[j];
            std::span<const double> colj(&a(k + 1, k + 1 + j), len);
            for (std::size_t i = 0; i < len; ++i)
            {
                p[i] += colj[i] * vj;
            }
        }
        double ptv = 0.0;
        for (std::size_t i = 0; i < len; ++i)
        {
            ptv += p[i] * v[i];
        }
        const double half = 0.5 * tau * ptv;
        for (std::size_t i = 0; i < len; ++i)
        {
            w[i] = p[i] - half * v[i];
        }
        for (std::size_t j = 0; j < len; ++j)
        {
            std::span<double> colj(&a(k + 1, k + 1 + j), len);
            const double vj = v[j];
            const double wj = w[j];
            for (std::size_t i = 0; i < len; ++i)
            {
                colj[i] -= v[i] * wj + w[i] * vj;
            }
        }
        a(k + 1, k) = alpha;
        a(k, k + 1) = alpha;
    }
    std::vector<double> diag(n), off(n - 1);
    for (std::size_t i = 0; i < n; ++i)
    {
        diag[i] = a(i, i);
        if (i + 1 < n)
        {
            off[i] = a(i + 1, i);
        }
    }
    return symmetric_tridiagonal_eigenvalues(std::move(diag), std::move(off));
}

double symmetric_spectral_norm(const DenseMatrix& m)
{
    const auto ev = symmetric_eigenvalues(m);
    if (ev.empty())
    {
        return 0.0;
    }
    return std::max(std::abs(ev.front()), std::abs(ev.back()));
}

double spectral_norm(const DenseMatrix& m)
{
    if (m.rows() == 0 || m.cols() == 0)
    {
        return 0.0;
    }
    if (m.cols() == 1)
    {
        return norm2(m.col(0));
    }
    // Gram of the narrower side; scale first so tiny error matrices keep precision.
    double amax = 0.0;
    for (double v : m.entries())
    {
        amax = std::max(amax, std::abs(v));
    }
    if (amax == 0.0)
    {
        return 0.0;
    }
    const DenseMatrix scaled = (1.0 / amax) * m;
    const DenseMatrix gram = scaled.rows() >= scaled.cols()
                                 ? multiply_transposed(scaled, scaled)
                                 : multiply_transposed(scaled.transposed(), scaled.transposed());
    const auto ev = symmetric_eigenvalues(gram);
    return amax * std::sqrt(std::max(ev.back(), 0.0));
}

// ---------------------------------------------------------------------------
// QR

QrFactors householder_qr(const DenseMatrix& m)
{
    const std::size_t rows = m.rows();
    const std::size_t cols = m.cols();
    if (rows < cols)
    {
        throw Error(ErrorKind::DimensionMismatch, "householder_qr needs rows >= cols");
    }
    const double tol = static_cast<double>(std::max(rows, cols)) * kEps * frobenius_norm(m);

    DenseMatrix a = m;
    DenseMatrix v(rows, cols);
    std::vector<double> tau(cols, 0.0);

    for (std::size_t j = 0; j < cols; ++j)
    {
        const std::size_t len = rows - j;
        std::span<double> x(&a(j, j), len);
        const double xnorm = norm2(x);
        std::span<double> vj(&v(j, j), len);
        std::copy(x.begin(), x.end(), vj.begin());
        if (xnorm == 0.0)
        {
            tau[j] = 0.0;
            continue;
        }
        const double alpha = -std::copysign(xnorm, x[0]);
        vj[0] -= alpha;
        const double vtv = norm2(vj);
        tau[j] = 2.0 / (vtv * vtv);
        x[0] = alpha;
        std::fill(x.begin() + 1, x.end(), 0.0);
        for (std::size_t c = j + 1; c < cols; ++c)
        {
            std::span<double> y(&a(j, c), len);
            const double w = tau[j] * dot(vj, y);
            axpy(-w, vj, y);
        }
    }

    QrFactors out{DenseMatrix(rows, cols), DenseMatrix(cols, cols)};
    for (std::size_t j = 0; j < cols; ++j)
    {
        for (std::size_t i = 0; i <= j; ++i)
        {
            out.r(i, j) = a(i, j);
        }
    }
    for (std::size_t j = 0; j < cols; ++j)
    {
        if (std::abs(out.r(j, j)) <= tol)
        {
            throw Error(ErrorKind::RankDeficient,
                        "diagonal " + std::to_string(j) + " of R below breakdown tolerance");
        }
    }
    for (std::size_t j = 0; j < cols; ++j)
    {
        out.q(j, j) = 1.0;
    }
    for (std::size_t j = cols; j-- > 0;)
    {
        if (tau[j] == 0.0)
        {
            continue;
        }
        const std::size_t len = rows - j;
        std::span<const double> vj(&v(j, j), len);
        for (std::size_t c = j; c < cols; ++c)
        {
            std::span<double> y(&out.q(j, c), len);
            const double w = tau[j] * dot(vj, y);
            axpy(-w, vj, y);
        }
    }
    for (std::size_t j = 0; j < cols; ++j)
    {
        if (out.r(j, j) < 0.0)
        {
            for (std::size_t c = j; c < cols; ++c)
            {
                out.r(j, c) = -out.r(j, c);
            }
            scale(-1.0, out.q.col(j));
        }
    }
    return out;
}

DenseVector solve_upper(const DenseMatrix& r, std::span<const double> b)
{
    const std::size_t n = r.cols();
    require_same_size(r.rows(), n, "solve_upper square");
    require_same_size(b.size(), n, "solve_upper rhs");
    std::vector<double> x(b.begin(), b.end());
    for (std::size_t j = n; j-- > 0;)
    {
        if (r(j, j) == 0.0)
        {
            throw Error(ErrorKind::RankDeficient, "zero diagonal in triangular solve");
        }
        x[j] /= r(j, j);
        const double xj = x[j];
        auto cj = r.col(j);
        for (std::size_t i = 0; i < j; ++i)
        {
            x[i] -= cj[i] * xj;
        }
    }
    return DenseVector(std::move(x));
}

// ---------------------------------------------------------------------------
// Gram-Schmidt

void orthogonalize_in_place(std::span<double> v, const DenseMatrix& basis, std::size_t count,
                            int passes)
{
    count = std::min(count, basis.cols());
    for (int pass = 0; pass < passes; ++pass)
    {
        for (std::size_t j = 0; j < count; ++j)
        {
            auto q = basis.col(j);
            const double h = dot(q, v);
            axpy(-h, q, v);
        }
    }
}

double max_abs_inner(std::span<const double> v, const DenseMatrix& basis, std::size_t count)
{
    count = std::min(count, basis.cols());
    double worst = 0.0;
    for (std::size_t j = 0; j < count; ++j)
    {
        worst = std::max(worst, std::abs(dot(basis.col(j), v)));
    }
    return worst;
}

DenseVector mgs_orthogonalize(const DenseVector& v, const DenseMatrix& basis, int passes)
{
    if (passes != 1 && passes != 2)
    {
        throw Error(ErrorKind::DomainError, "mgs passes must be 1 or 2");
    }
    if (basis.cols() > 0)
    {
        require_same_size(v.size(), basis.rows(), "mgs_orthogonalize");
    }
    DenseVector out = v;
    orthogonalize_in_place(out.span(), basis, basis.cols(), passes);
    const double before = norm2(v);
    const double after = norm2(out);
    if (after <= static_cast<double>(std::max<std::size_t>(v.size(), 1)) * kEps * before ||
        after == 0.0)
    {
        throw Error(ErrorKind::BreakdownToZero, "vector lies numerically in span(basis)");
    }
    return out;
}

double subspace_angle_sin(const DenseVector& x, const DenseVector& y)
{
    require_same_size(x.size(), y.size(), "subspace_angle_sin");
    const double nx = norm2(x);
    const double ny = norm2(y);
    if (nx == 0.0 || ny == 0.0)
    {
        throw Error(ErrorKind::ZeroVector, "subspace_angle_sin of a zero vector");
    }
    DenseVector xh = (1.0 / nx) * x;
    const DenseVector yh = (1.0 / ny) * y;
    const double c = dot(xh, yh);
    axpy(-c, yh.span(), xh.span());
    return std::clamp(norm2(xh), 0.0, 1.0);
}

} // namespace jbd
