#include "jbd/testgen.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace jbd
{

namespace
{

std::vector<double> linspace(double first, double last, std::size_t count)
{
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i)
    {
        out[i] = count == 1 ? first
                            : first + (last - first) * static_cast<double>(i) /
                                          static_cast<double>(count - 1);
    }
    return out;
}

void require_size(std::size_t n, std::size_t minimum, const char* what)
{
    if (n < minimum)
    {
        throw Error(ErrorKind::DomainError,
                    std::string(what) + " needs n >= " + std::to_string(minimum));
    }
}

SparseMatrix tridiagonal(std::size_t n, double lower, double diag, double upper)
{
    std::vector<Triplet> t;
    t.reserve(3 * n);
    for (std::size_t i = 0; i < n; ++i)
    {
        if (i > 0)
        {
            t.push_back({i, i - 1, lower});
        }
        t.push_back({i, i, diag});
        if (i + 1 < n)
        {
            t.push_back({i, i + 1, upper});
        }
    }
    return SparseMatrix::from_triplets(n, n, std::move(t));
}

} // namespace

DenseMatrix sine_matrix(std::size_t n)
{
    DenseMatrix d(n, n);
    const double scale_factor = std::sqrt(2.0 / static_cast<double>(n + 1));
    const double h = std::numbers::pi / static_cast<double>(n + 1);
    for (std::size_t j = 0; j < n; ++j)
    {
        for (std::size_t i = 0; i < n; ++i)
        {
            // Reduce the argument modulo 2(n+1) so large products stay exact.
            const std::size_t prod = ((i + 1) * (j + 1)) % (2 * (n + 1));
            d(i, j) = scale_factor * std::sin(h * static_cast<double>(prod));
        }
    }
    return d;
}

ConstructedPair make_pair_cs_spectrum(std::size_t n, const std::vector<double>& c,
                                      std::string name)
{
    if (c.size() != n)
    {
        throw Error(ErrorKind::DimensionMismatch, "spectrum length differs from n");
    }
    ConstructedPair out;
    out.name = std::move(name);
    out.c = c;
    out.s.resize(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        if (!(c[i] >= 0.0 && c[i] <= 1.0))
        {
            throw Error(ErrorKind::DomainError,
                        "c_" + std::to_string(i + 1) + " outside [0, 1]");
        }
        out.s[i] = std::sqrt((1.0 - c[i]) * (1.0 + c[i]));
    }
    const DenseMatrix d = sine_matrix(n);
    std::vector<Triplet> ta, tl;
    ta.reserve(n * n);
    tl.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i)
    {
        for (std::size_t j = 0; j < n; ++j)
        {
            const double dij = d(i, j);
            if (c[i] != 0.0 && dij != 0.0)
            {
                ta.push_back({i, j, c[i] * dij});
            }
            if (out.s[i] != 0.0 && dij != 0.0)
            {
                tl.push_back({i, j, out.s[i] * dij});
            }
        }
    }
    out.a = SparseMatrix::from_triplets(n, n, std::move(ta));
    out.l = SparseMatrix::from_triplets(n, n, std::move(tl));
    out.right = d;
    out.left_standard_basis = true;
    return out;
}

std::vector<double> ac_ls_spectrum(std::size_t n)
{
    require_size(n, 1, "ac_ls");
    std::vector<double> c(n);
    const double nn = static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        c[i] = (1.5 * nn - static_cast<double>(i)) / (2.0 * nn);
    }
    return c;
}

std::vector<double> example1_spectrum(std::size_t n)
{
    require_size(n, 13, "example1");
    std::vector<double> c(n);
    c[0] = c[1] = 0.99;
    c[2] = c[3] = 0.95;
    c[4] = 0.90;
    c[5] = 0.85;
    const auto mid = linspace(0.80, 0.30, n - 12);
    std::copy(mid.begin(), mid.end(), c.begin() + 6);
    c[n - 6] = 0.25;
    c[n - 5] = 0.20;
    c[n - 4] = 0.15;
    c[n - 3] = 0.10;
    c[n - 2] = 0.0;
    c[n - 1] = 0.0;
    return c;
}

std::vector<double> example2_spectrum(std::size_t n)
{
    require_size(n, 6, "example2");
    std::vector<double> c(n);
    const auto head = linspace(1.0, 0.7, 4);
    std::copy(head.begin(), head.end(), c.begin());
    const auto mid = linspace(0.65, 0.15, n - 6);
    std::copy(mid.begin(), mid.end(), c.begin() + 4);
    c[n - 2] = 0.10;
    c[n - 1] = 0.05;
    return c;
}

ConstructedPair make_ac_ls_pair(std::size_t n)
{
    return make_pair_cs_spectrum(n, ac_ls_spectrum(n), "Ac_Ls");
}

ConstructedPair make_example1_pair(std::size_t n)
{
    return make_pair_cs_spectrum(n, example1_spectrum(n), "example1");
}

ConstructedPair make_example2_pair(std::size_t n)
{
    return make_pair_cs_spectrum(n, example2_spectrum(n), "example2");
}

SparseMatrix make_first_derivative(std::size_t n)
{
    require_size(n, 2, "first derivative");
    std::vector<Triplet> t;
    t.reserve(2 * (n - 1));
    for (std::size_t i = 0; i + 1 < n; ++i)
    {
        t.push_back({i, i, 1.0});
        t.push_back({i, i + 1, -1.0});
    }
    return SparseMatrix::from_triplets(n - 1, n, std::move(t));
}

SparseMatrix make_scaled_diag(std::size_t m)
{
    require_size(m, 1, "scaled diagonal");
    std::vector<Triplet> t;
    t.reserve(m);
    for (std::size_t i = 0; i < m; ++i)
    {
        t.push_back({i, i, static_cast<double>(2 * m - i) / 1000.0});
    }
    return SparseMatrix::from_triplets(m, m, std::move(t));
}

ConstructedPair make_derivative_analogue(std::size_t n, std::uint64_t seed)
{
    require_size(n, 2, "deriv");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> value(-1.0, 1.0);
    std::uniform_int_distribution<std::size_t> column(0, n - 1);
    std::vector<Triplet> t;
    const auto diag = linspace(1.0, 0.01, n);
    for (std::size_t i = 0; i < n; ++i)
    {
        t.push_back({i, i, diag[i]});
        // Lower block: a few random entries per row.
        for (int r = 0; r < 3; ++r)
        {
            t.push_back({n + i, column(rng), 0.1 * value(rng)});
        }
    }
    ConstructedPair out;
    out.name = "deriv";
    out.a = SparseMatrix::from_triplets(2 * n, n, std::move(t));
    out.l = make_first_derivative(n);
    return out;
}

ConstructedPair make_laplace_analogue(std::size_t n)
{
    require_size(n, 2, "laplace");
    ConstructedPair out;
    out.name = "laplace";
    out.a = tridiagonal(n, -1.0, 2.002, -1.0);
    out.l = tridiagonal(n, -1.0, 2.0008, -1.0);
    return out;
}

ConstructedPair make_scaled_diag_analogue(std::size_t n)
{
    require_size(n, 2, "scaled_diag");
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double g = std::pow(10.0, -4.36 * static_cast<double>(i) / static_cast<double>(n - 1));
        t.push_back({i, i, g});
        if (i + 1 < n)
        {
            t.push_back({i, i + 1, 0.3 * g});
        }
    }
    ConstructedPair out;
    out.name = "scaled_diag";
    out.a = SparseMatrix::from_triplets(n, n, std::move(t));
    out.l = make_scaled_diag(n);
    return out;
}

const std::vector<std::string>& builtin_names()
{
    static const std::vector<std::string> names = {"Ac_Ls", "example1", "example2",
                                                   "deriv", "laplace", "scaled_diag"};
    return names;
}

ConstructedPair make_builtin(const std::string& name, std::size_t n, std::uint64_t seed)
{
    if (name == "Ac_Ls")
    {
        return make_ac_ls_pair(n);
    }
    if (name == "example1")
    {
        return make_example1_pair(n);
    }
    if (name == "example2")
    {
        return make_example2_pair(n);
    }
    if (name == "deriv")
    {
        return make_derivative_analogue(n, seed);
    }
    if (name == "laplace")
    {
        return make_laplace_analogue(n);
    }
    if (name == "scaled_diag")
    {
        return make_scaled_diag_analogue(n);
    }
    throw Error(ErrorKind::InvalidConfig, "unknown builtin pair '" + name + "'");
}

} // namespace jbd
