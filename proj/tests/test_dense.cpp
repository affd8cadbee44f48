#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "jbd/dense.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

using namespace jbd;
using testutil::kind_of;

namespace
{

double gram_defect(const DenseMatrix& q)
{
    const DenseMatrix g = multiply_transposed(q, q);
    return oracle::max_abs_diff(g, DenseMatrix::identity(q.cols()));
}

DenseMatrix sine_matrix_for_test(std::size_t n)
{
    DenseMatrix d(n, n);
    const double h = std::acos(-1.0) / static_cast<double>(n + 1);
    const double scale = std::sqrt(2.0 / static_cast<double>(n + 1));
    for (std::size_t i = 0; i < n; ++i)
    {
        for (std::size_t j = 0; j < n; ++j)
        {
            d(i, j) = scale * std::sin(static_cast<double>((i + 1) * (j + 1)) * h);
        }
    }
    return d;
}

} // namespace

TEST(DenseVector, RejectsNonFiniteEntries)
{
    EXPECT_EQ(kind_of([] { DenseVector v(std::vector<double>{1.0, NAN}); }), ErrorKind::NonFinite);
    EXPECT_EQ(kind_of([] { DenseVector v(std::vector<double>{INFINITY}); }), ErrorKind::NonFinite);
}

TEST(DenseVector, UnitVector)
{
    const DenseVector e = DenseVector::unit(4, 2);
    EXPECT_EQ(e.size(), 4u);
    EXPECT_EQ(e[2], 1.0);
    EXPECT_EQ(norm2(e), 1.0);
}

TEST(DenseMatrix, ColumnMajorLayoutAndViews)
{
    const DenseMatrix m = DenseMatrix::from_rows({{1, 2, 3}, {4, 5, 6}});
    EXPECT_EQ(m.rows(), 2u);
    EXPECT_EQ(m.cols(), 3u);
    EXPECT_EQ(m(1, 2), 6.0);
    EXPECT_EQ(m.entries()[1], 4.0);

    const DenseMatrix t = m.transposed();
    EXPECT_EQ(t(2, 1), 6.0);
    EXPECT_EQ(m.leading_columns(2).cols(), 2u);
    const DenseMatrix block = m.row_block(1, 1);
    EXPECT_EQ(block.rows(), 1u);
    EXPECT_EQ(block(0, 0), 4.0);
}

TEST(DenseMatrix, AppendColumnAdoptsRowCount)
{
    DenseMatrix m;
    const std::vector<double> c{1.0, 2.0, 3.0};
    m.append_column(c);
    m.append_column(c);
    EXPECT_EQ(m.rows(), 3u);
    EXPECT_EQ(m.cols(), 2u);
    const std::vector<double> bad{1.0};
    EXPECT_EQ(kind_of([&] { m.append_column(bad); }), ErrorKind::DimensionMismatch);
}

TEST(DenseMatrix, ShapeMismatchThrows)
{
    EXPECT_EQ(kind_of([] { DenseMatrix m(2, 2, std::vector<double>{1, 2, 3}); }),
              ErrorKind::DimensionMismatch);
    const DenseMatrix a(2, 3);
    const DenseMatrix b(2, 3);
    EXPECT_EQ(kind_of([&] { multiply(a, b); }), ErrorKind::DimensionMismatch);
}

TEST(Level1, NormAvoidsOverflowAndUnderflow)
{
    const std::vector<double> big{3e300, 4e300};
    EXPECT_DOUBLE_EQ(norm2(big), 5e300);
    const std::vector<double> tiny{3e-300, 4e-300};
    EXPECT_DOUBLE_EQ(norm2(tiny), 5e-300);
    const std::vector<double> none;
    EXPECT_EQ(norm2(none), 0.0);
}

TEST(Level1, DotAxpyScale)
{
    std::vector<double> x{1, 2, 3};
    std::vector<double> y{4, 5, 6};
    EXPECT_EQ(dot(x, y), 32.0);
    axpy(2.0, x, y);
    EXPECT_EQ(y[2], 12.0);
    scale(0.5, y);
    EXPECT_EQ(y[0], 3.0);
}

TEST(Products, MatchHandComputedValues)
{
    const DenseMatrix a = DenseMatrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
    const std::vector<double> x{1, -1};
    const DenseVector ax = multiply(a, x);
    EXPECT_EQ(ax[0], -1.0);
    EXPECT_EQ(ax[2], -1.0);
    const std::vector<double> y{1, 0, 1};
    const DenseVector aty = multiply_transposed(a, y);
    EXPECT_EQ(aty[0], 6.0);
    EXPECT_EQ(aty[1], 8.0);
    const DenseMatrix ata = multiply_transposed(a, a);
    EXPECT_EQ(ata(0, 0), 35.0);
    EXPECT_EQ(ata(0, 1), 44.0);
    EXPECT_EQ(frobenius_norm(DenseMatrix::identity(4)), 2.0);
}

TEST(Eigen, TridiagonalMatchesJacobi)
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    for (std::size_t n : {1u, 2u, 5u, 17u, 40u})
    {
        std::vector<double> d(n);
        std::vector<double> e(n > 0 ? n - 1 : 0);
        DenseMatrix t(n, n);
        for (std::size_t i = 0; i < n; ++i)
        {
            d[i] = g(rng);
            t(i, i) = d[i];
        }
        for (std::size_t i = 0; i + 1 < n; ++i)
        {
            e[i] = g(rng);
            t(i, i + 1) = t(i + 1, i) = e[i];
        }
        const auto got = symmetric_tridiagonal_eigenvalues(d, e);
        const auto want = oracle::jacobi_eigenvalues(t);
        ASSERT_EQ(got.size(), n);
        for (std::size_t i = 0; i < n; ++i)
        {
            EXPECT_NEAR(got[i], want[i], 1e-13 * (1.0 + std::abs(want[i])));
        }
    }
}

TEST(Eigen, StronglyGradedTridiagonalConverges)
{
    // Entries spanning thirty orders of magnitude.
    const std::size_t n = 60;
    std::vector<double> d(n);
    std::vector<double> e(n - 1);
    for (std::size_t i = 0; i < n; ++i)
    {
        d[i] = std::pow(10.0, -30.0 + 30.0 * static_cast<double>(i) / (n - 1)) *
               ((i % 3 == 0) ? -1.0 : 1.0);
        if (i + 1 < n)
        {
            e[i] = 0.7 * std::pow(10.0, -30.0 + 30.0 * static_cast<double>(i) / (n - 1));
        }
    }
    std::vector<double> ev;
    ASSERT_NO_THROW(ev = symmetric_tridiagonal_eigenvalues(d, e));
    double sum = 0.0;
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        sum += ev[i];
        trace += d[i];
    }
    EXPECT_NEAR(sum, trace, 1e-14);
}

TEST(Eigen, TridiagonalRejectsNonFinite)
{
    EXPECT_EQ(kind_of([] { symmetric_tridiagonal_eigenvalues({1.0, NAN}, {0.5}); }),
              ErrorKind::NonFinite);
    EXPECT_EQ(kind_of([] { symmetric_tridiagonal_eigenvalues({1.0, 2.0}, {}); }),
              ErrorKind::DimensionMismatch);
}

TEST(Eigen, SymmetricDenseMatchesJacobi)
{
    std::mt19937_64 rng(11);
    for (std::size_t n : {3u, 8u, 25u})
    {
        DenseMatrix a = oracle::random_dense(n, n, rng);
        const DenseMatrix s = a + a.transposed();
        const auto got = symmetric_eigenvalues(s);
        const auto want = oracle::jacobi_eigenvalues(s);
        for (std::size_t i = 0; i < n; ++i)
        {
            EXPECT_NEAR(got[i], want[i], 1e-12 * (1.0 + std::abs(want.back())));
        }
    }
}

TEST(Eigen, SpectralNormMatchesOracle)
{
    std::mt19937_64 rng(3);
    for (auto [r, c] : {std::pair<std::size_t, std::size_t>{9, 4}, {4, 9}, {12, 12}})
    {
        const DenseMatrix m = oracle::random_dense(r, c, rng);
        const double want = oracle::singular_values(m).front();
        EXPECT_NEAR(spectral_norm(m), want, 1e-13 * want);
    }
    EXPECT_EQ(spectral_norm(DenseMatrix(3, 2)), 0.0);
}

TEST(Qr, RoundTripAndOrthogonality)
{
    std::mt19937_64 rng(5);
    for (auto [r, c] : {std::pair<std::size_t, std::size_t>{5, 5}, {20, 7}, {60, 30}, {3, 1}})
    {
        const DenseMatrix m = oracle::random_dense(r, c, rng);
        const QrFactors f = householder_qr(m);
        const double tol = 50.0 * kEps * static_cast<double>(c);
        EXPECT_LE(frobenius_norm(m - multiply(f.q, f.r)) / frobenius_norm(m), tol);
        EXPECT_LE(gram_defect(f.q), tol);
        for (std::size_t j = 0; j < c; ++j)
        {
            EXPECT_GE(f.r(j, j), 0.0);
            for (std::size_t i = j + 1; i < c; ++i)
            {
                EXPECT_EQ(f.r(i, j), 0.0);
            }
        }
    }
}

TEST(Qr, RankDeficientInputIsRejected)
{
    const DenseMatrix m = DenseMatrix::from_rows({{1, 2}, {2, 4}, {3, 6}});
    EXPECT_EQ(kind_of([&] { householder_qr(m); }), ErrorKind::RankDeficient);
    EXPECT_EQ(kind_of([] { householder_qr(DenseMatrix(2, 3, 1.0)); }),
              ErrorKind::DimensionMismatch);
}

TEST(Qr, SolveUpperRecoversSolution)
{
    const DenseMatrix r = DenseMatrix::from_rows({{2, 1, 0}, {0, 4, -1}, {0, 0, 0.5}});
    const std::vector<double> x{1, 2, 3};
    const DenseVector b = multiply(r, x);
    const DenseVector got = solve_upper(r, b.span());
    for (std::size_t i = 0; i < 3; ++i)
    {
        EXPECT_NEAR(got[i], x[i], 1e-15);
    }
}

TEST(Orthogonalize, TwoPassesReachWorkingPrecision)
{
    std::mt19937_64 rng(9);
    const QrFactors f = householder_qr(oracle::random_dense(50, 10, rng));
    DenseVector v(50);
    std::normal_distribution<double> g;
    for (double& x : v)
    {
        x = g(rng);
    }
    const DenseVector w = mgs_orthogonalize(v, f.q, 2);
    EXPECT_LE(max_abs_inner(w.span(), f.q, 10) / norm2(w), 1e-15);
}

TEST(Orthogonalize, RejectsBadPassesAndCollapsedVectors)
{
    const DenseMatrix basis = DenseMatrix::identity(3).leading_columns(2);
    const DenseVector in_span{1.0, -2.0, 0.0};
    EXPECT_EQ(kind_of([&] { mgs_orthogonalize(in_span, basis, 3); }), ErrorKind::DomainError);
    EXPECT_EQ(kind_of([&] { mgs_orthogonalize(in_span, basis, 2); }),
              ErrorKind::BreakdownToZero);
    const DenseVector out = mgs_orthogonalize(DenseVector{1.0, 1.0, 1.0}, basis, 1);
    EXPECT_EQ(out[0], 0.0);
    EXPECT_EQ(out[2], 1.0);
}

TEST(Angles, SineOfKnownAngle)
{
    const DenseVector x{1.0, 0.0};
    const DenseVector y{1.0, 1.0};
    EXPECT_NEAR(subspace_angle_sin(x, y), std::sqrt(0.5), 1e-16);
    EXPECT_EQ(subspace_angle_sin(x, -3.0 * x), 0.0);
    EXPECT_EQ(kind_of([&] { subspace_angle_sin(x, DenseVector(2)); }), ErrorKind::ZeroVector);
}

TEST(Qr, SmallWorkedCases)
{
    const QrFactors id = householder_qr(DenseMatrix::identity(3));
    EXPECT_LE(oracle::max_abs_diff(id.q, DenseMatrix::identity(3)), 1e-16);
    EXPECT_LE(oracle::max_abs_diff(id.r, DenseMatrix::identity(3)), 1e-16);

    const QrFactors col = householder_qr(DenseMatrix::from_rows({{3}, {4}}));
    EXPECT_NEAR(col.q(0, 0), 0.6, 4.0 * kEps);
    EXPECT_NEAR(col.q(1, 0), 0.8, 4.0 * kEps);
    EXPECT_NEAR(col.r(0, 0), 5.0, 1e-15);
}

TEST(Qr, StackedTestPairFactorsCleanly)
{
    const std::size_t n = 8;
    // Rows of (diag(c) D; diag(s) D) with D the discrete sine matrix.
    const DenseMatrix d = sine_matrix_for_test(n);
    DenseMatrix z(2 * n, n);
    for (std::size_t i = 0; i < n; ++i)
    {
        const double c = 0.9 - 0.1 * static_cast<double>(i);
        const double s = std::sqrt(1.0 - c * c);
        for (std::size_t j = 0; j < n; ++j)
        {
            z(i, j) = c * d(i, j);
            z(n + i, j) = s * d(i, j);
        }
    }
    const QrFactors f = householder_qr(z);
    EXPECT_LE(gram_defect(f.q), 1e-14);
    EXPECT_LE(oracle::max_abs_diff(multiply(f.q, f.r), z), 1e-14);
}

TEST(Orthogonalize, WorkedCases)
{
    DenseMatrix basis(3, 1);
    basis(1, 0) = 1.0;
    const DenseVector a = mgs_orthogonalize(DenseVector::unit(3, 0), basis, 2);
    EXPECT_EQ(a[0], 1.0);
    EXPECT_EQ(a[1], 0.0);
    const DenseVector b = mgs_orthogonalize(DenseVector{1.0, 1.0, 0.0}, basis, 1);
    EXPECT_EQ(b[0], 1.0);
    EXPECT_EQ(b[1], 0.0);
}

TEST(Orthogonalize, TwoSinglePassesEqualOneDoublePass)
{
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial)
    {
        const QrFactors f = householder_qr(oracle::random_dense(30, 6, rng));
        DenseVector v(30);
        for (double& x : v)
        {
            x = g(rng);
        }
        const DenseVector once = mgs_orthogonalize(mgs_orthogonalize(v, f.q, 1), f.q, 1);
        const DenseVector twice = mgs_orthogonalize(v, f.q, 2);
        for (std::size_t i = 0; i < 30; ++i)
        {
            EXPECT_NEAR(once[i], twice[i], 4.0 * kEps * std::max(1.0, std::abs(twice[i])));
        }
    }
}

TEST(Angles, WorkedCases)
{
    EXPECT_EQ(subspace_angle_sin(DenseVector::unit(2, 0), 2.0 * DenseVector::unit(2, 0)), 0.0);
    EXPECT_NEAR(subspace_angle_sin(DenseVector::unit(2, 0), DenseVector::unit(2, 1)), 1.0, 1e-16);
    const double h = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(subspace_angle_sin(DenseVector{h, h}, DenseVector::unit(2, 0)), 0.7071067811865,
                1e-12);
}

TEST(Angles, SymmetricAndScaleInvariant)
{
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 100; ++trial)
    {
        DenseVector x(7);
        DenseVector y(7);
        for (std::size_t i = 0; i < 7; ++i)
        {
            x[i] = g(rng);
            y[i] = g(rng);
        }
        const double s = subspace_angle_sin(x, y);
        EXPECT_GE(s, 0.0);
        EXPECT_LE(s, 1.0);
        EXPECT_NEAR(s, subspace_angle_sin(y, x), 4.0 * kEps);
        EXPECT_NEAR(s, subspace_angle_sin(-1e5 * x, 3e-7 * y), 4.0 * kEps);
    }
}
