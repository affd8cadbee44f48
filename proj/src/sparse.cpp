#include "jbd/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace jbd
{

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                           std::vector<std::size_t> col_idx, std::vector<double> values)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
      values_(std::move(values))
{
    if (row_ptr_.size() != rows_ + 1 || row_ptr_.front() != 0 ||
        row_ptr_.back() != values_.size() || col_idx_.size() != values_.size())
    {
        throw Error(ErrorKind::DimensionMismatch, "inconsistent CSR array lengths");
    }
    for (std::size_t i = 0; i < rows_; ++i)
    {
        if (row_ptr_[i] > row_ptr_[i + 1])
        {
            throw Error(ErrorKind::DimensionMismatch, "row pointers decrease");
        }
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
        {
            if (col_idx_[p] >= cols_ || (p > row_ptr_[i] && col_idx_[p] <= col_idx_[p - 1]))
            {
                throw Error(ErrorKind::DimensionMismatch,
                            "column indices out of range or unsorted in row " + std::to_string(i));
            }
            if (!std::isfinite(values_[p]))
            {
                throw Error(ErrorKind::NonFinite, "sparse value is NaN or Inf");
            }
            if (values_[p] == 0.0)
            {
                throw Error(ErrorKind::DomainError, "explicit zero stored");
            }
        }
    }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> entries)
{
    for (const auto& t : entries)
    {
        if (t.row >= rows || t.col >= cols)
        {
            throw Error(ErrorKind::DimensionMismatch, "triplet index out of range");
        }
        if (!std::isfinite(t.value))
        {
            throw Error(ErrorKind::NonFinite, "triplet value is NaN or Inf");
        }
    }
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<std::size_t> ptr(rows + 1, 0);
    std::vector<std::size_t> idx;
    std::vector<double> val;
    idx.reserve(entries.size());
    val.reserve(entries.size());
    std::size_t i = 0;
    while (i < entries.size())
    {
        const std::size_t r = entries[i].row;
        const std::size_t c = entries[i].col;
        double sum = 0.0;
        for (; i < entries.size() && entries[i].row == r && entries[i].col == c; ++i)
        {
            sum += entries[i].value;
        }
        if (sum != 0.0)
        {
            idx.push_back(c);
            val.push_back(sum);
            ++ptr[r + 1];
        }
    }
    for (std::size_t r = 0; r < rows; ++r)
    {
        ptr[r + 1] += ptr[r];
    }
    return SparseMatrix(rows, cols, std::move(ptr), std::move(idx), std::move(val));
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& m)
{
    std::vector<Triplet> t;
    for (std::size_t j = 0; j < m.cols(); ++j)
    {
        for (std::size_t i = 0; i < m.rows(); ++i)
        {
            if (m(i, j) != 0.0)
            {
                t.push_back({i, j, m(i, j)});
            }
        }
    }
    return from_triplets(m.rows(), m.cols(), std::move(t));
}

SparseMatrix SparseMatrix::identity(std::size_t n)
{
    std::vector<Triplet> t;
    t.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        t.push_back({i, i, 1.0});
    }
    return from_triplets(n, n, std::move(t));
}

DenseMatrix SparseMatrix::to_dense() const
{
    DenseMatrix d(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
    {
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
        {
            d(i, col_idx_[p]) = values_[p];
        }
    }
    return d;
}

DenseVector matvec(const SparseMatrix& m, std::span<const double> x)
{
    if (x.size() != m.cols())
    {
        throw Error(ErrorKind::DimensionMismatch, "matvec: x length " + std::to_string(x.size()) +
                                                      " vs cols " + std::to_string(m.cols()));
    }
    DenseVector y(m.rows());
    const auto& ptr = m.row_ptr();
    const auto& idx = m.col_idx();
    const auto& val = m.values();
    for (std::size_t i = 0; i < m.rows(); ++i)
    {
        double s = 0.0;
        for (std::size_t p = ptr[i]; p < ptr[i + 1]; ++p)
        {
            s += val[p] * x[idx[p]];
        }
        y[i] = s;
    }
    return y;
}

DenseVector matvec_transposed(const SparseMatrix& m, std::span<const double> y)
{
    if (y.size() != m.rows())
    {
        throw Error(ErrorKind::DimensionMismatch,
                    "matvec_transposed: y length " + std::to_string(y.size()) + " vs rows " +
                        std::to_string(m.rows()));
    }
    DenseVector x(m.cols());
    const auto& ptr = m.row_ptr();
    const auto& idx = m.col_idx();
    const auto& val = m.values();
    for (std::size_t i = 0; i < m.rows(); ++i)
    {
        const double yi = y[i];
        if (yi == 0.0)
        {
            continue;
        }
        for (std::size_t p = ptr[i]; p < ptr[i + 1]; ++p)
        {
            x[idx[p]] += val[p] * yi;
        }
    }
    return x;
}

SparseMatrix stack(const SparseMatrix& top, const SparseMatrix& bottom)
{
    if (top.cols() != bottom.cols())
    {
        throw Error(ErrorKind::DimensionMismatch, "stack: column counts differ");
    }
    std::vector<std::size_t> ptr = top.row_ptr();
    for (std::size_t i = 1; i < bottom.row_ptr().size(); ++i)
    {
        ptr.push_back(top.nnz() + bottom.row_ptr()[i]);
    }
    std::vector<std::size_t> idx = top.col_idx();
    idx.insert(idx.end(), bottom.col_idx().begin(), bottom.col_idx().end());
    std::vector<double> val = top.values();
    val.insert(val.end(), bottom.values().begin(), bottom.values().end());
    return SparseMatrix(top.rows() + bottom.rows(), top.cols(), std::move(ptr), std::move(idx),
                        std::move(val));
}

namespace
{

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line,
                             const std::string& what)
{
    throw Error(ErrorKind::ParseError,
                path.string() + ":" + std::to_string(line) + ": " + what);
}

} // namespace

SparseMatrix read_matrix_market(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw Error(ErrorKind::IoError, "cannot open " + path.string());
    }
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line))
    {
        parse_fail(path, 1, "empty file");
    }
    ++lineno;
    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (tag != "%%MatrixMarket" || lower(object) != "matrix")
    {
        parse_fail(path, lineno, "missing %%MatrixMarket matrix banner");
    }
    field = lower(field);
    symmetry = lower(symmetry);
    if (lower(format) != "coordinate")
    {
        throw Error(ErrorKind::UnsupportedField, path.string() + ": only coordinate format");
    }
    if (field != "real" && field != "integer" && field != "double")
    {
        throw Error(ErrorKind::UnsupportedField, path.string() + ": field '" + field + "'");
    }
    if (symmetry != "general" && symmetry != "symmetric")
    {
        throw Error(ErrorKind::UnsupportedField, path.string() + ": symmetry '" + symmetry + "'");
    }
    const bool symmetric = symmetry == "symmetric";

    std::size_t rows = 0, cols = 0, count = 0;
    bool have_size = false;
    std::size_t read = 0;
    std::vector<Triplet> entries;
    while (std::getline(in, line))
    {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '%')
        {
            continue;
        }
        std::istringstream ls(line);
        if (!have_size)
        {
            if (!(ls >> rows >> cols >> count))
            {
                parse_fail(path, lineno, "bad size line");
            }
            have_size = true;
            entries.reserve(symmetric ? 2 * count : count);
            continue;
        }
        long long r = 0, c = 0;
        double v = 0.0;
        std::string vs;
        if (!(ls >> r >> c >> vs))
        {
            parse_fail(path, lineno, "bad entry line");
        }
        try
        {
            std::size_t used = 0;
            v = std::stod(vs, &used);
            if (used != vs.size())
            {
                parse_fail(path, lineno, "bad value '" + vs + "'");
            }
        }
        catch (const std::logic_error&)
        {
            parse_fail(path, lineno, "bad value '" + vs + "'");
        }
        if (r < 1 || c < 1 || static_cast<std::size_t>(r) > rows ||
            static_cast<std::size_t>(c) > cols)
        {
            parse_fail(path, lineno, "index out of range");
        }
        if (!std::isfinite(v))
        {
            parse_fail(path, lineno, "non-finite value");
        }
        const auto ri = static_cast<std::size_t>(r - 1);
        const auto ci = static_cast<std::size_t>(c - 1);
        entries.push_back({ri, ci, v});
        ++read;
        if (symmetric && ri != ci)
        {
            entries.push_back({ci, ri, v});
        }
    }
    if (!have_size)
    {
        parse_fail(path, lineno, "missing size line");
    }
    if (read != count)
    {
        parse_fail(path, lineno,
                   "expected " + std::to_string(count) + " entries, found " +
                       std::to_string(read));
    }
    return SparseMatrix::from_triplets(rows, cols, std::move(entries));
}

void write_matrix_market(const SparseMatrix& m, const std::filesystem::path& path)
{
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (f == nullptr)
    {
        throw Error(ErrorKind::IoError, "cannot write " + path.string());
    }
    std::fprintf(f, "%%%%MatrixMarket matrix coordinate real general\n");
    std::fprintf(f, "%zu %zu %zu\n", m.rows(), m.cols(), m.nnz());
    for (std::size_t i = 0; i < m.rows(); ++i)
    {
        for (std::size_t p = m.row_ptr()[i]; p < m.row_ptr()[i + 1]; ++p)
        {
            std::fprintf(f, "%zu %zu %.16e\n", i + 1, m.col_idx()[p] + 1, m.values()[p]);
        }
    }
    if (std::fclose(f) != 0)
    {
        throw Error(ErrorKind::IoError, "failed to close " + path.string());
    }
}

} // namespace jbd
