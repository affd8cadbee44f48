#ifndef JBD_TESTGEN_HPP
#define JBD_TESTGEN_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jbd/dense.hpp"
#include "jbd/sparse.hpp"

namespace jbd
{

/// A matrix pair plus whatever ground truth its construction provides.
struct ConstructedPair
{
    std::string name;
    SparseMatrix a;
    SparseMatrix l;
    /// Generalized singular pairs {c_i, s_i}, largest c first. Empty when unknown.
    std::vector<double> c;
    std::vector<double> s;
    /// Right generalized singular vectors as columns (same order as c).
    std::optional<DenseMatrix> right;
    /// True when the left vectors of A and of L are the standard basis e_i.
    bool left_standard_basis = false;

    bool has_ground_truth() const noexcept { return !c.empty(); }
};

/// Symmetric orthogonal D, d_ij = sqrt(2/(n+1)) sin(i j pi / (n+1)).
DenseMatrix sine_matrix(std::size_t n);

/// A = diag(c) D, L = diag(s) D with s = sqrt(1 - c^2). Throws DomainError
/// if some c_i lies outside [0, 1].
ConstructedPair make_pair_cs_spectrum(std::size_t n, const std::vector<double>& c,
                                      std::string name = "cs_spectrum");

/// c_i = (3n/2 - i + 1) / (2n), i = 1..n; c_1 = 0.75.
std::vector<double> ac_ls_spectrum(std::size_t n);
/// Double clusters at 0.99, 0.95 and 0; needs n >= 13.
std::vector<double> example1_spectrum(std::size_t n);
/// c(1:4) from 1 to 0.7, c(5:n-2) from 0.65 to 0.15, then 0.10, 0.05; needs n >= 6.
std::vector<double> example2_spectrum(std::size_t n);

ConstructedPair make_ac_ls_pair(std::size_t n);
ConstructedPair make_example1_pair(std::size_t n);
ConstructedPair make_example2_pair(std::size_t n);

/// (n-1) x n first-difference operator with +1 on the diagonal, -1 above.
SparseMatrix make_first_derivative(std::size_t n);
/// diag(2m, 2m-1, ..., m+1) / 1000.
SparseMatrix make_scaled_diag(std::size_t m);

/// Stand-ins for the external collection matrices, no ground truth:
/// "deriv": tall graded sparse A (2n x n) with the first-difference L.
ConstructedPair make_derivative_analogue(std::size_t n, std::uint64_t seed);
/// "laplace": two nearby shifted 1-D Laplacians.
ConstructedPair make_laplace_analogue(std::size_t n);
/// "scaled_diag": ill-conditioned graded bidiagonal A with L = scaled diagonal.
ConstructedPair make_scaled_diag_analogue(std::size_t n);

/// Names accepted by make_builtin.
const std::vector<std::string>& builtin_names();
/// Throws InvalidConfig for unknown names and DomainError for sizes below a
/// recipe's minimum.
ConstructedPair make_builtin(const std::string& name, std::size_t n, std::uint64_t seed = 1);

} // namespace jbd

#endif
