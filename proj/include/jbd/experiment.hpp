#ifndef JBD_EXPERIMENT_HPP
#define JBD_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "jbd/inner_solver.hpp"
#include "jbd/jbd.hpp"

namespace jbd
{

struct ExperimentConfig
{
    std::string pair = "Ac_Ls";
    std::size_t size = 200;
    std::optional<std::filesystem::path> matrix_a;
    std::optional<std::filesystem::path> matrix_l;
    ReorthKind reorth = ReorthKind::Full;
    std::size_t max_steps = 150;
    double tol = 1e-10;
    std::size_t want = 1;
    Which which = Which::Largest;
    InnerMode inner_mode = InnerMode::Reference;
    double inner_tol = 100.0 * kEps;
    std::size_t diag_stride = 5;
    std::filesystem::path out = ".";
    std::uint64_t seed = 1;
    SwapHint swap = SwapHint::Auto;

    /// Throws InvalidConfig.
    void validate() const;
};

/// Exit codes of the experiment runner.
inline constexpr int kExitSuccess = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitConfig = 2;

int exit_code_for(ErrorKind kind) noexcept;

ReorthKind parse_reorth(const std::string& s);
Which parse_which(const std::string& s);
InnerMode parse_inner_mode(const std::string& s);
SwapHint parse_swap(const std::string& s);
std::string_view to_string(ReorthKind k) noexcept;

/// Runs one experiment and writes convergence.csv, diagnostics.csv, the
/// fig*.csv plot tables and summary.json into cfg.out. Failures are written
/// to error.json; the return value is the process exit code.
int run_experiment(const ExperimentConfig& cfg);

} // namespace jbd

#endif
