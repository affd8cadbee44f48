#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "jbd/experiment.hpp"

int main(int argc, char** argv)
{
    jbd::ExperimentConfig cfg;
    if (const char* env = std::getenv("JBD_OUT_DIR"))
    {
        cfg.out = env;
    }
    std::string matrix_a;
    std::string matrix_l;
    std::string reorth = "full";
    std::string which = "largest";
    std::string inner_mode = "reference";
    std::string swap = "auto";
    std::string out = cfg.out.string();

    CLI::App app{"Joint bidiagonalization GSVD experiments"};
    app.add_option("--pair", cfg.pair, "builtin pair: Ac_Ls, example1, example2, deriv, laplace, scaled_diag")
        ->capture_default_str();
    app.add_option("--size", cfg.size, "order n of a builtin pair")->capture_default_str();
    app.add_option("--matrix-a", matrix_a, "Matrix Market file for A");
    app.add_option("--matrix-l", matrix_l, "Matrix Market file for L");
    app.add_option("--reorth", reorth, "none, full, one-sided or semi")->capture_default_str();
    app.add_option("--max-steps", cfg.max_steps, "step limit")->capture_default_str();
    app.add_option("--tol", cfg.tol, "residual bound tolerance")->capture_default_str();
    app.add_option("--want", cfg.want, "number of pairs")->capture_default_str();
    app.add_option("--which", which, "largest or smallest")->capture_default_str();
    app.add_option("--inner-mode", inner_mode, "reference or iterative")->capture_default_str();
    app.add_option("--inner-tol", cfg.inner_tol, "LSQR atol and btol")->capture_default_str();
    app.add_option("--diag-stride", cfg.diag_stride, "steps between diagnostics samples")
        ->capture_default_str();
    app.add_option("--out", out, "output directory (default $JBD_OUT_DIR or .)");
    app.add_option("--seed", cfg.seed, "seed for randomized constructions")->capture_default_str();
    app.add_option("--swap", swap, "auto, keep or swap")->capture_default_str();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return jbd::kExitConfig;
    }

    cfg.out = out;
    if (!matrix_a.empty())
    {
        cfg.matrix_a = matrix_a;
    }
    if (!matrix_l.empty())
    {
        cfg.matrix_l = matrix_l;
    }
    try
    {
        cfg.reorth = jbd::parse_reorth(reorth);
        cfg.which = jbd::parse_which(which);
        cfg.inner_mode = jbd::parse_inner_mode(inner_mode);
        cfg.swap = jbd::parse_swap(swap);
    }
    catch (const jbd::Error& e)
    {
        std::cerr << e.what() << "\n";
        return jbd::kExitConfig;
    }
    return jbd::run_experiment(cfg);
}
