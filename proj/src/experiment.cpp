#include "jbd/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "jbd/diagnostics.hpp"
#include "jbd/gsvd.hpp"
#include "jbd/testgen.hpp"

namespace jbd
{

namespace
{

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v)
{
    if (std::isnan(v))
    {
        return "";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json num_json(double v)
{
    if (std::isnan(v))
    {
        return nullptr;
    }
    if (std::isinf(v))
    {
        return v > 0 ? "inf" : "-inf";
    }
    return v;
}

class Table
{
  public:
    explicit Table(std::string header) { out_ << header << "\r\n"; }

    template <typename... Cells>
    void row(const Cells&... cells)
    {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
        out_ << "\r\n";
    }

    std::string str() const { return out_.str(); }

  private:
    static std::string cell(double v) { return num(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(const std::string& v) { return v; }

    std::ostringstream out_;
};

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
    {
        throw Error(ErrorKind::IoError, "cannot write " + path.string());
    }
    f << text;
    if (!f)
    {
        throw Error(ErrorKind::IoError, "failed writing " + path.string());
    }
}

ConstructedPair load_pair(const ExperimentConfig& cfg)
{
    if (cfg.matrix_a || cfg.matrix_l)
    {
        if (!cfg.matrix_a || !cfg.matrix_l)
        {
            throw Error(ErrorKind::InvalidConfig, "--matrix-a and --matrix-l go together");
        }
        for (const auto& path : {*cfg.matrix_a, *cfg.matrix_l})
        {
            if (!std::filesystem::exists(path))
            {
                throw Error(ErrorKind::IoError, "missing file " + path.string());
            }
        }
        ConstructedPair pair;
        pair.name = cfg.matrix_a->stem().string() + "+" + cfg.matrix_l->stem().string();
        pair.a = read_matrix_market(*cfg.matrix_a);
        pair.l = read_matrix_market(*cfg.matrix_l);
        return pair;
    }
    return make_builtin(cfg.pair, cfg.size, cfg.seed);
}

// Ground-truth position of the j-th requested pair.
std::size_t truth_index(const ConstructedPair& pair, std::size_t j, Which which)
{
    std::vector<std::size_t> order(pair.c.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pair.c[a] > pair.c[b]; });
    return which == Which::Largest ? order[j] : order[order.size() - 1 - j];
}

json pair_json(const RitzApproximation& r, const ConstructedPair& truth, std::size_t j,
               Which which)
{
    json out;
    out["index"] = r.index + 1;
    out["c"] = num_json(r.c);
    out["s"] = num_json(r.s);
    out["gsv"] = num_json(r.gsv);
    out["residual_bound"] = num_json(r.residual_bound);
    out["residual_direct"] = num_json(r.residual_direct.value_or(kNaN));
    if (truth.has_ground_truth() && j < truth.c.size())
    {
        const std::size_t t = truth_index(truth, j, which);
        out["c_true"] = truth.c[t];
        out["angle_error"] = angle_error(r.c, r.s, truth.c[t], truth.s[t]);
        if (r.x && truth.right)
        {
            out["sin_angle_x"] = subspace_angle_sin(*r.x, truth.right->column(t));
        }
        if (truth.left_standard_basis)
        {
            if (r.y)
            {
                out["sin_angle_y"] = subspace_angle_sin(*r.y, DenseVector::unit(r.y->size(), t));
            }
            if (r.z)
            {
                out["sin_angle_z"] = subspace_angle_sin(*r.z, DenseVector::unit(r.z->size(), t));
            }
        }
    }
    return out;
}

void write_error(const ExperimentConfig& cfg, const std::string& kind, const std::string& what)
{
    json rec{{"error", kind}, {"message", what}};
    std::cerr << rec.dump() << "\n";
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    std::ofstream f(cfg.out / "error.json");
    if (f)
    {
        f << rec.dump(2) << "\n";
    }
}

int run(const ExperimentConfig& cfg)
{
    cfg.validate();
    const ConstructedPair pair = load_pair(cfg);

    SwapDecision decision = maybe_swap_pair(pair.a, pair.l, cfg.swap);
    StackedOperator& op = decision.op;
    const bool swapped = decision.swapped;
    const bool reference = cfg.inner_mode == InnerMode::Reference;
    if (reference)
    {
        op.build_cache();
    }

    JbdConfig jcfg;
    jcfg.strategy.kind = cfg.reorth;
    jcfg.mode = cfg.inner_mode;
    jcfg.lsqr.atol = cfg.inner_tol;
    jcfg.lsqr.btol = cfg.inner_tol;
    jcfg.norm_estimate = estimate_stacked_norm(op, 30);

    StoppingRule stop;
    stop.target = cfg.want;
    stop.which = swapped ? flip(cfg.which) : cfg.which;
    stop.tolerance = cfg.tol;
    stop.norm_r = jcfg.norm_estimate;

    Table conv("k,ritz_index,c,s,residual_bound,residual_direct,angle_error");
    Table diag("k,eta_U,eta_Vtilde,eta_Uhat,uhat_bound,norm_Fk,bound_Fk,norm_Ek,norm_Fhat,"
               "norm_Ghat,inv_norm_Blower,inv_norm_Bhat");
    Table fig1("k,norm_Fk,bound_Fk");
    Table fig2("k,norm_Ek,bound_Ek");
    Table fig3("k,norm_Fhat,bound_Fhat,norm_Ghat,bound_Ghat");
    Table fig4("k,eta_Uhat,uhat_bound");
    Table fig5("k,rank,c");
    Table fig6("k,rank,s_hat,c");
    Table fig9("k,residual_direct,residual_bound,relative_error,angle_error");

    double max_inv_lower = 0.0;
    double max_inv_upper = 0.0;
    double max_norm_lower = 0.0;
    double max_norm_upper = 0.0;
    std::size_t rows = 0;
    const DiagnosticTolerances tol;

    RunOptions options;
    options.on_step = [&](const JbdState& s, const StepRecord& rec) {
        max_inv_lower = std::max(max_inv_lower, rec.inv_norm_lower);
        max_inv_upper = std::max(max_inv_upper, rec.inv_norm_upper);
        max_norm_lower = std::max(max_norm_lower, rec.norm_lower);
        max_norm_upper = std::max(max_norm_upper, rec.norm_upper);
        const LowerBidiagonal lower = s.lower();
        for (std::size_t j = 0; j < rec.selected.size(); ++j)
        {
            const std::size_t idx = rec.selected[j];
            RitzApproximation r;
            r.index = idx;
            r.c = std::clamp(rec.ritz_lower[idx], 0.0, 1.0);
            r.s = std::sqrt(std::max(0.0, (1.0 - r.c) * (1.0 + r.c)));
            r.residual_bound = rec.bounds[j];
            double direct = kNaN;
            if (reference)
            {
                r.w = right_singular_vector(lower, rec.ritz_lower[idx]);
                r.x = recover_right_vector(op, s, r.w.span(), jcfg.lsqr, jcfg.mode);
                direct = residual_direct(op.a(), op.l(), r);
            }
            if (swapped)
            {
                std::swap(r.c, r.s);
            }
            r.gsv = generalized_value(r.c, r.s);
            double aerr = kNaN;
            double rel = kNaN;
            if (pair.has_ground_truth() && j < pair.c.size())
            {
                const std::size_t t = truth_index(pair, j, cfg.which);
                aerr = angle_error(r.c, r.s, pair.c[t], pair.s[t]);
                const double g = generalized_value(pair.c[t], pair.s[t]);
                if (std::isfinite(g) && g != 0.0)
                {
                    rel = std::abs(r.gsv - g) / g;
                }
            }
            // Ranks are reported in the order of the pair as given.
            const std::size_t rank = swapped ? rec.k - idx : idx + 1;
            conv.row(rec.k, rank, r.c, r.s, r.residual_bound, direct, aerr);
            if (j == 0)
            {
                fig9.row(rec.k, direct, r.residual_bound, rel, aerr);
            }
        }
        fig2.row(rec.k, rec.defect_norm, tol.base);
        for (std::size_t i = 0; i < std::min<std::size_t>(10, rec.ritz_lower.size()); ++i)
        {
            fig5.row(rec.k, i + 1, rec.ritz_lower[i]);
        }
        for (std::size_t i = 0; i < std::min<std::size_t>(10, rec.ritz_upper.size()); ++i)
        {
            const double sh = rec.ritz_upper[rec.ritz_upper.size() - 1 - i];
            fig6.row(rec.k, i + 1, sh, std::sqrt(std::max(0.0, (1.0 - sh) * (1.0 + sh))));
        }
        const bool sample = rec.k == 1 || rec.k % cfg.diag_stride == 0 || s.terminated ||
                            rec.k == cfg.max_steps;
        if (sample)
        {
            const DiagnosticRow d = diagnostics_row(s, reference ? &op : nullptr, tol);
            diag.row(d.k, d.eta_u, d.eta_vtilde, d.eta_uhat, d.uhat_bound, d.norm_f, d.bound_f,
                     d.norm_e, d.norm_f_hat, d.norm_g_hat, d.inv_norm_lower, d.inv_norm_upper);
            fig1.row(d.k, d.norm_f, d.bound_f);
            fig3.row(d.k, d.norm_f_hat, d.bound_f, d.norm_g_hat, d.bound_g_hat);
            fig4.row(d.k, d.eta_uhat, d.uhat_bound);
        }
        ++rows;
    };

    const DenseVector b(std::vector<double>(op.rows_a(), 1.0));
    RunResult result = run_jbd(op, b, jcfg, cfg.max_steps, stop, options);
    if (result.history.empty())
    {
        throw Error(ErrorKind::InsufficientSteps, "run produced no steps");
    }
    const JbdState& state = result.state;

    const std::size_t count = std::min(cfg.want, state.steps);
    json lower_pairs = json::array();
    json upper_pairs = json::array();
    auto lower = extract_ritz_from_lower(state, count, stop.which, stop.norm_r);
    auto upper = extract_ritz_from_upper(state, count, stop.which);
    for (std::size_t j = 0; j < count; ++j)
    {
        complete_vectors(op, state, lower[j], jcfg.lsqr, jcfg.mode);
        complete_vectors(op, state, upper[j], jcfg.lsqr, jcfg.mode);
        if (swapped)
        {
            unswap(lower[j]);
            unswap(upper[j]);
            lower[j].index = state.steps - 1 - lower[j].index;
            upper[j].index = state.steps - 1 - upper[j].index;
        }
        lower_pairs.push_back(pair_json(lower[j], pair, j, cfg.which));
        upper_pairs.push_back(pair_json(upper[j], pair, j, cfg.which));
    }

    json summary;
    summary["pair"] = pair.name;
    summary["m"] = pair.a.rows();
    summary["p"] = pair.l.rows();
    summary["n"] = pair.a.cols();
    summary["swapped"] = swapped;
    summary["kappa_estimate_a"] = num_json(decision.kappa_a);
    summary["kappa_estimate_l"] = num_json(decision.kappa_l);
    summary["norm_estimate"] = jcfg.norm_estimate;
    summary["reorth"] = std::string(to_string(cfg.reorth));
    summary["inner_mode"] = reference ? "reference" : "iterative";
    summary["steps"] = state.steps;
    summary["termination"] = std::string(to_string(result.termination));
    if (!state.breakdown_detail.empty())
    {
        summary["breakdown"] = state.breakdown_detail;
    }
    summary["max_inv_norm_lower"] = num_json(max_inv_lower);
    summary["max_inv_norm_upper"] = num_json(max_inv_upper);
    summary["max_norm_lower"] = max_norm_lower;
    summary["max_norm_upper"] = max_norm_upper;
    summary["semi_reorthogonalizations"] = {{"u", state.semi_u_reorths},
                                            {"vtilde", state.semi_v_reorths}};
    summary["pairs_lower"] = lower_pairs;
    summary["pairs_upper"] = upper_pairs;

    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec)
    {
        throw Error(ErrorKind::IoError, "cannot create " + cfg.out.string() + ": " + ec.message());
    }
    write_file(cfg.out / "convergence.csv", conv.str());
    write_file(cfg.out / "diagnostics.csv", diag.str());
    write_file(cfg.out / "fig1_Fk.csv", fig1.str());
    write_file(cfg.out / "fig2_Ek.csv", fig2.str());
    write_file(cfg.out / "fig3_Fhat_Ghat.csv", fig3.str());
    write_file(cfg.out / "fig4_etaUhat.csv", fig4.str());
    write_file(cfg.out / "fig5_ritz_lower.csv", fig5.str());
    write_file(cfg.out / "fig6_ritz_upper.csv", fig6.str());
    write_file(cfg.out / "fig9_residual.csv", fig9.str());
    write_file(cfg.out / "summary.json", summary.dump(2) + "\n");
    std::cout << pair.name << ": " << state.steps << " steps, " << to_string(result.termination)
              << ", output in " << cfg.out.string() << "\n";
    return kExitSuccess;
}

} // namespace

void ExperimentConfig::validate() const
{
    if (size == 0 || max_steps == 0 || want == 0 || diag_stride == 0)
    {
        throw Error(ErrorKind::InvalidConfig, "sizes, steps, want and stride must be positive");
    }
    if (!(tol > 0.0))
    {
        throw Error(ErrorKind::InvalidConfig, "tolerance must be positive");
    }
    if (!(inner_tol > 0.0 && inner_tol < 1.0))
    {
        throw Error(ErrorKind::InvalidConfig, "inner tolerance must lie in (0, 1)");
    }
}

int exit_code_for(ErrorKind kind) noexcept
{
    switch (kind)
    {
    case ErrorKind::NotConverged:
    case ErrorKind::NoConvergence:
    case ErrorKind::Breakdown:
    case ErrorKind::BreakdownToZero:
    case ErrorKind::RankDeficient:
    case ErrorKind::NonFinite:
    case ErrorKind::ZeroStart:
    case ErrorKind::InsufficientSteps:
        return kExitNumerical;
    default:
        return kExitConfig;
    }
}

ReorthKind parse_reorth(const std::string& s)
{
    if (s == "none") return ReorthKind::None;
    if (s == "full") return ReorthKind::Full;
    if (s == "one-sided") return ReorthKind::OneSided;
    if (s == "semi") return ReorthKind::Semi;
    throw Error(ErrorKind::InvalidConfig, "unknown reorthogonalization '" + s + "'");
}

Which parse_which(const std::string& s)
{
    if (s == "largest") return Which::Largest;
    if (s == "smallest") return Which::Smallest;
    throw Error(ErrorKind::InvalidConfig, "unknown end '" + s + "'");
}

InnerMode parse_inner_mode(const std::string& s)
{
    if (s == "reference") return InnerMode::Reference;
    if (s == "iterative") return InnerMode::Iterative;
    throw Error(ErrorKind::InvalidConfig, "unknown inner mode '" + s + "'");
}

SwapHint parse_swap(const std::string& s)
{
    if (s == "auto") return SwapHint::Auto;
    if (s == "keep") return SwapHint::Keep;
    if (s == "swap") return SwapHint::Swap;
    throw Error(ErrorKind::InvalidConfig, "unknown swap hint '" + s + "'");
}

std::string_view to_string(ReorthKind k) noexcept
{
    switch (k)
    {
    case ReorthKind::None: return "none";
    case ReorthKind::Full: return "full";
    case ReorthKind::OneSided: return "one-sided";
    case ReorthKind::Semi: return "semi";
    }
    return "unknown";
}

int run_experiment(const ExperimentConfig& cfg)
{
    try
    {
        return run(cfg);
    }
    catch (const Error& e)
    {
        write_error(cfg, std::string(to_string(e.kind())), e.what());
        return exit_code_for(e.kind());
    }
    catch (const std::exception& e)
    {
        write_error(cfg, "IoError", e.what());
        return kExitConfig;
    }
}

} // namespace jbd
