// Command-line front end: order constrained fitting, order checks,
// scoring and the Monte-Carlo studies.  Exit codes: 0 success, 1 usage
// error, 2 data error, 3 non-convergence.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lro/dist.hpp"
#include "lro/grid.hpp"
#include "lro/idr.hpp"
#include "lro/io.hpp"
#include "lro/lrfit.hpp"
#include "lro/order.hpp"
#include "lro/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNoConvergence = 3;

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file '" + path + "'");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    return out;
}

void write_or_print(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
    } else {
        open_output(path) << content;
    }
}

struct CommonOpts {
    std::string input, output;
    double tol = 1e-8;
    std::size_t max_iter = 10000;
    std::optional<int> round_decimals;
};

lro::AggregatedGrid load_grid(const CommonOpts& opt) {
    auto in = open_input(opt.input);
    const lro::ObservationSet obs = lro::read_observations_csv(in);
    return lro::aggregate(obs, opt.round_decimals);
}

int cmd_fit(const CommonOpts& opt) {
    const lro::AggregatedGrid grid = load_grid(opt);
    const lro::IndexSetP p = lro::compute_index_set(grid);
    lro::FitConfig cfg;
    cfg.delta_tol = opt.tol;
    cfg.max_iter = opt.max_iter;
    const lro::FitReport rep = lro::FitProblem(grid, p).fit(cfg);
    std::ostringstream doc;
    lro::write_fit_document(doc, grid, p, rep);
    write_or_print(opt.output, doc.str());
    if (!rep.converged) {
        std::cerr << "warning: not converged after " << rep.iterations
                  << " iterations (gap " << rep.final_delta << ")\n";
        return kExitNoConvergence;
    }
    return kExitOk;
}

int cmd_idr(const CommonOpts& opt) {
    const lro::AggregatedGrid grid = load_grid(opt);
    const lro::CdfFamily fam = lro::fit_stochastic_order(grid);
    std::ostringstream doc;
    lro::write_family_document(doc, fam, grid.n, "st");
    write_or_print(opt.output, doc.str());
    return kExitOk;
}

int cmd_check_order(const std::string& p_path, const std::string& q_path, double tol) {
    auto pin = open_input(p_path);
    auto qin = open_input(q_path);
    const lro::DiscreteDist p = lro::read_distribution_csv(pin);
    const lro::DiscreteDist q = lro::read_distribution_csv(qin);
    const bool lr = lro::is_lr_less_equal(p, q, tol);
    const bool st = lro::is_st_less_equal(p, q, tol);
    const bool roc = lro::is_roc_concave(lro::roc_curve(p, q), tol);
    std::cout << "lr: " << (lr ? "true" : "false") << ", st: " << (st ? "true" : "false")
              << ", roc-concave: " << (roc ? "true" : "false") << '\n';
    return kExitOk;
}

int cmd_score(const std::string& fit_path, const CommonOpts& opt) {
    auto doc_in = open_input(fit_path);
    const lro::FamilyDocument doc = lro::read_family_document(doc_in);
    const lro::ConditionalFamily fam = doc.family();
    auto in = open_input(opt.input);
    const lro::ObservationSet test = lro::read_observations_csv(in);

    std::ostringstream out;
    out << "x,count,crps\n";
    for (const lro::CovariateScore& row : lro::crps_by_covariate(fam, test))
        out << lro::detail::format_double(row.x) << ',' << row.count << ','
            << lro::detail::format_double(row.mean_crps) << '\n';
    write_or_print(opt.output, out.str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conditional distribution estimation under likelihood ratio order"};
    app.require_subcommand(1);

    CommonOpts fit_opt;
    auto* fit = app.add_subcommand("fit", "fit the likelihood-ratio-ordered family");
    fit->add_option("--input", fit_opt.input, "observation CSV (columns x,y)")->required();
    fit->add_option("--output", fit_opt.output, "output document path (default stdout)");
    fit->add_option("--tol", fit_opt.tol, "stopping gap threshold");
    fit->add_option("--max-iter", fit_opt.max_iter, "iteration cap");
    fit->add_option("--round-decimals", fit_opt.round_decimals,
                    "pre-round coordinates to this many decimals");

    CommonOpts idr_opt;
    auto* idr = app.add_subcommand("idr", "fit the stochastic-order baseline");
    idr->add_option("--input", idr_opt.input, "observation CSV (columns x,y)")->required();
    idr->add_option("--output", idr_opt.output, "output document path (default stdout)");
    idr->add_option("--round-decimals", idr_opt.round_decimals,
                    "pre-round coordinates to this many decimals");

    std::string order_p, order_q;
    double order_tol = lro::kOrderTol;
    auto* chk = app.add_subcommand("check-order",
                                   "likelihood-ratio / stochastic order verdicts for a pair");
    chk->add_option("p", order_p, "first distribution CSV (columns value,prob)")->required();
    chk->add_option("q", order_q, "second distribution CSV")->required();
    chk->add_option("--tol", order_tol, "comparison tolerance");

    CommonOpts score_opt;
    std::string score_fit;
    auto* score = app.add_subcommand("score", "empirical CRPS of a fitted family on a test CSV");
    score->add_option("--fit", score_fit, "family document from fit/idr")->required();
    score->add_option("--input", score_opt.input, "test CSV (columns x,y)")->required();
    score->add_option("--output", score_opt.output, "output CSV path (default stdout)");

    lro::SimConfig sim_cfg;
    std::string sim_score = "simple";
    std::string sim_output;
    std::size_t threads = 1;
    auto* sim = app.add_subcommand("simulate", "Monte-Carlo comparison against the true model");
    sim->add_option("--score", sim_score, "score kind: simple or crps")
        ->check(CLI::IsMember({"simple", "crps"}));
    sim->add_option("--ell-o", sim_cfg.ell_o, "covariate grid resolution");
    sim->add_option("--n", sim_cfg.n, "sample size per replication");
    sim->add_option("--reps", sim_cfg.mc_reps, "Monte-Carlo replications");
    sim->add_option("--seed", sim_cfg.seed, "RNG seed");
    sim->add_option("--threads", threads, "worker threads");
    sim->add_option("--output", sim_output, "output CSV path (default stdout)");

    lro::SimConfig cv_cfg;
    CommonOpts cv_opt;
    auto* cv = app.add_subcommand("crossval", "leave-train-size-out cross-validation");
    cv->add_option("--input", cv_opt.input, "observation CSV (columns x,y)")->required();
    cv->add_option("--train-size", cv_cfg.train_size, "training observations per split")
        ->required();
    cv->add_option("--reps", cv_cfg.mc_reps, "number of random splits");
    cv->add_option("--seed", cv_cfg.seed, "RNG seed");
    cv->add_option("--threads", threads, "worker threads");
    cv->add_option("--output", cv_opt.output, "output CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (fit->parsed()) return cmd_fit(fit_opt);
        if (idr->parsed()) return cmd_idr(idr_opt);
        if (chk->parsed()) return cmd_check_order(order_p, order_q, order_tol);
        if (score->parsed()) return cmd_score(score_fit, score_opt);
        if (sim->parsed()) {
            const lro::ScoreTable tab =
                sim_score == "simple"
                    ? lro::run_estimation_study(sim_cfg, lro::GammaModel::simulation_default(),
                                                threads)
                    : lro::run_crps_study(sim_cfg, lro::GammaModel::simulation_default(),
                                          threads);
            std::ostringstream out;
            lro::write_score_table(out, tab);
            write_or_print(sim_output, out.str());
            if (tab.flagged > 0)
                std::cerr << "note: " << tab.flagged << " replication(s) excluded\n";
            return kExitOk;
        }
        if (cv->parsed()) {
            auto in = open_input(cv_opt.input);
            const lro::ObservationSet data = lro::read_observations_csv(in);
            const lro::ScoreTable tab = lro::run_cross_validation(data, cv_cfg, threads);
            std::ostringstream out;
            lro::write_score_table(out, tab);
            write_or_print(cv_opt.output, out.str());
            return kExitOk;
        }
    } catch (const lro::CsvError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
