#include "cli.hpp"

#include "discafem/errors.hpp"
#include "discafem/experiment.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace disc_bench {

namespace {

double parse_q(const std::string& s)
{
    if (s == "inf")
        return discafem::kInfinity;
    for (const char* v : {"2", "3", "5", "6"})
        if (s == v)
            return std::stod(s);
    throw std::invalid_argument("--q must be one of 2, 3, 5, 6, inf");
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Adaptive FEM with data approximation: run one benchmark experiment", "disc_bench"};

    discafem::ExperimentConfig cfg;
    std::string q = "2";
    std::string out_dir = ".";
    bool no_timing = false;
    bool quiet = false;
    std::size_t pde_max_dofs = cfg.disc.pde.max_dofs;

    app.add_option("--test", cfg.test, "Test case: lshaped, kellogg or smooth")->required();
    app.add_option("--q", q, "Lq norm for the coefficient approximation: 2, 3, 5, 6 or inf");
    app.add_option("--theta", cfg.disc.pde.theta, "Doerfler marking parameter");
    app.add_option("--beta", cfg.disc.beta, "Tolerance reduction factor per outer iteration");
    app.add_option("--omega", cfg.disc.omega, "Share of the tolerance given to data approximation");
    app.add_option("--eps0", cfg.disc.eps0, "Initial tolerance");
    app.add_option("--max-dofs", cfg.disc.max_dofs, "Stop after the first iteration reaching this many dofs");
    app.add_option("--max-outer", cfg.disc.max_outer_iterations, "Maximum number of outer iterations");
    app.add_option("--degree-A", cfg.disc.degree_A, "Polynomial degree of the coefficient approximation (0 or 1)");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--pde-max-dofs", pde_max_dofs, "Dof limit inside one PDE call");
    app.add_option("--max-elements", cfg.disc.max_elements, "Element limit for the data approximation loops");
    app.add_flag("--no-timing", no_timing, "Write zero instead of wall-clock seconds into trace.csv");
    app.add_flag("--quiet", quiet, "Suppress per-iteration progress");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "disc_bench: " << e.what() << "\n" << app.help();
        return kUsage;
    }

    try {
        cfg.disc.q = parse_q(q);
    } catch (const std::invalid_argument& e) {
        err << "disc_bench: " << e.what() << '\n';
        return kInvalidParameter;
    }
    cfg.disc.pde.max_dofs = pde_max_dofs;
    cfg.disc.record_time = !no_timing;
    cfg.out_dir = out_dir;

    discafem::ExperimentOutcome res;
    try {
        res = discafem::run_experiment(cfg, quiet ? nullptr : &out);
    } catch (const std::out_of_range& e) {
        err << "disc_bench: " << e.what() << '\n';
        return kUnknownTest;
    } catch (const std::invalid_argument& e) {
        err << "disc_bench: invalid parameter: " << e.what() << '\n';
        return kInvalidParameter;
    } catch (const std::exception& e) {
        err << "disc_bench: " << e.what() << '\n';
        return kUsage;
    }

    out << "iterations " << res.trace.rows.size() << " final_dofs " << res.final_dofs << '\n';
    if (res.eoc)
        out << "asymptotic_eoc " << res.eoc->asymptotic << " preasymptotic_eoc " << res.eoc->preasymptotic << '\n';
    if (res.trace.failure) {
        const auto& f = *res.trace.failure;
        err << "disc_bench: no convergence in " << f.stage << " at iteration " << f.k << ": " << f.message
            << " (reached " << f.reached << ", target " << f.target << ")\n";
        return kNotConverged;
    }
    return kOk;
}

} // namespace disc_bench
