#include "discafem/experiment.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace discafem {

std::vector<EocPoint> eoc_points(const DiscTrace& trace)
{
    std::vector<EocPoint> pts;
    for (const DiscRow& r : trace.rows)
        if (r.energy_error > 0.0)
            pts.push_back({double(r.dofs_pde), r.energy_error});
    return strictly_increasing(pts);
}

namespace {

std::ofstream open_output(const std::filesystem::path& p)
{
    std::ofstream os(p);
    if (!os)
        throw std::runtime_error("cannot write " + p.string());
    return os;
}

} // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& config, std::ostream* log)
{
    const TestCase tc = make_case(config.test);
    config.disc.validate();
    std::filesystem::create_directories(config.out_dir);

    MeshForest forest = MeshForest::load_initial(tc.initial_mesh);
    DiscProblem problem;
    problem.oracle = tc.oracle;
    problem.dirichlet = tc.exact;
    problem.exact_gradient = tc.exact_gradient;

    DiscConfig dc = config.disc;
    if (dc.error.singular_points.empty())
        dc.error.singular_points = tc.singular_points;

    auto on_row = [log](const DiscRow& r) {
        if (!log)
            return;
        *log << "k=" << r.k << " eps=" << r.eps << " dofs=" << r.dofs_pde << " eta=" << r.eta
             << " err=" << r.energy_error << " Nf=" << r.n_f << " NA=" << r.n_A << " Nu=" << r.n_u << '\n';
        log->flush();
    };

    ExperimentOutcome out;
    out.trace = disc(forest, problem, dc, on_row);
    out.final_dofs = forest.num_active_vertices();

    {
        auto os = open_output(config.out_dir / "trace.csv");
        write_trace_csv(os, out.trace);
    }
    {
        auto os = open_output(config.out_dir / "diagnostics.csv");
        write_diagnostics_csv(os, out.trace);
    }
    const auto pts = eoc_points(out.trace);
    {
        auto os = open_output(config.out_dir / "eoc.txt");
        os.precision(6);
        if (pts.size() >= 3) {
            out.eoc = eoc(pts);
            os << "asymptotic_eoc " << out.eoc->asymptotic << '\n';
            os << "preasymptotic_eoc ";
            if (std::isnan(out.eoc->preasymptotic))
                os << "nan\n";
            else
                os << out.eoc->preasymptotic << '\n';
        } else {
            os << "asymptotic_eoc nan\npreasymptotic_eoc nan\n";
        }
        os << "points " << pts.size() << '\n';
    }
    if (config.write_mesh) {
        auto os = open_output(config.out_dir / "mesh_final.txt");
        write_mesh(os, forest.active_mesh_data());
    }
    return out;
}

} // namespace discafem
