#pragma once

#include "discafem/cases.hpp"
#include "discafem/disc.hpp"
#include "discafem/eoc.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace discafem {

struct ExperimentConfig
{
    std::string test = "smooth";
    DiscConfig disc;
    std::filesystem::path out_dir = ".";
    bool write_mesh = true;
};

struct ExperimentOutcome
{
    DiscTrace trace;
    std::optional<EocReport> eoc;
    std::size_t final_dofs = 0;
};

/// EOC input from a trace: energy error against dofs after PDE, strictly increasing in dofs.
std::vector<EocPoint> eoc_points(const DiscTrace& trace);

/// Builds the test case, runs the outer loop and writes trace.csv, diagnostics.csv, eoc.txt
/// and mesh_final.txt into out_dir. Progress lines go to `log` when given.
ExperimentOutcome run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

} // namespace discafem
