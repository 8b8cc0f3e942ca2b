#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ammfee/equilibrium_solver.hpp"
#include "ammfee/time_grid.hpp"

namespace ammfee {

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct CriterionResult {
    std::string id;
    std::string title;
    std::vector<Check> checks;

    bool pass() const;
};

struct AcceptanceOptions {
    std::filesystem::path experiments_dir;
    std::filesystem::path work_dir;  // scratch space for the determinism runs
    int threads = 0;
    std::ostream* progress = nullptr;
};

// Runs every primary acceptance criterion. Each result carries its sub-checks.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

// One PASS/FAIL line per criterion, sub-checks indented below it.
void print_acceptance(std::ostream& out, const std::vector<CriterionResult>& results);

// Max relative deviation between solve_w and a classical RK4 integration of
// dw/dtau = A w, sampled on the time grid.
double rk4_deviation(const GeneratorMatrix& generator, const WPath& w, const TimeGrid& time);

}  // namespace ammfee
