#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ammfee/experiment.hpp"

namespace ammfee {

struct FigureEntry {
    std::string id;
    std::string description;
    std::vector<std::string> columns;
};

const std::vector<FigureEntry>& figure_catalog();
bool is_figure_id(const std::string& id);

// Writes the CSV file(s) for one catalogued figure id; returns their paths.
// Throws ConfigError listing the valid ids for an unknown id.
std::vector<std::filesystem::path> write_figure_data(const std::string& id, const ExperimentConfig& cfg, int threads,
                                                     const std::filesystem::path& out_dir);

// Same for several ids, sharing one activity scan between the ids that need it.
std::vector<std::filesystem::path> write_figures(const std::vector<std::string>& ids, const ExperimentConfig& cfg,
                                                 int threads, const std::filesystem::path& out_dir);

// Own-grid index where |m* - p*| is smallest for fixed time and rival state.
int fee_crossing_index(const FeePolicy& policy, int time_index, std::span<const int> rivals);

}  // namespace ammfee
