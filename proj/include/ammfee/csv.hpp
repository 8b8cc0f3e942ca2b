#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ammfee {

constexpr const char* kToolVersion = "ammfee 0.3.0";

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

// Shortest round-trip decimal form; empty for absent values.
std::string format_number(double value);
std::string format_number(const std::optional<double>& value);

// Provenance written next to every artifact. The timestamp is informational
// and excluded from the hash and from CSV headers.
struct RunManifest {
    std::string experiment;
    std::string config_hash;
    nlohmann::json solver;
    std::string volume_convention = "sum of fee-free pool rate times traded size, X";
    std::uint64_t seed = 0;
    std::string tool_version = kToolVersion;
    nlohmann::json extra = nlohmann::json::object();
    std::string timestamp;

    nlohmann::json to_json(bool with_timestamp) const;
    std::string hash() const;
    std::vector<std::string> comment_lines() const;
};

// Column-oriented CSV table with '#' comment lines above the header.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    CsvTable& row(std::vector<std::string> cells);
    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }

    void write(std::ostream& out, const std::vector<std::string>& comments) const;
    void write_file(const std::filesystem::path& path, const std::vector<std::string>& comments) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

std::string now_utc_iso8601();

}  // namespace ammfee
