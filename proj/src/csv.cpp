#include "ammfee/csv.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <ostream>

#include "ammfee/errors.hpp"

namespace ammfee {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return s;
}

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string format_number(const std::optional<double>& value) { return value ? format_number(*value) : std::string(); }

nlohmann::json RunManifest::to_json(bool with_timestamp) const {
    nlohmann::json j{{"experiment", experiment},
                     {"config_hash", config_hash},
                     {"solver", solver},
                     {"volume_convention", volume_convention},
                     {"seed", seed},
                     {"tool_version", tool_version},
                     {"extra", extra}};
    if (with_timestamp) j["timestamp"] = timestamp;
    return j;
}

std::string RunManifest::hash() const { return hex64(fnv1a64(to_json(false).dump())); }

std::vector<std::string> RunManifest::comment_lines() const {
    return {"manifest_hash=" + hash(), "experiment=" + experiment, "config_hash=" + config_hash,
            "seed=" + std::to_string(seed), "tool_version=" + tool_version};
}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size()) throw InputError("CSV row has the wrong number of cells");
    rows_.push_back(std::move(cells));
    return *this;
}

void CsvTable::write(std::ostream& out, const std::vector<std::string>& comments) const {
    for (const auto& c : comments) out << "# " << c << '\n';
    for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i];
    out << '\n';
    for (const auto& r : rows_) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
        out << '\n';
    }
}

void CsvTable::write_file(const std::filesystem::path& path, const std::vector<std::string>& comments) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write(out, comments);
}

std::string now_utc_iso8601() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace ammfee
