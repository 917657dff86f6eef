#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace qpur {

// Fixed numeric formatting: 17 significant digits, '.' separator,
// nan/inf spelled lower case.
std::string format_double(double v);

struct Column {
    std::string name;
    std::string unit;  // "1" for dimensionless
};

// Header cells are written as name[unit].
class CsvTable {
public:
    using Cell = std::variant<double, long long, std::string>;

    explicit CsvTable(std::vector<Column> cols);
    CsvTable& add_row(std::vector<Cell> row);
    std::size_t rows() const { return rows_.size(); }
    const std::vector<Column>& columns() const { return cols_; }
    std::string str() const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<Column> cols_;
    std::vector<std::vector<Cell>> rows_;
};

// Hash of "blob <size>\0<content>", as git computes it.
std::string git_blob_sha1(const std::string& content);
std::string git_blob_sha1_file(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& content);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

class RunManifest {
public:
    RunManifest(std::string command, nlohmann::json config, std::uint64_t seed);
    // Records path (as given) with its content hash and size.
    void add_output(const std::filesystem::path& path);
    nlohmann::json to_json() const;
    // Writes manifest.json into dir and returns its path.
    std::filesystem::path write(const std::filesystem::path& dir) const;

private:
    std::string command_;
    nlohmann::json config_;
    std::uint64_t seed_;
    nlohmann::json outputs_ = nlohmann::json::array();
    std::chrono::steady_clock::time_point start_;
};

nlohmann::json error_json(const std::string& kind, const std::string& message);

const char* version();

} // namespace qpur
