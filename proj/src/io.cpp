#include "qpur/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "qpur/errors.hpp"

namespace qpur {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvTable::CsvTable(std::vector<Column> cols) : cols_(std::move(cols)) {}

CsvTable& CsvTable::add_row(std::vector<Cell> row) {
    if (row.size() != cols_.size()) throw InvalidArgument("CSV row width does not match header");
    rows_.push_back(std::move(row));
    return *this;
}

std::string CsvTable::str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < cols_.size(); ++i)
        os << (i ? "," : "") << cols_[i].name << '[' << cols_[i].unit << ']';
    os << '\n';
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            if (auto d = std::get_if<double>(&row[i])) os << format_double(*d);
            else if (auto n = std::get_if<long long>(&row[i])) os << *n;
            else os << std::get<std::string>(row[i]);
        }
        os << '\n';
    }
    return os.str();
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, str()); }

std::string git_blob_sha1(const std::string& content) {
    const std::string head = "blob " + std::to_string(content.size()) + std::string(1, '\0');
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
    EVP_DigestUpdate(ctx, head.data(), head.size());
    EVP_DigestUpdate(ctx, content.data(), content.size());
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char b[3];
    for (unsigned i = 0; i < len; ++i) {
        std::snprintf(b, sizeof b, "%02x", md[i]);
        hex += b;
    }
    return hex;
}

std::string git_blob_sha1_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return git_blob_sha1(ss.str());
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    out << content;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    write_text(path, j.dump(2) + "\n");
}

RunManifest::RunManifest(std::string command, nlohmann::json config, std::uint64_t seed)
    : command_(std::move(command)), config_(std::move(config)), seed_(seed),
      start_(std::chrono::steady_clock::now()) {}

void RunManifest::add_output(const std::filesystem::path& path) {
    outputs_.push_back({{"path", path.filename().string()},
                        {"bytes", std::filesystem::file_size(path)},
                        {"sha1", git_blob_sha1_file(path)}});
}

nlohmann::json RunManifest::to_json() const {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return {{"command", command_}, {"config", config_},   {"seed", seed_},
            {"version", version()}, {"outputs", outputs_}, {"duration_s", secs}};
}

std::filesystem::path RunManifest::write(const std::filesystem::path& dir) const {
    const auto p = dir / "manifest.json";
    write_json(p, to_json());
    return p;
}

nlohmann::json error_json(const std::string& kind, const std::string& message) {
    return {{"error", {{"kind", kind}, {"message", message}}}};
}

const char* version() { return QPUR_VERSION; }

} // namespace qpur
