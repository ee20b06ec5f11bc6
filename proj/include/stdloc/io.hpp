#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stdloc/errors.hpp"
#include "stdloc/linalg.hpp"
#include "stdloc/version.hpp"

namespace stdloc {

using json = nlohmann::json;

// Shortest round-trippable decimal form of a double.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt_int(long long v) { return std::to_string(v); }

// Directory-scoped writer enforcing the overwrite policy: target directories
// are created on demand, existing files are never replaced unless the caller
// opted in.
class OutputWriter {
public:
    OutputWriter(std::filesystem::path dir, bool overwrite)
        : dir_(std::move(dir)), overwrite_(overwrite) {}

    const std::filesystem::path& dir() const { return dir_; }

    std::filesystem::path reserve(const std::string& name) const {
        std::filesystem::path target = dir_ / name;
        std::error_code ec;
        std::filesystem::create_directories(target.parent_path(), ec);
        if (ec)
            throw io_error("cannot create output directory " +
                           target.parent_path().string() + ": " + ec.message());
        if (!overwrite_ && std::filesystem::exists(target))
            throw io_error("output file already exists: " + target.string() +
                           " (pass --overwrite to replace it)");
        return target;
    }

    void write_csv(const std::string& name, const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) const {
        std::filesystem::path target = reserve(name);
        std::ofstream out(target);
        if (!out) throw io_error("cannot open " + target.string() + " for writing");
        for (std::size_t i = 0; i < header.size(); ++i)
            out << (i ? "," : "") << header[i];
        out << "\n";
        for (const auto& row : rows) {
            if (row.size() != header.size())
                throw io_error("csv row width mismatch in " + name);
            for (std::size_t i = 0; i < row.size(); ++i)
                out << (i ? "," : "") << row[i];
            out << "\n";
        }
        if (!out) throw io_error("failed writing " + target.string());
    }

    void write_json(const std::string& name, const json& doc) const {
        std::filesystem::path target = reserve(name);
        std::ofstream out(target);
        if (!out) throw io_error("cannot open " + target.string() + " for writing");
        out << doc.dump(2) << "\n";
        if (!out) throw io_error("failed writing " + target.string());
    }

private:
    std::filesystem::path dir_;
    bool overwrite_;
};

// Reproducibility record: effective configuration, seed and artifact version.
// Deliberately contains no timestamps or host details so identical runs yield
// identical bytes.
inline json make_manifest(const std::string& command, const json& config_echo,
                          std::uint64_t seed) {
    return json{{"artifact",
                 {{"name", kArtifactName},
                  {"version", kArtifactVersion},
                  {"schema_version", kSchemaVersion}}},
                {"command", command},
                {"seed", seed},
                {"config", config_echo}};
}

// Plain numeric CSV matrix loader (for prior covariance files).
inline Matrix load_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open matrix file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            std::size_t comma = line.find(',', pos);
            std::string cell = line.substr(
                pos, comma == std::string::npos ? std::string::npos : comma - pos);
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                while (used < cell.size() && std::isspace(unsigned(cell[used]))) ++used;
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw io_error("matrix file " + path + ": cannot parse cell '" +
                               cell + "'");
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw io_error("matrix file " + path + ": ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw io_error("matrix file " + path + ": empty");
    Matrix out(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rows[i][j];
    return out;
}

} // namespace stdloc
