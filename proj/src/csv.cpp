#include "fastavg/csv.hpp"

#include <algorithm>
#include <cstdio>

#include "fastavg/error.hpp"

namespace fastavg {

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& file) : out_(file) {
    if (!out_) throw ConfigError("cannot open " + file.string() + " for writing");
    out_ << kCsvSchema << '\n';
}

void CsvWriter::header(const std::vector<std::string>& columns) { row(columns); }

void CsvWriter::row(std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out_ << ',';
        out_ << format_double(values[i]);
    }
    out_ << '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

namespace {

std::vector<std::string> indexed(const std::string& first, const std::string& stem, std::size_t n) {
    std::vector<std::string> cols{first};
    for (std::size_t i = 0; i < n; ++i) cols.push_back(stem + std::to_string(i));
    return cols;
}

}  // namespace

void write_modes_csv(const std::filesystem::path& file, const SpdePath& path) {
    CsvWriter csv(file);
    csv.header(indexed("t", "mode_", path.K));
    std::vector<double> row(path.K + 1);
    for (std::size_t n = 0; n < path.times.size(); ++n) {
        row[0] = path.times[n];
        const auto u = path.at(n);
        std::copy(u.begin(), u.end(), row.begin() + 1);
        csv.row(row);
    }
}

void write_grid_csv(const std::filesystem::path& file, const SpdePath& path,
                    const SpectralBasis& basis) {
    const std::size_t N = basis.grid().nodes();
    CsvWriter csv(file);
    csv.header(indexed("t", "x_", N));
    std::vector<double> row(N + 1);
    for (std::size_t n = 0; n < path.times.size(); ++n) {
        row[0] = path.times[n];
        basis.synthesize(path.at(n), std::span<double>(row).subspan(1));
        csv.row(row);
    }
}

void write_grid_csv(const std::filesystem::path& file, const GridTrajectory& trajectory) {
    const std::size_t N = trajectory.grid.nodes();
    CsvWriter csv(file);
    csv.header(indexed("t", "x_", N));
    std::vector<double> row(N + 1);
    for (std::size_t n = 0; n < trajectory.times.size(); ++n) {
        row[0] = trajectory.times[n];
        const auto u = trajectory.at(n);
        std::copy(u.begin(), u.end(), row.begin() + 1);
        csv.row(row);
    }
}

void write_scalar_csv(const std::filesystem::path& file, const ScalarPath& path) {
    CsvWriter csv(file);
    csv.header({"t", "v"});
    for (std::size_t n = 0; n < path.times.size(); ++n) csv.row(std::vector<double>{path.times[n], path.values[n]});
}

}  // namespace fastavg
