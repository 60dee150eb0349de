#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "fastavg/averaged.hpp"
#include "fastavg/fd.hpp"
#include "fastavg/spde.hpp"

namespace fastavg {

/// First line of every CSV written by this library.
inline constexpr const char* kCsvSchema = "# fastavg-csv v1";

/// Shortest round-trip representation ("%.17g").
std::string format_double(double value);

/// Writes the schema line, a header row and data rows.
class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& file);

    void header(const std::vector<std::string>& columns);
    void row(std::span<const double> values);
    void row(const std::vector<std::string>& cells);

private:
    std::ofstream out_;
};

/// t, mode_0..mode_{K-1}
void write_modes_csv(const std::filesystem::path& file, const SpdePath& path);
/// t, u(x_0)..u(x_N), synthesized from the mode path.
void write_grid_csv(const std::filesystem::path& file, const SpdePath& path,
                    const SpectralBasis& basis);
void write_grid_csv(const std::filesystem::path& file, const GridTrajectory& trajectory);
/// t, v
void write_scalar_csv(const std::filesystem::path& file, const ScalarPath& path);

}  // namespace fastavg
