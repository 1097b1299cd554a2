#pragma once

// Binary field snapshots ("BLLF") and CSV profile export.
//
// Layout, little-endian: "BLLF", u32 version (1), u32 nx, u32 nz,
// u8 staggering, then rows x nx doubles with x fastest. z-face fields carry
// nz + 1 rows.

#include "bll/grid.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace bll {

void write_bllf(const std::filesystem::path& path, const ScalarField& f);

// The period is not part of the format; pass it when it differs from 1.
ScalarField read_bllf(const std::filesystem::path& path, double lx = 1.0);

// Writes columns with a header row. All columns must have equal length.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

// Horizontal average of a centred field, one value per z row.
std::vector<double> horizontal_profile(const ScalarField& f);

} // namespace bll
