/// @file field_io.hpp
/// @brief CSV snapshots of grid fields.
///
/// One file per field and time index. First line:
///   # field=<name> step=<i> nx=<nx> ny=<ny> hx=<hx> hy=<hy>
/// then one row per grid line j, values printed with %.17g. Face fields are
/// written as two files, <name>_x ((nx+1) x ny) and <name>_y (nx x (ny+1)).

#pragma once

#include <filesystem>
#include <string>

#include "chns/grid.hpp"

namespace chns {

void write_cell_csv(const std::filesystem::path& file, const std::string& name, int step,
                    const CellField& f);
/// Writes <dir>/<name>_x_<step>.csv and <dir>/<name>_y_<step>.csv.
void write_face_csv(const std::filesystem::path& dir, const std::string& name, int step,
                    const FaceField& v);
/// <dir>/<name>_<step>.csv
void write_cell_snapshot(const std::filesystem::path& dir, const std::string& name, int step,
                         const CellField& f);

CellField read_cell_csv(const std::filesystem::path& file);

/// "%.17g"
std::string fmt(double x);

}  // namespace chns
