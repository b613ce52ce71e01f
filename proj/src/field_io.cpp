#include "chns/field_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "chns/errors.hpp"

namespace chns {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string header(const std::string& name, int step, const GridSpec& g) {
  return "# field=" + name + " step=" + std::to_string(step) + " nx=" + std::to_string(g.nx) +
         " ny=" + std::to_string(g.ny) + " hx=" + fmt(g.hx()) + " hy=" + fmt(g.hy()) + "\n";
}

void write_block(const std::filesystem::path& file, const std::string& head, const double* data,
                 int cols, int rows) {
  std::ofstream os(file);
  if (!os) throw Error("cannot write " + file.string());
  os << head;
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < cols; ++i) {
      if (i) os << ',';
      os << fmt(data[j * cols + i]);
    }
    os << '\n';
  }
}

}  // namespace

void write_cell_csv(const std::filesystem::path& file, const std::string& name, int step,
                    const CellField& f) {
  const GridSpec& g = f.grid;
  write_block(file, header(name, step, g), f.values.data(), g.nx, g.ny);
}

void write_cell_snapshot(const std::filesystem::path& dir, const std::string& name, int step,
                         const CellField& f) {
  write_cell_csv(dir / (name + "_" + std::to_string(step) + ".csv"), name, step, f);
}

void write_face_csv(const std::filesystem::path& dir, const std::string& name, int step,
                    const FaceField& v) {
  const GridSpec& g = v.grid;
  const std::string s = std::to_string(step);
  write_block(dir / (name + "_x_" + s + ".csv"), header(name + "_x", step, g), v.values.data(),
              g.nx + 1, g.ny);
  write_block(dir / (name + "_y_" + s + ".csv"), header(name + "_y", step, g),
              v.values.data() + g.x_faces(), g.nx, g.ny + 1);
}

CellField read_cell_csv(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw Error("cannot read " + file.string());
  std::string line;
  std::getline(is, line);
  GridSpec g;
  double hx = 0.0, hy = 0.0;
  char name[256];
  int step = 0;
  if (std::sscanf(line.c_str(), "# field=%255s step=%d nx=%d ny=%d hx=%lf hy=%lf", name, &step, &g.nx,
                  &g.ny, &hx, &hy) != 6)
    throw Error("bad snapshot header in " + file.string());
  g.lx = hx * g.nx;
  g.ly = hy * g.ny;
  std::vector<double> vals;
  while (std::getline(is, line)) {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
  }
  if (static_cast<int>(vals.size()) != g.cells()) throw Error("bad snapshot size in " + file.string());
  return CellField(g, Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size()));
}

}  // namespace chns
