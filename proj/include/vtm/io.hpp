#pragma once

/// Output writers: VTK legacy ASCII snapshots of fields on the embedded
/// mesh, and CSV tables with full precision plus `# key=value` metadata
/// lines so runs are reproducible from their outputs alone.

#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "vtm/assembly.hpp"

namespace vtm {

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Cell-centre samples of a vector field (one 3-vector per cell).
inline std::vector<Vec3> cell_centre_vectors(const Field& u) {
  const Mesh& mesh = *u.space->mesh;
  std::vector<Vec3> out(mesh.n_cells());
  for (index_t c = 0; c < mesh.n_cells(); ++c)
    out[c] = eval_vector_at(u, c, Vec2(0.5, 0.5));
  return out;
}

inline std::vector<double> cell_centre_scalars(const Field& u) {
  const Mesh& mesh = *u.space->mesh;
  std::vector<double> out(mesh.n_cells());
  for (index_t c = 0; c < mesh.n_cells(); ++c)
    out[c] = eval_scalar_at(u, c, Vec2(0.5, 0.5));
  return out;
}

struct VtkCellField {
  std::string name;
  std::vector<Vec3> vectors; // one per cell, or
  std::vector<double> scalars;
};

/// Legacy ASCII VTK unstructured grid with per-cell duplicated corner
/// points (cells on periodic seams stay intact) and CELL_DATA attributes.
inline void write_vtk(const std::string& path, const Mesh& mesh,
                      const std::vector<VtkCellField>& fields) {
  std::ofstream out(path);
  require(out.good(), "vtk: cannot open " + path);
  index_t nc = mesh.n_cells();
  out << "# vtk DataFile Version 3.0\n";
  out << "vtm fields\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << 4 * nc << " double\n";
  for (index_t c = 0; c < nc; ++c)
    for (int k = 0; k < 4; ++k) {
      const Vec3& p = mesh.cell_coords[c][k];
      out << format_g17(p[0]) << " " << format_g17(p[1]) << " "
          << format_g17(p[2]) << "\n";
    }
  out << "CELLS " << nc << " " << 5 * nc << "\n";
  for (index_t c = 0; c < nc; ++c)
    out << "4 " << 4 * c << " " << 4 * c + 1 << " " << 4 * c + 2 << " "
        << 4 * c + 3 << "\n";
  out << "CELL_TYPES " << nc << "\n";
  for (index_t c = 0; c < nc; ++c) out << "9\n";
  if (fields.empty()) return;
  out << "CELL_DATA " << nc << "\n";
  for (const VtkCellField& f : fields) {
    if (!f.vectors.empty()) {
      require(static_cast<index_t>(f.vectors.size()) == nc,
              "vtk: field size mismatch");
      out << "VECTORS " << f.name << " double\n";
      for (const Vec3& v : f.vectors)
        out << format_g17(v[0]) << " " << format_g17(v[1]) << " "
            << format_g17(v[2]) << "\n";
    } else {
      require(static_cast<index_t>(f.scalars.size()) == nc,
              "vtk: field size mismatch");
      out << "SCALARS " << f.name << " double 1\n";
      out << "LOOKUP_TABLE default\n";
      for (double v : f.scalars) out << format_g17(v) << "\n";
    }
  }
}

/// CSV with `# key=value` metadata header, a column-name row, and
/// 17-significant-digit values.
struct CsvWriter {
  std::ofstream out;
  CsvWriter(const std::string& path,
            const std::map<std::string, std::string>& metadata,
            const std::vector<std::string>& columns) {
    out.open(path);
    require(out.good(), "csv: cannot open " + path);
    for (const auto& [k, v] : metadata) out << "# " << k << "=" << v << "\n";
    for (size_t i = 0; i < columns.size(); ++i)
      out << columns[i] << (i + 1 < columns.size() ? "," : "\n");
  }
  void row(const std::vector<double>& vals) {
    for (size_t i = 0; i < vals.size(); ++i)
      out << format_g17(vals[i]) << (i + 1 < vals.size() ? "," : "\n");
  }
};

} // namespace vtm
