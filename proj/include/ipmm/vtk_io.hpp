#ifndef IPMM_VTK_IO_HPP
#define IPMM_VTK_IO_HPP

/* Snapshot writers: the mesh as a legacy ASCII VTK unstructured grid with
 * per-cell arrays (u, phase, front-edge flag), and the front polygon as a
 * VTK polyline.  Output is byte-stable for identical states: vertices and
 * cells are emitted in slot order and every number is printed with %.17g. */

#include <cstdint>
#include <cstdio>
#include <string>
#include <unordered_map>
#include <vector>

#include "ipmm/state.hpp"

namespace ipmm {

namespace detail {

inline void append_num(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

inline void write_text_file(const std::string& path, const std::string& body) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot open for writing: " + path);
  std::size_t n = std::fwrite(body.data(), 1, body.size(), f);
  if (std::fclose(f) != 0 || n != body.size())
    throw IoError("short write: " + path);
}

}  // namespace detail

/* Triangle mesh with cell data u (component 0), phase (0 unset, 1 inside,
 * 2 outside), and is_interface_edge (1 when the cell has a front edge). */
inline void write_vtk(const SimulationState& s, const std::string& path) {
  std::vector<VertexId> verts = s.mesh.vertex_ids();
  std::vector<CellId> cells = s.mesh.cell_ids();
  std::unordered_map<uint64_t, std::size_t> vindex;
  vindex.reserve(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i) vindex[verts[i].key()] = i;

  std::string out;
  out.reserve(64 * verts.size() + 96 * cells.size());
  out += "# vtk DataFile Version 4.2\n";
  out += "ipmm mesh snapshot\n";
  out += "ASCII\n";
  out += "DATASET UNSTRUCTURED_GRID\n";

  out += "POINTS " + std::to_string(verts.size()) + " double\n";
  for (VertexId v : verts) {
    Point2 p = s.mesh.position(v);
    detail::append_num(out, p.x);
    out += ' ';
    detail::append_num(out, p.y);
    out += " 0\n";
  }

  out += "CELLS " + std::to_string(cells.size()) + ' ' +
         std::to_string(4 * cells.size()) + '\n';
  for (CellId c : cells) {
    CellSnapshot snap = s.mesh.snapshot(c);
    out += '3';
    for (int i = 0; i < 3; ++i) {
      out += ' ';
      out += std::to_string(vindex.at(snap.vertices[i].key()));
    }
    out += '\n';
  }
  out += "CELL_TYPES " + std::to_string(cells.size()) + '\n';
  for (std::size_t i = 0; i < cells.size(); ++i) out += "5\n";

  out += "CELL_DATA " + std::to_string(cells.size()) + '\n';
  out += "SCALARS u double 1\nLOOKUP_TABLE default\n";
  for (CellId c : cells) {
    detail::append_num(out, s.mesh.cell_data(c)[0]);
    out += '\n';
  }
  out += "SCALARS phase int 1\nLOOKUP_TABLE default\n";
  for (CellId c : cells)
    out += std::to_string(int(s.mesh.cell_label(c))) + '\n';
  out += "SCALARS is_interface_edge int 1\nLOOKUP_TABLE default\n";
  for (CellId c : cells) {
    CellSnapshot snap = s.mesh.snapshot(c);
    bool front = false;
    for (int i = 0; i < 3 && !front; ++i)
      front = s.is_ring_edge(snap.vertices[i], snap.vertices[(i + 1) % 3]);
    out += front ? "1\n" : "0\n";
  }

  detail::write_text_file(path, out);
}

/* The front as one closed polyline; point count equals the ring size. */
inline void write_interface_vtk(const SimulationState& s,
                                const std::string& path) {
  std::size_t m = s.iface.ring.size();
  std::string out;
  out.reserve(64 * m + 256);
  out += "# vtk DataFile Version 4.2\n";
  out += "ipmm interface snapshot\n";
  out += "ASCII\n";
  out += "DATASET POLYDATA\n";
  out += "POINTS " + std::to_string(m) + " double\n";
  for (VertexId v : s.iface.ring) {
    Point2 p = s.mesh.position(v);
    detail::append_num(out, p.x);
    out += ' ';
    detail::append_num(out, p.y);
    out += " 0\n";
  }
  if (m > 0) {
    out += "LINES 1 " + std::to_string(m + 2) + '\n';
    out += std::to_string(m + 1);
    for (std::size_t i = 0; i < m; ++i) out += ' ' + std::to_string(i);
    out += " 0\n";
  } else {
    out += "LINES 0 0\n";
  }
  detail::write_text_file(path, out);
}

/* snap_NNNNNN.vtk + iface_NNNNNN.vtk under dir, NNNNNN = the step number. */
inline void write_snapshot(const SimulationState& s, const std::string& dir,
                           int step) {
  char name[32];
  std::snprintf(name, sizeof name, "/snap_%06d.vtk", step);
  write_vtk(s, dir + name);
  std::snprintf(name, sizeof name, "/iface_%06d.vtk", step);
  write_interface_vtk(s, dir + name);
}

}  // namespace ipmm

#endif
