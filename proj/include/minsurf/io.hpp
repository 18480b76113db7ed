#pragma once

#include <string>

#include "minsurf/beltrami.hpp"
#include "minsurf/report.hpp"

namespace minsurf::io {

using beltrami::ComplexGrid;
using beltrami::GridMap;
using graphsolve::BoundaryData;
using graphsolve::DiscreteMap;
using graphsolve::Mesh;

inline constexpr const char* kMeshSchema = "minsurf.mesh/1";
inline constexpr const char* kMapSchema = "minsurf.discrete_map/1";
inline constexpr const char* kGridSchema = "minsurf.grid/1";
inline constexpr const char* kGridMapSchema = "minsurf.grid_map/1";

/// {"schema", "nodes": [[x, y]...], "triangles": [[a, b, c]...], "boundary": [0/1...]}
Json mesh_to_json(const Mesh& mesh);
Mesh mesh_from_json(const Json& j);

/// {"schema", "mesh": <mesh>, "n", "values": [[u_1..u_n] per node]}
Json map_to_json(const DiscreteMap& u);
DiscreteMap map_from_json(const Json& j);

/// {"schema", "n", "half_width", "spacing", "layout", "re": [...], "im": [...]}; entry
/// j * n + i holds the sample at (-L + i h, -L + j h).
Json grid_to_json(const ComplexGrid& g);
ComplexGrid grid_from_json(const Json& j);

/// {"schema", "origin", "spacing", "nx", "ny", "n", "mask": [0/1...], "values": [[...]...]};
/// masked-out rows are written as null.
Json grid_map_to_json(const GridMap& v);

/// "x,y,u1,..,un" per node.
std::string map_csv(const DiscreteMap& u);

/// Boundary values from CSV rows "node,u1,..,un" (an optional first line starting with
/// "node" is a header; '#' lines are comments), one row per
/// boundary node in increasing node order.
BoundaryData parse_boundary_csv(const std::string& text, const Mesh& mesh, int n);

std::string read_text(const std::string& path);
Json read_json(const std::string& path);
/// Writes to a temporary file in the target directory and renames it over the target, so
/// a failed write leaves no partial file. Throws IoError.
void write_text_atomic(const std::string& path, const std::string& content);
/// dump(2) plus a trailing newline.
void write_json(const std::string& path, const Json& j);

}  // namespace minsurf::io
