#include "minsurf/io.hpp"

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "minsurf/errors.hpp"

namespace minsurf::io {

namespace fs = std::filesystem;

namespace {

void expect_schema(const Json& j, const char* schema) {
  if (!j.is_object() || !j.contains("schema") || j["schema"] != schema)
    throw InvalidInput(std::string("expected a document with schema '") + schema + "'");
}

template <class Fn>
auto parse_or_invalid(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const InvalidInput&) {
    throw;
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string(what) + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw InvalidInput(std::string(what) + ": " + e.what());
  }
}

}  // namespace

Json mesh_to_json(const Mesh& mesh) {
  Json nodes = Json::array(), tris = Json::array(), boundary = Json::array();
  for (const auto& p : mesh.nodes()) nodes.push_back({p.x(), p.y()});
  for (const auto& t : mesh.triangles()) tris.push_back({t[0], t[1], t[2]});
  for (bool b : mesh.boundary()) boundary.push_back(b ? 1 : 0);
  return {{"schema", kMeshSchema}, {"nodes", nodes}, {"triangles", tris}, {"boundary", boundary}};
}

Mesh mesh_from_json(const Json& j) {
  expect_schema(j, kMeshSchema);
  return parse_or_invalid("mesh", [&] {
    std::vector<graphsolve::Vec2> nodes;
    for (const auto& p : j.at("nodes")) {
      if (p.size() != 2) throw InvalidInput("mesh node must have two coordinates");
      nodes.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
    std::vector<graphsolve::Triangle> tris;
    for (const auto& t : j.at("triangles")) {
      if (t.size() != 3) throw InvalidInput("mesh triangle must have three vertices");
      tris.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
    }
    std::vector<bool> boundary;
    for (const auto& b : j.at("boundary")) boundary.push_back(b.get<int>() != 0);
    return Mesh(std::move(nodes), std::move(tris), std::move(boundary));
  });
}

Json map_to_json(const DiscreteMap& u) {
  return {{"schema", kMapSchema}, {"mesh", mesh_to_json(*u.mesh)}, {"n", u.n()}, {"values", json_matrix(u.values)}};
}

DiscreteMap map_from_json(const Json& j) {
  expect_schema(j, kMapSchema);
  auto mesh = std::make_shared<const Mesh>(mesh_from_json(j.at("mesh")));
  return parse_or_invalid("discrete map", [&] {
    Eigen::MatrixXd values = matrix_from_json(j.at("values"));
    if (values.rows() != mesh->num_nodes()) throw InvalidInput("discrete map: one value row per node required");
    if (j.contains("n") && values.cols() != j["n"].get<int>()) throw InvalidInput("discrete map: 'n' disagrees with values");
    return DiscreteMap(std::move(mesh), std::move(values));
  });
}

Json grid_to_json(const ComplexGrid& g) {
  Json re = Json::array(), im = Json::array();
  for (const auto& z : g.values()) {
    re.push_back(z.real());
    im.push_back(z.imag());
  }
  return {{"schema", kGridSchema}, {"n", g.size()},     {"half_width", g.half_width()}, {"spacing", g.spacing()},
          {"layout", "row-major, index j*n+i at (-L+i*h, -L+j*h)"}, {"re", re}, {"im", im}};
}

ComplexGrid grid_from_json(const Json& j) {
  expect_schema(j, kGridSchema);
  return parse_or_invalid("grid", [&] {
    const int n = j.at("n").get<int>();
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    if (re.size() != im.size() || re.size() != static_cast<std::size_t>(n) * n)
      throw InvalidInput("grid: expected n*n real and imaginary parts");
    std::vector<beltrami::cplx> values(re.size());
    for (std::size_t k = 0; k < re.size(); ++k) values[k] = {re[k], im[k]};
    return ComplexGrid(n, j.at("half_width").get<double>(), std::move(values));
  });
}

Json grid_map_to_json(const GridMap& v) {
  Json mask = Json::array(), values = Json::array();
  for (int k = 0; k < v.nx * v.ny; ++k) {
    mask.push_back(v.mask[k] ? 1 : 0);
    if (!v.mask[k]) {
      values.push_back(nullptr);
      continue;
    }
    Json row = Json::array();
    for (Eigen::Index c = 0; c < v.values.cols(); ++c) row.push_back(v.values(k, c));
    values.push_back(std::move(row));
  }
  return {{"schema", kGridMapSchema},
          {"origin", {v.origin.x(), v.origin.y()}},
          {"spacing", v.spacing},
          {"nx", v.nx},
          {"ny", v.ny},
          {"n", v.values.cols()},
          {"mask", mask},
          {"values", values}};
}

std::string map_csv(const DiscreteMap& u) {
  std::ostringstream os;
  os.precision(17);
  os << "x,y";
  for (int c = 0; c < u.n(); ++c) os << ",u" << c + 1;
  os << '\n';
  for (int i = 0; i < u.mesh->num_nodes(); ++i) {
    os << u.mesh->node(i).x() << ',' << u.mesh->node(i).y();
    for (int c = 0; c < u.n(); ++c) os << ',' << u.values(i, c);
    os << '\n';
  }
  return os.str();
}

BoundaryData parse_boundary_csv(const std::string& text, const Mesh& mesh, int n) {
  const std::vector<int> nodes = mesh.boundary_nodes();
  BoundaryData data(nodes.size(), n);
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && line.rfind("node", 0) == 0) continue;
    std::vector<double> fields;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        fields.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw InvalidInput("boundary CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (static_cast<int>(fields.size()) != n + 1)
      throw InvalidInput("boundary CSV line " + std::to_string(line_no) + ": expected node plus " + std::to_string(n) + " values");
    if (row >= nodes.size()) throw InvalidInput("boundary CSV: more rows than boundary nodes");
    if (fields[0] != nodes[row])
      throw InvalidInput("boundary CSV line " + std::to_string(line_no) + ": expected boundary node " + std::to_string(nodes[row]));
    for (int c = 0; c < n; ++c) data(row, c) = fields[c + 1];
    ++row;
  }
  if (row != nodes.size())
    throw InvalidInput("boundary CSV: " + std::to_string(row) + " rows for " + std::to_string(nodes.size()) + " boundary nodes");
  return data;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return os.str();
}

Json read_json(const std::string& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InvalidInput("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("error writing '" + path + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ignore;
    fs::remove(tmp, ignore);
    throw IoError("cannot move output into place at '" + path + "': " + ec.message());
  }
}

void write_json(const std::string& path, const Json& j) { write_text_atomic(path, j.dump(2) + "\n"); }

}  // namespace minsurf::io
