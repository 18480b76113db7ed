#include "minsurf/report.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace minsurf {

void ScanReport::set(const std::string& name, double value) {
  for (auto& [k, v] : statistics) {
    if (k == name) {
      v = value;
      return;
    }
  }
  statistics.emplace_back(name, value);
}

double ScanReport::get(const std::string& name) const {
  for (const auto& [k, v] : statistics)
    if (k == name) return v;
  throw std::out_of_range("no statistic named " + name);
}

bool ScanReport::has(const std::string& name) const {
  return std::any_of(statistics.begin(), statistics.end(),
                     [&](const auto& kv) { return kv.first == name; });
}

void ScanReport::add_violation(Violation v) {
  ++violation_count;
  auto pos = std::upper_bound(violations.begin(), violations.end(), v.index,
                              [](std::size_t i, const Violation& w) { return i < w.index; });
  if (violations.size() >= kMaxRecorded && pos == violations.end()) return;
  violations.insert(pos, std::move(v));
  if (violations.size() > kMaxRecorded) violations.pop_back();
}

Json json_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

Json json_matrix(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(json_number(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j.at(i).size()) != cols)
      throw std::invalid_argument("ragged matrix in JSON");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
  }
  return m;
}

Json ScanReport::to_json() const {
  Json j;
  j["schema"] = kSchema;
  j["kind"] = kind;
  j["seed"] = seed;
  j["config"] = config;
  j["samples"] = samples;
  j["evaluated"] = evaluated;
  j["excluded"] = excluded;
  Json stats = Json::object();
  for (const auto& [k, v] : statistics) stats[k] = json_number(v);
  j["statistics"] = std::move(stats);
  j["violation_count"] = violation_count;
  Json vs = Json::array();
  for (const auto& v : violations) {
    Json r;
    r["index"] = v.index;
    r["check"] = v.check;
    r["lhs"] = json_number(v.lhs);
    r["rhs"] = json_number(v.rhs);
    r["inputs"] = v.inputs;
    vs.push_back(std::move(r));
  }
  j["violations"] = std::move(vs);
  if (!extra.empty()) j["extra"] = extra;
  return j;
}

}  // namespace minsurf
