#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace minsurf {

using Json = nlohmann::ordered_json;

/// One failed check, replayable from (seed, index).
struct Violation {
  std::size_t index = 0;
  std::string check;
  Json inputs;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Outcome of a seeded sampling run. Serialization is deterministic: statistics keep
/// insertion order and the wall time is kept out of the JSON.
struct ScanReport {
  static constexpr const char* kSchema = "minsurf.scan_report/1";
  static constexpr std::size_t kMaxRecorded = 64;

  std::string kind;
  Json config = Json::object();
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  std::size_t evaluated = 0;
  std::size_t excluded = 0;
  std::vector<std::pair<std::string, double>> statistics;
  std::size_t violation_count = 0;
  std::vector<Violation> violations;
  Json extra = Json::object();
  double wall_seconds = 0.0;

  void set(const std::string& name, double value);
  double get(const std::string& name) const;
  bool has(const std::string& name) const;

  /// Keeps the violations with the smallest indices, up to kMaxRecorded.
  void add_violation(Violation v);

  Json to_json() const;
  std::string dump() const { return to_json().dump(2); }
};

/// JSON number, or a string tag for non-finite values.
Json json_number(double x);
Json json_matrix(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j);

}  // namespace minsurf
