#include "minsurf/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>

#include "minsurf/beltrami.hpp"
#include "minsurf/errors.hpp"
#include "minsurf/graphsolve.hpp"
#include "minsurf/ineqlab.hpp"
#include "minsurf/io.hpp"
#include "minsurf/matcore.hpp"

namespace minsurf::cli {

namespace {

using graphsolve::DiscreteMap;
using graphsolve::Mesh;
using graphsolve::MeshPtr;

struct RunConfig {
  std::string out;
  std::uint64_t seed = 1;
  int threads = 1;
  std::optional<double> tol;
  std::string config;

  // verify / scan
  int n = 2;
  std::size_t samples = 100000;
  std::string kind;
  double lambda_bound = 2.0;
  double K = 4.0, eps3 = 0.5, L = 1.0, cap = 10.0;
  int levels = 16;
  double lambda_floor = 0.0;
  std::string c1;
  std::string histogram;

  // solve
  std::string mesh_file;
  int rings = 16;
  std::string preset;
  std::string boundary_file;
  double scale = 1.0;
  int max_iter = 0;
  int memory = 8;
  std::string csv;
  int sweep = 0;
  std::string sweep_csv;
  std::string report;

  // factorize / residuals
  std::string input;
  int grid = 256;
  double half_width = 4.0;
  double spacing = 1.0 / 16;
  double lipschitz = 0.0;
  std::string phi_file, v_file;
  double tol_grad = -1, tol_minor = -1;  // negative: 1e-3 times the Lipschitz estimate of v
  double eps = 1e-2;
  std::vector<double> center;
  double radius = 0.0;
};

void emit(const RunConfig& cfg, const Json& j, std::ostream& out) {
  if (cfg.out.empty())
    out << j.dump(2) << '\n';
  else
    io::write_json(cfg.out, j);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> v;
  std::istringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw InvalidInput("bad number '" + cell + "' in list");
    }
  }
  return v;
}

void add_seed_threads(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--seed", cfg.seed, "64-bit seed")->capture_default_str();
  sub->add_option("--threads", cfg.threads, "worker threads (reports do not depend on it)")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
}

void add_out(CLI::App* sub, RunConfig& cfg, const std::string& what) {
  sub->add_option("--out", cfg.out, what + " (default: standard output)");
  sub->add_option("--config", cfg.config, "flat 'key = value' file; command-line flags take precedence");
}

// ---------------------------------------------------------------------------------------

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  const ScanReport r = matcore::verify_identities(cfg.n, cfg.samples, cfg.seed, cfg.tol.value_or(1e-9), cfg.threads);
  emit(cfg, r.to_json(), out);
  err << "verify: " << r.violation_count << " violations in " << r.evaluated << " samples ("
      << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s)\n";
  return r.violation_count == 0 ? kOk : kViolations;
}

ineqlab::ScanConfig scan_config(const RunConfig& cfg) {
  ineqlab::ScanConfig s;
  s.lambda = cfg.lambda_bound;
  s.K = cfg.K;
  s.eps3 = cfg.eps3;
  s.L = cfg.L;
  s.cap = cfg.cap;
  s.n = cfg.n;
  s.samples = cfg.samples;
  s.seed = cfg.seed;
  s.threads = cfg.threads;
  s.tol = cfg.tol.value_or(cfg.kind == "orthogonal-split" ? 1e-12 : 1e-6);
  s.validate();
  return s;
}

int cmd_scan(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ineqlab::ScanConfig s = scan_config(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  ScanReport r;
  if (cfg.kind == "rank1-convexity") {
    r = ineqlab::convexity_rank_one_scan(s);
  } else if (cfg.kind == "hessian") {
    r = ineqlab::hessian_rank_one_scan(s);
  } else if (cfg.kind == "small-det") {
    double floor = cfg.lambda_floor;
    if (floor <= 0) floor = ineqlab::convexity_rank_one_scan(s).get("lambda_est");
    r = ineqlab::small_det_convexity_scan(s, floor, cfg.levels);
  } else if (cfg.kind == "sptnull") {
    r = ineqlab::sptnull_scan(s, cfg.c1.empty() ? ineqlab::default_c1_grid() : parse_list(cfg.c1));
  } else if (cfg.kind == "boundedness") {
    r = ineqlab::boundedness_scan(s);
  } else if (cfg.kind == "orthogonal-split") {
    r = ineqlab::orthogonal_split_scan(s);
  } else {
    throw InvalidInput("unknown scan kind '" + cfg.kind + "'");
  }
  emit(cfg, r.to_json(), out);
  if (!cfg.histogram.empty()) io::write_text_atomic(cfg.histogram, ineqlab::histogram_csv(r));
  err << "scan " << cfg.kind << ": " << r.violation_count << " violations in " << r.evaluated << " evaluated samples ("
      << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s)\n";
  return r.violation_count == 0 ? kOk : kViolations;
}

// ---------------------------------------------------------------------------------------

Json residual_summary(const DiscreteMap& u, double eps) {
  const auto minors = graphsolve::small_det_check(u, eps);
  return {{"energy", graphsolve::assemble_energy(u)},
          {"outer_residual", beltrami::outer_residual(u, beltrami::ResidualMesh::kOwn)},
          {"outer_residual_refined", beltrami::outer_residual(u, beltrami::ResidualMesh::kRefined)},
          {"inner_variation_residual", graphsolve::inner_variation_residual(u)},
          {"inner_variation_residual_refined", graphsolve::inner_variation_residual_refined(u)},
          {"max_minor", minors.max_minor},
          {"small_det_eps", eps},
          {"small_det_pass", minors.pass}};
}

Json solve_json(const graphsolve::SolveResult& r, bool converged) {
  return {{"converged", converged},
          {"iterations", r.iterations},
          {"final_energy", r.energy},
          {"gradient_norm", r.gradient_norm},
          {"energy_history", r.energy_history},
          {"gradient_history", r.gradient_history}};
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.preset.empty() == cfg.boundary_file.empty())
    throw InvalidInput("solve: give exactly one of --preset and --boundary");
  if (cfg.sweep > 0 && cfg.preset.empty()) throw InvalidInput("solve: --sweep needs --preset boundary data");
  if (cfg.n < 1) throw InvalidInput("solve: --n must be >= 1");
  if (cfg.rings < 1) throw InvalidInput("solve: --rings must be >= 1");

  MeshPtr mesh = cfg.mesh_file.empty() ? std::make_shared<const Mesh>(Mesh::unit_disc(cfg.rings))
                                       : std::make_shared<const Mesh>(io::mesh_from_json(io::read_json(cfg.mesh_file)));
  graphsolve::SolveConfig sc;
  sc.tolerance = cfg.tol.value_or(1e-10);
  if (cfg.max_iter > 0) sc.max_iterations = cfg.max_iter;
  sc.memory = cfg.memory;
  sc.validate();

  std::function<Eigen::VectorXd(const graphsolve::Vec2&)> preset;
  if (!cfg.preset.empty()) preset = graphsolve::boundary_preset(cfg.preset, cfg.n, cfg.scale);
  auto boundary_for = [&](const Mesh& m) {
    return preset ? graphsolve::sample_boundary(m, cfg.n, preset)
                  : io::parse_boundary_csv(io::read_text(cfg.boundary_file), m, cfg.n);
  };

  Json report = {{"schema", "minsurf.solve_report/1"},
                 {"config",
                  {{"mesh", cfg.mesh_file.empty() ? "unit_disc(" + std::to_string(cfg.rings) + ")" : cfg.mesh_file},
                   {"boundary", cfg.preset.empty() ? cfg.boundary_file : cfg.preset},
                   {"n", cfg.n},
                   {"scale", cfg.scale},
                   {"tol", sc.tolerance},
                   {"max_iter", sc.max_iterations},
                   {"memory", sc.memory}}},
                 {"nodes", mesh->num_nodes()},
                 {"triangles", mesh->num_triangles()}};

  graphsolve::SolveResult result;
  try {
    result = graphsolve::minimize(boundary_for(*mesh), sc, mesh);
  } catch (const graphsolve::MinimizeError& e) {
    const auto& last = e.last();
    if (!cfg.out.empty()) io::write_json(cfg.out, io::map_to_json(last.map));
    report["solve"] = solve_json(last, false);
    report["error"] = e.what();
    if (!cfg.report.empty()) io::write_json(cfg.report, report);
    err << "solve: " << e.what() << "; last iterate" << (cfg.out.empty() ? " not saved (no --out)" : " saved to " + cfg.out)
        << '\n';
    return kConvergenceFailure;
  }
  report["solve"] = solve_json(result, true);
  report["residuals"] = residual_summary(result.map, 1e-2);

  if (cfg.sweep > 0) {
    std::ostringstream csv;
    csv.precision(17);
    csv << "level,nodes,triangles,h,iterations,energy,outer_residual,inner_residual\n";
    Json rows = Json::array();
    MeshPtr m = mesh;
    for (int level = 0; level <= cfg.sweep; ++level) {
      if (level > 0) m = std::make_shared<const Mesh>(m->refined());
      const auto r = level == 0 ? result : graphsolve::minimize(boundary_for(*m), sc, m);
      const double outer = beltrami::outer_residual(r.map, beltrami::ResidualMesh::kRefined);
      const double inner = graphsolve::inner_variation_residual_refined(r.map);
      csv << level << ',' << m->num_nodes() << ',' << m->num_triangles() << ',' << m->mesh_size() << ',' << r.iterations
          << ',' << r.energy << ',' << outer << ',' << inner << '\n';
      rows.push_back({{"level", level},
                      {"nodes", m->num_nodes()},
                      {"h", m->mesh_size()},
                      {"iterations", r.iterations},
                      {"energy", r.energy},
                      {"outer_residual", outer},
                      {"inner_residual", inner}});
    }
    report["sweep"] = rows;
    if (!cfg.sweep_csv.empty()) io::write_text_atomic(cfg.sweep_csv, csv.str());
  }

  if (!cfg.out.empty()) io::write_json(cfg.out, io::map_to_json(result.map));
  if (!cfg.csv.empty()) io::write_text_atomic(cfg.csv, io::map_csv(result.map));
  if (cfg.report.empty())
    out << report.dump(2) << '\n';
  else
    io::write_json(cfg.report, report);
  err << "solve: converged in " << result.iterations << " iterations, energy " << result.energy << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------------------

int cmd_factorize(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const DiscreteMap u = io::map_from_json(io::read_json(cfg.input));
  beltrami::FactorizeConfig fc;
  fc.grid = cfg.grid;
  fc.half_width = cfg.half_width;
  fc.tol = cfg.tol.value_or(1e-10);
  if (cfg.max_iter > 0) fc.max_iter = cfg.max_iter;
  fc.resample_spacing = cfg.spacing;
  fc.lipschitz = cfg.lipschitz;

  beltrami::Factorization f = [&] {
    try {
      return beltrami::factorize(u, fc);
    } catch (const ConvergenceError& e) {
      err << "factorize: " << e.what() << "\nresidual history:";
      for (double r : e.history()) err << ' ' << r;
      err << '\n';
      throw;
    }
  }();
  const auto& rep = f.report;
  double v_lip = 0;
  for (int t = 0; t < f.v_mesh.mesh->num_triangles(); ++t) v_lip = std::max(v_lip, f.v_mesh.gradient(t).norm());
  const double tol_grad = cfg.tol_grad >= 0 ? cfg.tol_grad : 1e-3 * v_lip;
  const double tol_minor = cfg.tol_minor >= 0 ? cfg.tol_minor : 1e-3 * v_lip;
  const auto labels = beltrami::classify_regions(f.v_mesh, tol_grad, tol_minor);
  Json j = {{"schema", "minsurf.factorize_report/1"},
            {"config",
             {{"input", cfg.input},
              {"grid", fc.grid},
              {"half_width", fc.half_width},
              {"tol", fc.tol},
              {"max_iter", fc.max_iter},
              {"spacing", fc.resample_spacing},
              {"lipschitz", fc.lipschitz}}},
            {"lipschitz", rep.lipschitz},
            {"dilatation_bound", rep.dilatation_bound},
            {"sup_mu", rep.sup_mu},
            {"beltrami_iterations", rep.beltrami_iterations},
            {"beltrami_residual", rep.beltrami_residual},
            {"beltrami_contraction", rep.beltrami_contraction},
            {"beltrami_residual_history", f.phi.residual_history},
            {"far_field", rep.far_field},
            {"min_det_dphi", rep.min_det_dphi},
            {"rho_min", rep.rho_min},
            {"rho_max", rep.rho_max},
            {"metric_deviation", rep.metric_deviation},
            {"harmonic_residual", rep.harmonic_residual},
            {"resampled_points", rep.resampled_points},
            {"regions",
             {{"tol_grad", tol_grad},
              {"tol_minor", tol_minor},
              {"E1", labels.count(beltrami::Region::kE1)},
              {"Zset", labels.count(beltrami::Region::kZset)},
              {"Oset", labels.count(beltrami::Region::kOset)}}}};
  if (!cfg.phi_file.empty()) io::write_json(cfg.phi_file, io::grid_to_json(f.phi.phi));
  if (!cfg.v_file.empty()) io::write_json(cfg.v_file, io::grid_map_to_json(f.v));
  emit(cfg, j, out);
  err << "factorize: sup|mu| = " << rep.sup_mu << ", Beltrami iterations " << rep.beltrami_iterations
      << ", harmonic residual " << rep.harmonic_residual << '\n';
  return kOk;
}

int cmd_residuals(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const DiscreteMap u = io::map_from_json(io::read_json(cfg.input));
  Json j = {{"schema", "minsurf.residuals_report/1"}, {"input", cfg.input}, {"nodes", u.mesh->num_nodes()}, {"n", u.n()}};
  j["residuals"] = residual_summary(u, cfg.eps);
  if (cfg.radius > 0) {
    if (cfg.center.size() != 2) throw InvalidInput("residuals: --center needs two coordinates");
    const auto p = beltrami::inversion_pipeline(u, graphsolve::Vec2(cfg.center[0], cfg.center[1]), cfg.radius);
    j["inversion"] = {{"center", cfg.center},
                      {"radius", cfg.radius},
                      {"nodes", p.w.mesh->num_nodes()},
                      {"inner_residual", beltrami::inner_residual(p.w, p.psi, beltrami::ResidualMesh::kRefined)}};
  }
  emit(cfg, j, out);
  return kOk;
}

// Inserts config-file arguments right after the subcommand so later command-line flags win.
std::vector<std::string> with_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) path = args[k + 1];
    if (args[k].rfind("--config=", 0) == 0) path = args[k].substr(9);
  }
  if (path.empty()) return args;
  const auto extra = config_arguments(io::read_text(path));
  auto sub = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.empty() || a[0] != '-'; });
  if (sub == args.end()) return args;
  std::vector<std::string> merged(args.begin(), sub + 1);
  merged.insert(merged.end(), extra.begin(), extra.end());
  merged.insert(merged.end(), sub + 1, args.end());
  return merged;
}

}  // namespace

std::vector<std::string> config_arguments(const std::string& text) {
  std::vector<std::string> args;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidInput("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty() || key == "config") throw InvalidInput("config line " + std::to_string(line_no) + ": bad key");
    if (value == "true")
      args.push_back("--" + key);
    else if (value != "false")
      args.push_back("--" + key + "=" + value);
  }
  return args;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Discrete minimal graphs: identity checks, solver, Beltrami factorization and inequality scans"};
  app.name("minsurf");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  auto* verify = app.add_subcommand("verify", "sample the algebraic identities of the area integrand");
  verify->add_option("--n", cfg.n, "number of rows of Z")->check(CLI::Range(1, 64))->capture_default_str();
  verify->add_option("--samples", cfg.samples, "sample count")->capture_default_str();
  verify->add_option("--tol", cfg.tol, "relative tolerance (default 1e-9)");
  add_seed_threads(verify, cfg);
  add_out(verify, cfg, "report JSON");

  auto* scan = app.add_subcommand("scan", "randomized inequality scans");
  scan->footer(
      "Histogram CSV columns: bin_lo,bin_hi,count (quantity named in the report's extra.histogram).\n"
      "Kinds: rank1-convexity, hessian, small-det, sptnull, boundedness, orthogonal-split.");
  scan->add_option("--kind", cfg.kind, "scan kind")
      ->required()
      ->check(CLI::IsMember({"rank1-convexity", "hessian", "small-det", "sptnull", "boundedness", "orthogonal-split"}));
  scan->add_option("--lambda-bound", cfg.lambda_bound, "gradient bound for the convexity scans")->capture_default_str();
  scan->add_option("--K", cfg.K, "quasiconformality constant")->capture_default_str();
  scan->add_option("--eps3", cfg.eps3, "determinant floor")->capture_default_str();
  scan->add_option("--L", cfg.L, "bound on |M|")->capture_default_str();
  scan->add_option("--cap", cfg.cap, "upper bound on |X|, |Y| for quasiconformal samples")->capture_default_str();
  scan->add_option("--n", cfg.n, "rows of the gradient matrices")->capture_default_str();
  scan->add_option("--samples", cfg.samples, "sample count (per bisection level for small-det)")->capture_default_str();
  scan->add_option("--tol", cfg.tol, "tolerance (default 1e-6, orthogonal-split 1e-12)");
  scan->add_option("--levels", cfg.levels, "small-det bisection levels")->capture_default_str();
  scan->add_option("--lambda", cfg.lambda_floor, "small-det convexity constant (default: lambda_est of the rank-one scan)");
  scan->add_option("--c1", cfg.c1, "comma-separated C1 grid for sptnull (default 1e-2,...,1e6)");
  scan->add_option("--histogram", cfg.histogram, "write the ratio histogram as CSV");
  add_seed_threads(scan, cfg);
  add_out(scan, cfg, "report JSON");

  auto* solve = app.add_subcommand("solve", "minimize the discrete area with Dirichlet data");
  solve->footer(
      "Sweep CSV columns: level,nodes,triangles,h,iterations,energy,outer_residual,inner_residual.\n"
      "Nodal CSV columns: x,y,u1..un. Boundary CSV rows: node,u1..un in increasing boundary-node order.\n"
      "Presets: affine, holo-z2, paraboloid.");
  auto* mesh_opt = solve->add_option("--mesh", cfg.mesh_file, "mesh JSON (minsurf.mesh/1)");
  solve->add_option("--rings", cfg.rings, "rings of the built-in unit-disc mesh")->excludes(mesh_opt)->capture_default_str();
  auto* preset_opt = solve->add_option("--preset", cfg.preset, "named boundary data")
                         ->check(CLI::IsMember({"affine", "holo-z2", "paraboloid"}));
  solve->add_option("--boundary", cfg.boundary_file, "boundary CSV")->excludes(preset_opt);
  solve->add_option("--n", cfg.n, "components of u")->capture_default_str();
  solve->add_option("--scale", cfg.scale, "preset amplitude")->capture_default_str();
  solve->add_option("--tol", cfg.tol, "gradient tolerance per sqrt(interior node) (default 1e-10)");
  solve->add_option("--max-iter", cfg.max_iter, "iteration limit (default 500)");
  solve->add_option("--memory", cfg.memory, "L-BFGS memory")->capture_default_str();
  solve->add_option("--sweep", cfg.sweep, "number of uniform refinements to solve after the base mesh")->capture_default_str();
  solve->add_option("--sweep-csv", cfg.sweep_csv, "refinement sweep CSV");
  solve->add_option("--csv", cfg.csv, "nodal CSV of the solution");
  solve->add_option("--report", cfg.report, "solve report JSON (default: standard output)");
  solve->add_option("--out", cfg.out, "solution JSON (minsurf.discrete_map/1); the last iterate on failure");
  solve->add_option("--config", cfg.config, "flat 'key = value' file; command-line flags take precedence");

  auto* factorize = app.add_subcommand("factorize", "u = v o phi with phi solving the Beltrami equation");
  factorize->add_option("--input", cfg.input, "map JSON (minsurf.discrete_map/1)")->required();
  factorize->add_option("--grid", cfg.grid, "FFT grid size (power of two)")->capture_default_str();
  factorize->add_option("--half-width", cfg.half_width, "periodic box [-L, L)^2")->capture_default_str();
  factorize->add_option("--tol", cfg.tol, "Beltrami residual tolerance (default 1e-10)");
  factorize->add_option("--max-iter", cfg.max_iter, "Beltrami iteration limit (default 200)");
  factorize->add_option("--spacing", cfg.spacing, "lattice spacing for v")->capture_default_str();
  factorize->add_option("--lipschitz", cfg.lipschitz, "gradient bound for the a priori |mu| bound (0: estimate)");
  factorize->add_option("--tol-grad", cfg.tol_grad, "region labels: |Dv| threshold (default 1e-3 times max |Dv|)");
  factorize->add_option("--tol-minor", cfg.tol_minor, "region labels: minor threshold (default 1e-3 times max |Dv|)");
  factorize->add_option("--phi", cfg.phi_file, "write phi as grid JSON (minsurf.grid/1)");
  factorize->add_option("--v", cfg.v_file, "write v as lattice JSON (minsurf.grid_map/1)");
  add_out(factorize, cfg, "report JSON");

  auto* residuals = app.add_subcommand("residuals", "weak residuals of a discrete map");
  residuals->add_option("--input", cfg.input, "map JSON (minsurf.discrete_map/1)")->required();
  residuals->add_option("--eps", cfg.eps, "threshold for the 2x2 minor check")->capture_default_str();
  residuals->add_option("--center", cfg.center, "inversion ball centre x,y")->delimiter(',')->expected(2);
  residuals->add_option("--radius", cfg.radius, "inversion ball radius (0: skip the inversion)");
  add_out(residuals, cfg, "report JSON");

  std::vector<std::string> args;
  try {
    args = with_config(raw_args);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    err << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kInvalidInput;
  }

  try {
    if (*verify) return cmd_verify(cfg, out, err);
    if (*scan) return cmd_scan(cfg, out, err);
    if (*solve) return cmd_solve(cfg, out, err);
    if (*factorize) return cmd_factorize(cfg, out, err);
    if (*residuals) return cmd_residuals(cfg, out, err);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const ConvergenceError& e) {
    err << "convergence failure: " << e.what() << '\n';
    return kConvergenceFailure;
  } catch (const NotInjective& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kConvergenceFailure;
  } catch (const OutOfDomain& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kConvergenceFailure;
  }
  return kInvalidInput;
}

}  // namespace minsurf::cli
