#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "minsurf/errors.hpp"
#include "minsurf/mesh.hpp"

/// Discrete area functional for graphs over a triangulated planar domain with P1
/// elements, its exact gradient, a descent minimizer and weak residuals.
namespace minsurf::graphsolve {

/// Total graph area sum_T A(Du|_T) |T|.
double assemble_energy(const DiscreteMap& u);

/// E(u + d) - E(u), evaluated triangle by triangle so that the difference keeps its
/// relative accuracy when it is far below the rounding level of E itself.
double energy_difference(const DiscreteMap& u, const Eigen::MatrixXd& step);

/// Exact derivative of assemble_energy with respect to the nodal values, one row per node.
/// Boundary rows are zero.
Eigen::MatrixXd assemble_gradient(const DiscreteMap& u);

/// Weak inner-variation functional: row i holds sum_T B(Du|_T) grad(phi_i) |T|; boundary rows zero.
Eigen::MatrixXd assemble_inner_variation(const DiscreteMap& u);

/// P1 Dirichlet Laplacian restricted to interior nodes, factored once.
class InteriorLaplacian {
 public:
  explicit InteriorLaplacian(const Mesh& mesh);

  int num_interior() const { return static_cast<int>(interior_.size()); }
  const std::vector<int>& interior() const { return interior_; }
  const Eigen::SparseMatrix<double>& stiffness() const { return k_ii_; }

  /// K_II^{-1} applied columnwise to a node-indexed field; boundary rows of the result are 0.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& node_field) const;
  /// sqrt(sum_c r_c^T K_II^{-1} r_c): the norm of the residual as a functional on
  /// H^1_0 test fields measured with the Dirichlet seminorm.
  double dual_norm(const Eigen::MatrixXd& node_residual) const;
  /// Discrete harmonic extension of the boundary rows of `values`.
  Eigen::MatrixXd harmonic_extension(const Eigen::MatrixXd& values) const;

 private:
  const Mesh* mesh_;
  std::vector<int> interior_;
  std::vector<int> slot_;  // node -> interior slot or -1
  Eigen::SparseMatrix<double> k_ii_;
  Eigen::SparseMatrix<double> k_ib_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

/// Dual norm of the weak outer-variation residual psi -> sum_T <DA(Du), Dpsi> |T|.
double outer_variation_residual(const DiscreteMap& u);
/// Dual norm of the weak residual of div B(Du) = 0 over pairs of scalar test fields.
double inner_variation_residual(const DiscreteMap& u);

/// The same residuals measured after exact P1 prolongation to the red-refined mesh.
/// On a discrete critical point the own-mesh outer residual vanishes; the refined one
/// measures the jumps of DA(Du) across element edges and so tracks the continuum residual.
double outer_variation_residual_refined(const DiscreteMap& u);
double inner_variation_residual_refined(const DiscreteMap& u);

/// Exact representation of a P1 map on mesh.refined().
DiscreteMap prolong(const DiscreteMap& u);

struct SmallDetReport {
  double max_minor = 0.0;
  bool pass = true;
};

/// max over triangles and row pairs a < b of |det(Du^{ab})|, compared against eps.
SmallDetReport small_det_check(const DiscreteMap& u, double eps);

enum class Initializer { kHarmonic, kBoundaryOnly };

struct SolveConfig {
  /// Stop when |interior gradient|_2 <= tolerance * sqrt(#interior nodes).
  double tolerance = 1e-10;
  int max_iterations = 500;
  double sufficient_decrease = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
  /// L-BFGS history length; 0 gives preconditioned steepest descent.
  int memory = 8;
  Initializer initializer = Initializer::kHarmonic;

  void validate() const;
};

struct SolveResult {
  DiscreteMap map;
  int iterations = 0;
  double energy = 0.0;
  double gradient_norm = 0.0;
  /// Energy after every accepted step (entry 0 is the initial guess).
  std::vector<double> energy_history;
  std::vector<double> gradient_history;
};

/// Thrown by minimize when max_iterations is exhausted or the line search stalls; the last
/// iterate is attached.
class MinimizeError : public ConvergenceError {
 public:
  MinimizeError(const std::string& what, SolveResult last)
      : ConvergenceError(what, last.gradient_norm, last.gradient_history), last_(std::move(last)) {}
  const SolveResult& last() const { return last_; }

 private:
  SolveResult last_;
};

/// Rows are boundary nodes in increasing node order (mesh.boundary_nodes()).
using BoundaryData = Eigen::MatrixXd;

BoundaryData sample_boundary(const Mesh& mesh, int n, const std::function<Eigen::VectorXd(const Vec2&)>& fn);

/// Named analytic boundary data: "affine", "holo-z2" ((Re z^2, Im z^2) * scale, padded with
/// zeros for n > 2) and "paraboloid" (scale * |z|^2 in every component).
std::function<Eigen::VectorXd(const Vec2&)> boundary_preset(const std::string& name, int n, double scale = 1.0);

/// Minimizes the discrete area with the boundary values held fixed, by L-BFGS whose
/// initial inverse Hessian is the inverse Dirichlet Laplacian, with a backtracking
/// sufficient-decrease line search. Accepted steps never increase the energy.
SolveResult minimize(const BoundaryData& boundary, const SolveConfig& config, MeshPtr mesh);

}  // namespace minsurf::graphsolve
