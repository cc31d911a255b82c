#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <memory>

#include "tpt/committor_eval.hpp"
#include "tpt/mesh.hpp"
#include "tpt/models.hpp"
#include "tpt/util.hpp"

namespace tpt {

using SpMat = Eigen::SparseMatrix<double>;

// scalar field and 2x2 tensor field evaluated at triangle centroids
using ScalarField = std::function<double(double, double)>;
using TensorField = std::function<void(double, double, double m[3])>;  // m = {m11, m12, m22}

// Stiffness system of the symmetric committor problem with one-point centroid
// quadrature: A_jk = sum_T area * exp(-beta F(c)) grad v_j . M(c) grad v_k,
// restricted to free nodes; the right-hand side carries the product-boundary
// columns.
void assemble_reversible(const TriMesh& mesh, const ScalarField& f_energy, const TensorField& m,
                         double beta, SpMat& a, Vec& rhs, std::vector<int>& free_nodes);

// Nonsymmetric system for the kinetic (underdamped) committor in the (x, p)
// plane: symmetric momentum-diffusion part minus the advection part, both
// weighted by exp(-p^2 / (2 eps)) at centroids. advection_sign = -1 solves
// the time-reversed problem.
void assemble_langevin(const TriMesh& mesh, const std::function<double(double)>& v_prime,
                       double mass, double gamma, double eps, int advection_sign, SpMat& a,
                       Vec& rhs, std::vector<int>& free_nodes);

// relative residual <= 1e-10 (symmetric) / 1e-8 (general) or throws
Vec solve_system(const SpMat& a, const Vec& rhs, bool symmetric);

class FemSolution : public CommittorFn {
 public:
  FemSolution() = default;
  FemSolution(TriMesh mesh, Vec nodal, std::string model_kind, double noise);

  int dim() const override { return 2; }
  const TriMesh& mesh() const { return mesh_; }
  const Vec& nodal() const { return nodal_; }
  const std::string& model_kind() const { return model_kind_; }
  double noise() const { return noise_; }

  // piecewise-linear value and per-triangle gradient; outside points evaluate
  // on the nearest triangle and set *extrapolated
  double eval(CVecRef xy, Vec* grad = nullptr, bool* extrapolated = nullptr) const;
  double value_grad(CVecRef x, Vec& grad) const override {
    return eval(x, &grad, nullptr);
  }

  void save(const std::string& prefix) const;  // prefix.node / prefix.ele / prefix.q
  static FemSolution load(const std::string& prefix);

 private:
  void build_locator() const;

  TriMesh mesh_;
  Vec nodal_;
  std::string model_kind_;
  double noise_ = 0;

  struct Locator;
  mutable std::shared_ptr<Locator> locator_;
};

// forward committor of a reversible model on a tagged mesh (0 on the reactant
// boundary, 1 on the product boundary, natural condition on outer nodes)
FemSolution solve_committor_reversible(const TriMesh& mesh, const ScalarField& f_energy,
                                       const TensorField& m, double beta);
// forward (backward = true: time-reversed with swapped boundary data)
// committor of the underdamped oscillator
FemSolution solve_committor_langevin(const TriMesh& mesh, const std::function<double(double)>& v_prime,
                                     double mass, double gamma, double eps, bool backward = false);

// centroid-quadrature estimators sharing the assembly's quadrature rule.
// The invariant-density normalization covers the mesh plus the removed
// region interiors, supplied as extra mass.
struct FemQuadrature {
  double z = 0;        // total invariant mass (mesh + regions)
  double z_mesh = 0;   // mesh part only
  double rho_ab = 0;
  double nu_flux = 0;
  double rho_a = 0;    // includes the reactant region's interior mass
};
// exponent(x,y) = beta*F or H/eps; flux coefficient 1/beta or eps*gamma;
// flux integrand g(c) supplied per centroid from the per-triangle gradient
FemQuadrature fem_quadrature(const FemSolution& fwd, const ScalarField& exponent,
                             const std::function<double(std::size_t, const Vec&)>& flux_integrand,
                             double flux_coef, double region_mass_a, double region_mass_b,
                             const FemSolution* bwd = nullptr);

// integral of exp(-exponent) over a ball or ellipse by midpoint quadrature in
// polar coordinates, refined until the relative change is below tol
double region_mass(const Region& region, const ScalarField& exponent, double tol = 1e-8);

}  // namespace tpt
