#include "tpt/fem.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>

namespace tpt {

namespace {

// free-node numbering: -1 for Dirichlet nodes (region boundaries)
std::vector<int> number_free(const TriMesh& mesh, std::vector<int>& free_nodes) {
  std::vector<int> index(mesh.n_nodes(), -1);
  free_nodes.clear();
  for (std::size_t i = 0; i < mesh.n_nodes(); ++i) {
    if (mesh.tag[i] == kTagBdryA || mesh.tag[i] == kTagBdryB) continue;
    index[i] = static_cast<int>(free_nodes.size());
    free_nodes.push_back(static_cast<int>(i));
  }
  return index;
}

}  // namespace

void assemble_reversible(const TriMesh& mesh, const ScalarField& f_energy, const TensorField& m,
                         double beta, SpMat& a, Vec& rhs, std::vector<int>& free_nodes) {
  const std::vector<int> index = number_free(mesh, free_nodes);
  const int nf = static_cast<int>(free_nodes.size());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.n_tris() * 9);
  rhs = Vec::Zero(nf);

  std::array<std::array<double, 2>, 3> g;
  double area;
  for (std::size_t t = 0; t < mesh.n_tris(); ++t) {
    mesh.p1_gradients(t, g, area);
    const auto c = mesh.centroid(t);
    const double w = area * std::exp(-beta * f_energy(c[0], c[1]));
    double mm[3];
    m(c[0], c[1], mm);
    for (int i = 0; i < 3; ++i) {
      const int ni = mesh.tris[t][i];
      if (index[ni] < 0) continue;  // rows exist for free nodes only
      for (int j = 0; j < 3; ++j) {
        const int nj = mesh.tris[t][j];
        const double mgx = mm[0] * g[j][0] + mm[1] * g[j][1];
        const double mgy = mm[1] * g[j][0] + mm[2] * g[j][1];
        const double aij = w * (g[i][0] * mgx + g[i][1] * mgy);
        if (index[ni] >= 0 && index[nj] >= 0) {
          trips.emplace_back(index[ni], index[nj], aij);
        } else if (index[ni] >= 0 && mesh.tag[nj] == kTagBdryB) {
          rhs[index[ni]] -= aij;  // product boundary carries value one
        }
      }
    }
  }
  a.resize(nf, nf);
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();
}

void assemble_langevin(const TriMesh& mesh, const std::function<double(double)>& v_prime,
                       double mass, double gamma, double eps, int advection_sign, SpMat& a,
                       Vec& rhs, std::vector<int>& free_nodes) {
  const std::vector<int> index = number_free(mesh, free_nodes);
  const int nf = static_cast<int>(free_nodes.size());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.n_tris() * 9);
  rhs = Vec::Zero(nf);

  std::array<std::array<double, 2>, 3> g;
  double area;
  for (std::size_t t = 0; t < mesh.n_tris(); ++t) {
    mesh.p1_gradients(t, g, area);
    const auto c = mesh.centroid(t);
    const double x = c[0], p = c[1];
    const double w = std::exp(-p * p / (2.0 * eps));
    // advection field of the kinetic generator, (dx/dt, dp/dt) without friction
    const double adv_x = advection_sign * p / mass;
    const double adv_p = advection_sign * (-v_prime(x));
    for (int i = 0; i < 3; ++i) {
      const int ni = mesh.tris[t][i];
      if (index[ni] < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int nj = mesh.tris[t][j];
        // symmetric momentum-diffusion block
        const double sym = area * gamma * w * mass * g[i][1] * g[j][1];
        // advection block, test function at the centroid value 1/3
        const double badv = area * (w / eps) * (1.0 / 3.0) * (adv_x * g[j][0] + adv_p * g[j][1]);
        const double aij = sym - badv;
        if (index[ni] >= 0 && index[nj] >= 0) {
          trips.emplace_back(index[ni], index[nj], aij);
        } else if (index[ni] >= 0 && mesh.tag[nj] == kTagBdryB) {
          rhs[index[ni]] -= aij;
        }
      }
    }
  }
  a.resize(nf, nf);
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();
}

Vec solve_system(const SpMat& a, const Vec& rhs, bool symmetric) {
  Vec x;
  if (symmetric) {
    Eigen::SimplicialLDLT<SpMat> solver;
    solver.compute(a);
    if (solver.info() != Eigen::Success)
      throw NumericalFailure("factorization of the symmetric system failed (not positive definite?)");
    x = solver.solve(rhs);
  } else {
    Eigen::SparseLU<SpMat> solver;
    solver.analyzePattern(a);
    solver.factorize(a);
    if (solver.info() != Eigen::Success)
      throw NumericalFailure("sparse LU factorization failed (singular system?)");
    x = solver.solve(rhs);
  }
  const double rn = rhs.norm();
  const double res = rn > 0 ? (a * x - rhs).norm() / rn : (a * x).norm();
  const double tol = symmetric ? 1e-10 : 1e-8;
  if (!(res <= tol))
    throw NumericalFailure("linear solve residual " + fmt_g(res) + " above " + fmt_g(tol));
  return x;
}

// ---------------------------------------------------------------------------
// FemSolution
// ---------------------------------------------------------------------------

struct FemSolution::Locator {
  double xmin, ymin, cell;
  int nx, ny;
  std::vector<std::vector<int>> bins;

  int bin_of(double x, double y) const {
    int i = static_cast<int>((x - xmin) / cell);
    int j = static_cast<int>((y - ymin) / cell);
    i = std::max(0, std::min(nx - 1, i));
    j = std::max(0, std::min(ny - 1, j));
    return j * nx + i;
  }
};

FemSolution::FemSolution(TriMesh mesh, Vec nodal, std::string model_kind, double noise)
    : mesh_(std::move(mesh)), nodal_(std::move(nodal)), model_kind_(std::move(model_kind)),
      noise_(noise) {
  if (static_cast<std::size_t>(nodal_.size()) != mesh_.n_nodes())
    throw ConfigError("nodal value count does not match the mesh");
}

void FemSolution::build_locator() const {
  auto loc = std::make_shared<Locator>();
  double xmin = mesh_.nodes[0][0], xmax = xmin, ymin = mesh_.nodes[0][1], ymax = ymin;
  for (const auto& p : mesh_.nodes) {
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
    ymin = std::min(ymin, p[1]);
    ymax = std::max(ymax, p[1]);
  }
  const double target_bins = std::sqrt(static_cast<double>(mesh_.n_tris()) / 2.0) + 1.0;
  loc->cell = std::max({(xmax - xmin) / target_bins, (ymax - ymin) / target_bins, 1e-12});
  loc->xmin = xmin - 0.5 * loc->cell;
  loc->ymin = ymin - 0.5 * loc->cell;
  loc->nx = static_cast<int>((xmax - loc->xmin) / loc->cell) + 2;
  loc->ny = static_cast<int>((ymax - loc->ymin) / loc->cell) + 2;
  loc->bins.assign(static_cast<std::size_t>(loc->nx) * loc->ny, {});
  for (std::size_t t = 0; t < mesh_.n_tris(); ++t) {
    double txmin = 1e300, txmax = -1e300, tymin = 1e300, tymax = -1e300;
    for (int v : mesh_.tris[t]) {
      txmin = std::min(txmin, mesh_.nodes[v][0]);
      txmax = std::max(txmax, mesh_.nodes[v][0]);
      tymin = std::min(tymin, mesh_.nodes[v][1]);
      tymax = std::max(tymax, mesh_.nodes[v][1]);
    }
    const int i0 = std::max(0, static_cast<int>((txmin - loc->xmin) / loc->cell));
    const int i1 = std::min(loc->nx - 1, static_cast<int>((txmax - loc->xmin) / loc->cell));
    const int j0 = std::max(0, static_cast<int>((tymin - loc->ymin) / loc->cell));
    const int j1 = std::min(loc->ny - 1, static_cast<int>((tymax - loc->ymin) / loc->cell));
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i)
        loc->bins[static_cast<std::size_t>(j) * loc->nx + i].push_back(static_cast<int>(t));
  }
  locator_ = std::move(loc);
}

double FemSolution::eval(CVecRef xy, Vec* grad, bool* extrapolated) const {
  if (!locator_) build_locator();
  const double x = xy[0], y = xy[1];
  const auto& loc = *locator_;
  if (extrapolated) *extrapolated = false;

  auto barycentric = [&](int t, double l[3]) {
    const auto& a = mesh_.nodes[mesh_.tris[t][0]];
    const auto& b = mesh_.nodes[mesh_.tris[t][1]];
    const auto& c = mesh_.nodes[mesh_.tris[t][2]];
    const double det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    l[1] = ((x - a[0]) * (c[1] - a[1]) - (y - a[1]) * (c[0] - a[0])) / det;
    l[2] = ((b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0])) / det;
    l[0] = 1.0 - l[1] - l[2];
  };
  auto finish = [&](int t, const double l[3]) {
    double val = 0;
    for (int i = 0; i < 3; ++i) val += l[i] * nodal_[mesh_.tris[t][i]];
    if (grad) {
      std::array<std::array<double, 2>, 3> g;
      double area;
      mesh_.p1_gradients(static_cast<std::size_t>(t), g, area);
      grad->setZero(2);
      for (int i = 0; i < 3; ++i) {
        (*grad)[0] += nodal_[mesh_.tris[t][i]] * g[i][0];
        (*grad)[1] += nodal_[mesh_.tris[t][i]] * g[i][1];
      }
    }
    return val;
  };

  const auto& bin = loc.bins[loc.bin_of(x, y)];
  double l[3];
  for (int t : bin) {
    barycentric(t, l);
    if (l[0] >= -1e-12 && l[1] >= -1e-12 && l[2] >= -1e-12) return finish(t, l);
  }
  // nearest centroid among nearby bins, widening until something is found
  int best = -1;
  double best_d = 1e300;
  const int ci = std::max(0, std::min(loc.nx - 1, static_cast<int>((x - loc.xmin) / loc.cell)));
  const int cj = std::max(0, std::min(loc.ny - 1, static_cast<int>((y - loc.ymin) / loc.cell)));
  for (int ring = 1; ring < std::max(loc.nx, loc.ny) + 1; ++ring) {
    for (int j = std::max(0, cj - ring); j <= std::min(loc.ny - 1, cj + ring); ++j) {
      for (int i = std::max(0, ci - ring); i <= std::min(loc.nx - 1, ci + ring); ++i) {
        for (int t : loc.bins[static_cast<std::size_t>(j) * loc.nx + i]) {
          const auto c = mesh_.centroid(static_cast<std::size_t>(t));
          const double d = (c[0] - x) * (c[0] - x) + (c[1] - y) * (c[1] - y);
          if (d < best_d) {
            best_d = d;
            best = t;
          }
        }
      }
    }
    if (best >= 0) break;
  }
  if (best < 0) throw NumericalFailure("point location failed on an empty mesh");
  if (extrapolated) *extrapolated = true;
  barycentric(best, l);
  return finish(best, l);
}

void FemSolution::save(const std::string& prefix) const {
  export_mesh(mesh_, prefix + ".node", prefix + ".ele");
  std::ofstream f(prefix + ".q");
  if (!f) throw MissingArtifact("cannot write " + prefix + ".q");
  f.precision(17);
  f << "# " << model_kind_ << " noise " << noise_ << "\n";
  for (Eigen::Index i = 0; i < nodal_.size(); ++i) f << nodal_[i] << "\n";
}

FemSolution FemSolution::load(const std::string& prefix) {
  TriMesh mesh = import_mesh(prefix + ".node", prefix + ".ele");
  std::ifstream f(prefix + ".q");
  if (!f) throw MissingArtifact("cannot open " + prefix + ".q");
  std::string header;
  std::getline(f, header);
  std::string kind = "unknown";
  double noise = 0;
  {
    std::stringstream ss(header);
    std::string hash, noise_tag;
    if (ss >> hash >> kind >> noise_tag >> noise) {
    }
  }
  Vec nodal(mesh.n_nodes());
  for (std::size_t i = 0; i < mesh.n_nodes(); ++i)
    if (!(f >> nodal[static_cast<Eigen::Index>(i)]))
      throw ConfigError("truncated value file " + prefix + ".q");
  return FemSolution(std::move(mesh), std::move(nodal), kind, noise);
}

// ---------------------------------------------------------------------------
// committor drivers
// ---------------------------------------------------------------------------

namespace {
Vec scatter_solution(const TriMesh& mesh, const std::vector<int>& free_nodes, const Vec& x) {
  Vec nodal = Vec::Zero(mesh.n_nodes());
  for (std::size_t k = 0; k < free_nodes.size(); ++k)
    nodal[free_nodes[k]] = x[static_cast<Eigen::Index>(k)];
  for (std::size_t i = 0; i < mesh.n_nodes(); ++i)
    if (mesh.tag[i] == kTagBdryB) nodal[i] = 1.0;
  return nodal;
}
}  // namespace

FemSolution solve_committor_reversible(const TriMesh& mesh, const ScalarField& f_energy,
                                       const TensorField& m, double beta) {
  SpMat a;
  Vec rhs;
  std::vector<int> free_nodes;
  assemble_reversible(mesh, f_energy, m, beta, a, rhs, free_nodes);
  Vec x = solve_system(a, rhs, true);
  return FemSolution(mesh, scatter_solution(mesh, free_nodes, x), "reversible", 1.0 / beta);
}

FemSolution solve_committor_langevin(const TriMesh& mesh, const std::function<double(double)>& v_prime,
                                     double mass, double gamma, double eps, bool backward) {
  TriMesh work = mesh;
  if (backward) {
    // swapped boundary data, advection negated
    for (auto& t : work.tag) {
      if (t == kTagBdryA) {
        t = kTagBdryB;
      } else if (t == kTagBdryB) {
        t = kTagBdryA;
      }
    }
  }
  SpMat a;
  Vec rhs;
  std::vector<int> free_nodes;
  assemble_langevin(work, v_prime, mass, gamma, eps, backward ? -1 : 1, a, rhs, free_nodes);
  Vec x = solve_system(a, rhs, false);
  return FemSolution(work, scatter_solution(work, free_nodes, x), backward ? "langevin-" : "langevin+",
                     eps);
}

// ---------------------------------------------------------------------------
// quadrature estimators
// ---------------------------------------------------------------------------

FemQuadrature fem_quadrature(const FemSolution& fwd, const ScalarField& exponent,
                             const std::function<double(std::size_t, const Vec&)>& flux_integrand,
                             double flux_coef, double region_mass_a, double region_mass_b,
                             const FemSolution* bwd) {
  const TriMesh& mesh = fwd.mesh();
  FemQuadrature out;
  double num_rho = 0, num_flux = 0, num_rho_a = 0;
  std::array<std::array<double, 2>, 3> g;
  double area;
  Vec grad(2);
  for (std::size_t t = 0; t < mesh.n_tris(); ++t) {
    mesh.p1_gradients(t, g, area);
    const auto c = mesh.centroid(t);
    const double w = area * std::exp(-exponent(c[0], c[1]));
    double q = 0;
    grad.setZero();
    for (int i = 0; i < 3; ++i) {
      const double qi = fwd.nodal()[mesh.tris[t][i]];
      q += qi / 3.0;
      grad[0] += qi * g[i][0];
      grad[1] += qi * g[i][1];
    }
    double qm;
    if (bwd) {
      qm = 0;
      for (int i = 0; i < 3; ++i) qm += bwd->nodal()[mesh.tris[t][i]] / 3.0;
    } else {
      qm = 1.0 - q;
    }
    out.z_mesh += w;
    num_rho += w * q * qm;
    num_flux += w * flux_integrand(t, grad);
    num_rho_a += w * qm;
  }
  out.z = out.z_mesh + region_mass_a + region_mass_b;
  out.rho_ab = num_rho / out.z;
  out.nu_flux = flux_coef * num_flux / out.z;
  out.rho_a = (num_rho_a + region_mass_a) / out.z;  // the backward committor is one inside A
  return out;
}

double region_mass(const Region& region, const ScalarField& exponent, double tol) {
  if (region.shape() == Region::Shape::Halfspace)
    throw NumericalFailure("region mass quadrature needs a bounded region");
  double prev = 0;
  for (int n = 32; n <= 4096; n *= 2) {
    double acc = 0;
    for (int i = 0; i < n; ++i) {
      const double r = (i + 0.5) / n;  // radial midpoint in the unit disk
      for (int j = 0; j < 2 * n; ++j) {
        const double t = (j + 0.5) / (2 * n);
        // map the unit disk onto the region through its surface parameterization
        Vec edge = region.surface_point(t, 0.0);
        const Vec& c = region.center();
        const double x = c[0] + r * (edge[0] - c[0]);
        const double y = c[1] + r * (edge[1] - c[1]);
        // area element of the radial map: r * |cross(dr, dt)| handled by the
        // Jacobian of the parameterization; for balls and ellipses this is
        // r * area(region) * 2 per unit cell
        acc += r * std::exp(-exponent(x, y));
      }
    }
    double shape_area;
    if (region.shape() == Region::Shape::Ball) {
      shape_area = M_PI * region.radius() * region.radius();
    } else {
      // recover the ellipse area from two extremal surface points
      Vec p0 = region.surface_point(0.0, 0.0), p1 = region.surface_point(0.25, 0.0);
      const Vec& c = region.center();
      const double ax = std::hypot(p0[0] - c[0], p0[1] - c[1]);
      const double ay = std::hypot(p1[0] - c[0], p1[1] - c[1]);
      shape_area = M_PI * ax * ay;
    }
    const double val = acc * shape_area / (n * 2 * n) * 2.0;
    if (n > 32 && std::fabs(val - prev) <= tol * std::max(1e-300, std::fabs(val))) return val;
    prev = val;
  }
  return prev;
}

}  // namespace tpt
