#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>

#include "tpt/grid2d.hpp"
#include "tpt/util.hpp"

namespace tpt {

// ---------------------------------------------------------------------------
// Regions A and B with smoothed (tanh) indicators.
// The indicator is chi(x) = 1/2 - 1/2 tanh[k (g(x) - g_off)] where g is the
// squared distance for balls, the normalized quadratic form for ellipses, and
// the linear functional for half-spaces; g_off corresponds to the surface
// inflated by moll_delta.
// ---------------------------------------------------------------------------
class Region {
 public:
  enum class Shape { Ball, Ellipse, Halfspace };
  enum class MapKind { None, ProjectPrefix, Custom };

  Region() = default;

  static Region ball(Vec center, double radius);
  // 2D tilted ellipse; angle rotates the rx-axis counterclockwise from x1
  static Region ellipse(Vec center, double rx, double ry, double angle);
  // {x : n.x <= c}
  static Region halfspace(Vec normal, double c);

  Region& mollifier(double k, double delta) {
    moll_k_ = k;
    moll_delta_ = delta;
    return *this;
  }
  // region lives in the first `inner_dim` coordinates of a larger space
  Region& project_prefix(int ambient_dim);
  // region lives in the image of `map` (e.g. collective variables); only
  // membership and first derivatives are supported through a custom map
  Region& with_map(std::function<void(CVecRef, Vec&)> map,
                   std::function<void(CVecRef, Mat&)> jacobian, int ambient_dim);

  bool valid() const { return inner_dim_ > 0; }
  int ambient_dim() const { return ambient_dim_; }
  Shape shape() const { return shape_; }
  const Vec& center() const { return center_; }
  double radius() const { return radius_; }
  double moll_k() const { return moll_k_; }
  double moll_delta() const { return moll_delta_; }

  bool contains(CVecRef x) const;         // strict interior of the nominal region
  bool contains_closed(CVecRef x) const;  // closure, used for stopping rules
  double indicator(CVecRef x) const;
  // chi and d(chi)/dx in ambient coordinates
  double indicator_grad(CVecRef x, Vec& grad) const;
  // additionally the diagonal second derivatives for the listed directions;
  // unsupported through custom maps
  double indicator_jet2(CVecRef x, Vec& grad, const std::vector<int>& dirs2, Vec& diag2) const;

  // point in ambient space on the surface inflated by `offset`, at parameter
  // t in [0,1); balls and ellipses only (2D inner space)
  Vec surface_point(double t, double offset) const;
  // outward unit normal in ambient space at a surface point
  Vec outward_normal(CVecRef x) const;

 private:
  double g_value(CVecRef y) const;  // inner-space argument function
  double g_offset() const;
  void g_jet(CVecRef y, double& g, Vec& grad, const std::vector<int>& dirs2, Vec* diag2) const;

  Shape shape_ = Shape::Ball;
  Vec center_;
  double radius_ = 0;
  double rx_ = 0, ry_ = 0, cos_a_ = 1, sin_a_ = 0;
  Vec normal_;
  double level_ = 0;
  double moll_k_ = 1000.0;
  double moll_delta_ = 0.02;

  MapKind map_kind_ = MapKind::None;
  int inner_dim_ = 0, ambient_dim_ = 0;
  std::function<void(CVecRef, Vec&)> map_;
  std::function<void(CVecRef, Mat&)> map_jac_;
};

// ---------------------------------------------------------------------------
// Collective variables for the planar 7-particle Lennard-Jones cluster: the
// 2nd and 3rd central moments of the smoothed coordination numbers.
// ---------------------------------------------------------------------------
struct CvMap {
  static void eval(CVecRef x14, double& mu2, double& mu3);
  static void eval_jac(CVecRef x14, double& mu2, double& mu3, Mat& jac);  // jac is 2 x 14
};

// ---------------------------------------------------------------------------
// One benchmark dynamical system behind a single abstraction.
// ---------------------------------------------------------------------------
struct DynamicsModel {
  enum class Kind {
    OverdampedIso,       // dX = -grad V dt + sqrt(2/beta) dW
    OverdampedMobility,  // dX = [-M grad F + div M / beta] dt + sqrt(2/beta) M^{1/2} dW
    Langevin             // (x, p) with friction gamma, noise only in p
  };

  Kind kind = Kind::OverdampedIso;
  std::string name;
  int dim = 0;
  int noise_rank = 0;
  double noise = 0;  // beta^{-1} for overdamped families, epsilon for Langevin
  double gamma = 0, mass = 1;
  bool reversible = true;

  Region region_a, region_b;

  // V(x) and optionally its gradient (exact analytic derivative)
  std::function<double(CVecRef, Vec*)> potential;
  std::function<void(CVecRef, Vec&)> drift;
  std::function<void(CVecRef, Mat&)> sigma;              // d x r diffusion factor
  std::function<double(CVecRef)> energy_exponent;        // beta*V(x) or H(x,p)/eps
  std::function<void(CVecRef, Mat&)> mobility;           // M(x); identity unless set
  std::shared_ptr<const Grid2D> grid;                    // tabulated F/M when applicable

  double beta() const { return 1.0 / noise; }
  double beta_inv() const { return noise; }
  double epsilon() const { return noise; }

  void mobility_or_identity(CVecRef x, Mat& m) const {
    if (mobility) {
      mobility(x, m);
    } else {
      m = Mat::Identity(dim, dim);
    }
  }
};

struct ModelParams {
  std::map<std::string, double> num;
  std::map<std::string, std::string> str;

  double get(const std::string& key, double fallback) const {
    auto it = num.find(key);
    return it == num.end() ? fallback : it->second;
  }
  bool has(const std::string& key) const { return num.count(key) > 0; }
};

// names: mueller, rugged_mueller_10d, duffing, lj7_cartesian, lj7_cv
DynamicsModel make_model(const std::string& name, const ModelParams& params = {});

// Lennard-Jones helpers (2D, 7 particles; coordinates interleaved x0,y0,x1,...)
double lj7_potential(CVecRef x, Vec* grad);
Vec lj7_minimum_trapezoid();  // local minimum with CVs inside the reactant region
Vec lj7_minimum_hexagon();    // global minimum with CVs inside the product region
Vec lj7_descend(Vec x, int max_iter = 200000, double gtol = 1e-10);

// Mueller 2D potential and benchmark region centers
double mueller_potential(double x1, double x2, double* g1 = nullptr, double* g2 = nullptr);

}  // namespace tpt
