#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tpt/committor_eval.hpp"
#include "tpt/estimators.hpp"
#include "tpt/integrate.hpp"
#include "tpt/models.hpp"
#include "tpt/rng.hpp"
#include "tpt/util.hpp"

namespace tpt {

// ---------------------------------------------------------------------------
// metadynamics
// ---------------------------------------------------------------------------

struct BiasField {
  struct Gaussian {
    double cx, cy, w, s1, s2;
  };
  std::vector<Gaussian> gs;

  double value(double x, double y) const;
  void add_grad(double x, double y, double& gx, double& gy) const;
  // bias as an additive potential acting on the first two coordinates
  ExtraPotential as_extra(int dim) const;
  ExtraDrift as_extra_drift(int dim) const;

  void save(const std::string& path) const;
  static BiasField load(const std::string& path);
};

struct MetadOptions {
  double w = 5.0, s1 = 0.05, s2 = 0.05;
  long deposit_stride = 500;
  int n_g = 2000;
  double dt = 1e-5;
  long post_steps = 1000000;
  long record_stride = 10;
  std::uint64_t seed = 1;
};

// biased exploration from the reactant center: deposit n_g Gaussians along
// the trajectory, then record points while running in the frozen bias
std::pair<BiasField, std::vector<Vec>> run_metadynamics(const DynamicsModel& model,
                                                        const MetadOptions& opt);

// ---------------------------------------------------------------------------
// spacing subsample: ordered keep/discard scan with pairwise distance > delta
// among kept points
// ---------------------------------------------------------------------------
std::vector<int> delta_net_keep(const std::vector<Vec>& points, double delta);
std::vector<Vec> delta_net(const std::vector<Vec>& points, double delta);

// ---------------------------------------------------------------------------
// reactive-trajectory start distribution on the inflated reactant surface
// ---------------------------------------------------------------------------

struct BoundaryDistribution {
  std::vector<Vec> points;     // on the surface inflated by dr
  std::vector<double> weights; // normalized
  std::size_t sample(Rng& rng) const;  // index by weight

  void save(const std::string& path) const;
};

// weights proportional to exp(-energy_exponent(x)) |n . grad q|(x)
BoundaryDistribution boundary_distribution(const CommittorFn& committor, const Region& region_a,
                                           const DynamicsModel& model, int n_points = 1000,
                                           double dr = 1e-3);

// ---------------------------------------------------------------------------
// transition-path ensembles
// ---------------------------------------------------------------------------

struct CrossoverStats {
  std::vector<double> taus;  // product-terminated runs only
  int excluded = 0;          // runs that fell back into the reactant set
  int max_step_runs = 0;
  double alpha = 0.95;

  int attempted() const { return static_cast<int>(taus.size()) + excluded + max_step_runs; }
  double excluded_fraction() const {
    return attempted() ? static_cast<double>(excluded + max_step_runs) / attempted() : 0.0;
  }
  IntervalStats interval() const;

  void save_csv(const std::string& path) const;  // sample_index,tau + summary sidecar
};

using StartSampler = std::function<Vec(std::size_t, Rng&)>;

struct EnsembleOptions {
  int n = 250;
  double dt = 1e-5;
  long max_steps = 1000000000;
  double alpha = 0.95;
  std::uint64_t seed = 1;
  bool use_mala = false;
};

CrossoverStats sample_transition_ensemble(const DynamicsModel& model, const Controller& controller,
                                          const StartSampler& start, const EnsembleOptions& opt);

StartSampler starts_from_distribution(const BoundaryDistribution& dist);

// restrained sampling that carries a reduced-space point into the full
// coordinate space: Metropolis-adjusted steps on V + kappa/2 |cv(x) - z|^2
Vec lift_cv_point(const DynamicsModel& lj7_cartesian, CVecRef z_cv, double kappa, long burn_in,
                  double dt, Rng& rng);

// ---------------------------------------------------------------------------
// long unbiased runs: transition counting, reactive fraction, crossover times
// ---------------------------------------------------------------------------

struct BruteForceResult {
  long n_ab = 0;
  double t_total = 0;
  double t_reactive = 0;
  std::vector<double> taus;
  long steps = 0;
  double mala_acceptance = 0;

  double nu() const { return n_ab / t_total; }
  double rho_ab() const { return t_reactive / t_total; }
  double mean_tau() const;
};

struct BruteForceOptions {
  double dt = 5e-3;
  long steps = 10000000;
  std::uint64_t seed = 1;
  bool use_mala = false;
  // optional reflecting box (empty: none); per-coordinate [lo, hi]
  std::vector<std::pair<double, double>> reflect;
};

BruteForceResult brute_force_run(const DynamicsModel& model, CVecRef start,
                                 const BruteForceOptions& opt);

}  // namespace tpt
