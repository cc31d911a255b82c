#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tpt/models.hpp"
#include "tpt/util.hpp"

namespace tpt {

// ---------------------------------------------------------------------------
// basic statistics
// ---------------------------------------------------------------------------

// two-sided Student-t quantile: P(|T| <= t) = alpha with dof degrees of freedom
double t_quantile(double alpha, int dof);

struct IntervalStats {
  double mean = 0, se = 0, lo = 0, hi = 0;
  int n = 0;
};
IntervalStats confidence_interval(const std::vector<double>& samples, double alpha = 0.95);

// adaptive Simpson quadrature to an absolute tolerance
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-10);

// ---------------------------------------------------------------------------
// Monte Carlo estimators over a quasi-uniform point set.
// The same points feed the normalization constant and the integrand so the
// two cannot drift apart.
// ---------------------------------------------------------------------------

struct McEstimate {
  double z = 0;      // (1/N) sum exp(-E_j)
  double value = 0;  // ratio estimate
  int n = 0;
};

// rho_ab = mean(exp(-E) q (1-q)) / mean(exp(-E))
McEstimate rho_ab_mc(const std::vector<double>& q, const std::vector<double>& exponent);
// nu = coef * mean(exp(-E) g) / mean(exp(-E)); g is |grad q|_M^2 for
// overdamped models (coef 1/beta) or m (dq/dp)^2 for Langevin (coef eps*gamma)
McEstimate flux_rate_mc(const std::vector<double>& g, const std::vector<double>& exponent,
                        double coef);
// rho_a = mean(exp(-E) qminus) / mean(exp(-E))
McEstimate rho_a_mc(const std::vector<double>& qminus, const std::vector<double>& exponent);

// delete-one jackknife standard error of the rho_ab ratio estimator
double rho_ab_jackknife_se(const std::vector<double>& q, const std::vector<double>& exponent);

// data-quality guard shared by the estimators
void check_committor_range(const std::vector<double>& q);

// ---------------------------------------------------------------------------
// crossover identity
// ---------------------------------------------------------------------------

struct CrossoverRate {
  double nu = 0, lo = 0, hi = 0;
  std::optional<double> e_tau_a;
};
CrossoverRate crossover_rate(double rho_ab, const IntervalStats& tau, double alpha = 0.95,
                             std::optional<double> rho_a = std::nullopt);

// ---------------------------------------------------------------------------
// committor discrepancy weighted by the reactive density
// ---------------------------------------------------------------------------

struct Discrepancy {
  double wmae = 0, wrmse = 0;
};
Discrepancy weighted_discrepancy(const std::vector<double>& q_test,
                                 const std::vector<double>& q_ref,
                                 const std::vector<double>& mu);

// ---------------------------------------------------------------------------
// exact one-dimensional benchmark: bistable dynamics confined to the
// parabola y = 1 - x^2, with either the signed arclength or x itself as the
// reaction coordinate
// ---------------------------------------------------------------------------

double parabola_arclength(double x);  // s(x) along y = 1 - x^2

struct Oracle1DResult {
  double nu_arc = 0, rho_arc = 0;  // arclength coordinate
  double nu_x = 0, rho_x = 0;      // x coordinate
};
Oracle1DResult exact_1d_suite(const std::function<double(double)>& v0, double a, double b,
                              double beta);
// committor profile for either coordinate ("arclength" or "x")
std::vector<std::pair<double, double>> exact_1d_committor(const std::function<double(double)>& v0,
                                                          double a, double b, double beta,
                                                          const std::string& cv, int n_pts = 201);

}  // namespace tpt
