#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tpt/util.hpp"

namespace tpt {

// All scalar transition-rate estimates for one experiment, with the route
// each number came from. The crossover-route rate always equals
// rho_ab / e_tau_ab exactly.
struct RateReport {
  std::string model;
  double noise = 0;
  std::uint64_t seed = 0;

  std::optional<double> rho_ab_mc, rho_ab_fem;
  std::optional<double> e_tau_ab, e_tau_ab_se, e_tau_ab_ci_lo, e_tau_ab_ci_hi;
  std::optional<double> nu_crossover, nu_crossover_ci_lo, nu_crossover_ci_hi;
  std::optional<double> nu_flux_nn, nu_flux_fem;
  std::optional<double> rho_a, e_tau_a;
  std::optional<double> excluded_fraction;
  int sample_count = 0;

  void write_kv_file(const std::string& path) const;
  void write_csv_file(const std::string& path) const;
  std::vector<std::pair<std::string, std::string>> rows() const;
};

}  // namespace tpt
