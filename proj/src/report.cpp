#include "tpt/report.hpp"

namespace tpt {

std::vector<std::pair<std::string, std::string>> RateReport::rows() const {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("model", model);
  kv.emplace_back("noise", fmt_g(noise));
  kv.emplace_back("seed", std::to_string(seed));
  kv.emplace_back("sample_count", std::to_string(sample_count));
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) kv.emplace_back(key, fmt_g(*v));
  };
  put("rho_ab_mc", rho_ab_mc);
  put("rho_ab_fem", rho_ab_fem);
  put("e_tau_ab", e_tau_ab);
  put("e_tau_ab_se", e_tau_ab_se);
  put("e_tau_ab_ci_lo", e_tau_ab_ci_lo);
  put("e_tau_ab_ci_hi", e_tau_ab_ci_hi);
  put("nu_crossover", nu_crossover);
  put("nu_crossover_ci_lo", nu_crossover_ci_lo);
  put("nu_crossover_ci_hi", nu_crossover_ci_hi);
  put("nu_flux_nn", nu_flux_nn);
  put("nu_flux_fem", nu_flux_fem);
  put("rho_a", rho_a);
  put("e_tau_a", e_tau_a);
  put("excluded_fraction", excluded_fraction);
  return kv;
}

void RateReport::write_kv_file(const std::string& path) const { write_kv(path, rows()); }

void RateReport::write_csv_file(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw MissingArtifact("cannot write " + path);
  const auto kv = rows();
  for (std::size_t i = 0; i < kv.size(); ++i) f << kv[i].first << (i + 1 < kv.size() ? "," : "\n");
  for (std::size_t i = 0; i < kv.size(); ++i) f << kv[i].second << (i + 1 < kv.size() ? "," : "\n");
}

}  // namespace tpt
