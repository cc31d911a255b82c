#include <doctest.h>

#include <cmath>

#include "tpt/estimators.hpp"
#include "tpt/report.hpp"
#include "tpt/rng.hpp"

using namespace tpt;

TEST_CASE("student-t quantiles") {
  // classic table entries
  CHECK(t_quantile(0.95, 1) == doctest::Approx(12.7062047364).epsilon(1e-9));
  CHECK(t_quantile(0.95, 10) == doctest::Approx(2.2281388520).epsilon(1e-9));
  CHECK(t_quantile(0.95, 249) == doctest::Approx(1.9695368).epsilon(1e-6));
  // wide-sample limit approaches the normal quantile
  CHECK(t_quantile(0.95, 100000) == doctest::Approx(1.959964).epsilon(1e-4));
}

TEST_CASE("confidence intervals") {
  // constant samples give a degenerate interval
  auto s = confidence_interval({1, 1, 1, 1});
  CHECK(s.mean == 1.0);
  CHECK(s.se == 0.0);
  CHECK(s.lo == 1.0);
  CHECK(s.hi == 1.0);

  // two samples: the quantile blows the interval wide open
  s = confidence_interval({0, 2});
  CHECK(s.mean == doctest::Approx(1.0));
  CHECK(s.se == doctest::Approx(1.0));
  CHECK(s.lo == doctest::Approx(-11.7062047).epsilon(1e-6));
  CHECK(s.hi == doctest::Approx(13.7062047).epsilon(1e-6));

  // standard-normal draws: half-width near 1.96/sqrt(n)
  Rng rng(17);
  std::vector<double> draws(250);
  for (auto& d : draws) d = rng.normal();
  s = confidence_interval(draws);
  const double half = 0.5 * (s.hi - s.lo);
  CHECK(half == doctest::Approx(1.96 / std::sqrt(250.0)).epsilon(0.2));

  CHECK_THROWS_AS(confidence_interval({1.0}), NumericalFailure);
}

TEST_CASE("weighted discrepancy") {
  std::vector<double> qref = {0.1, 0.4, 0.8};
  std::vector<double> mu = {1.0, 2.0, 0.5};
  // identical inputs
  auto d = weighted_discrepancy(qref, qref, mu);
  CHECK(d.wmae == 0.0);
  CHECK(d.wrmse == 0.0);

  // single point
  d = weighted_discrepancy({0.6}, {0.5}, {3.0});
  CHECK(d.wmae == doctest::Approx(0.1));
  CHECK(d.wrmse == doctest::Approx(0.1));

  // constant offset: both metrics equal the offset
  std::vector<double> qtest = {0.13, 0.43, 0.83};
  d = weighted_discrepancy(qtest, qref, mu);
  CHECK(d.wmae == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(d.wrmse == doctest::Approx(0.03).epsilon(1e-12));

  // weight scale invariance
  std::vector<double> mu2 = {7.7, 15.4, 3.85};
  auto d2 = weighted_discrepancy(qtest, qref, mu2);
  CHECK(d2.wmae == doctest::Approx(d.wmae).epsilon(1e-12));
  CHECK(d2.wrmse == doctest::Approx(d.wrmse).epsilon(1e-12));
}

TEST_CASE("monte carlo estimators") {
  // q == 0 gives zero reactive probability
  std::vector<double> expnt = {0.0, 0.0, 0.0};
  auto e = rho_ab_mc({0, 0, 0}, expnt);
  CHECK(e.value == 0.0);
  CHECK(e.z == doctest::Approx(1.0));

  // two points with exponents 0 and "infinite": z = 0.5
  e = rho_ab_mc({0.5, 0.5}, {0.0, 800.0});
  CHECK(e.z == doctest::Approx(0.5));
  CHECK(e.value == doctest::Approx(0.25));

  // committor outside the sane band is a data-quality error
  CHECK_THROWS_AS(rho_ab_mc({1.2}, {0.0}), NumericalFailure);

  // linear committor on the unit square with flat density: rate 1 at beta 1
  Rng rng(3);
  std::vector<double> g(20000), ex(20000);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = 1.0;  // |grad q|^2 of q = x1
    ex[i] = 0.0;
  }
  auto f = flux_rate_mc(g, ex, 1.0);
  CHECK(f.value == doctest::Approx(1.0));

  // flux symmetry: the backward committor gradient gives the identical value
  std::vector<double> gm(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) gm[i] = g[i];  // (-grad q)^2 == grad q^2
  auto fb = flux_rate_mc(gm, ex, 1.0);
  CHECK(fb.value == f.value);

  // backward-committor mass. q- == 1 everywhere integrates to one
  auto ra = rho_a_mc(std::vector<double>(100, 1.0), std::vector<double>(100, 0.3));
  CHECK(ra.value == doctest::Approx(1.0));

  // jackknife error of a smooth functional is small and positive
  std::vector<double> q(5000), ex2(5000);
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = rng.uniform();
    ex2[i] = rng.uniform();
  }
  const double se = rho_ab_jackknife_se(q, ex2);
  CHECK(se > 0.0);
  CHECK(se < 0.01);
}

TEST_CASE("crossover identity") {
  IntervalStats tau;
  tau.mean = 2.0;
  tau.se = 0.0;
  tau.n = 4;
  auto r = crossover_rate(0.5, tau);
  CHECK(r.nu == doctest::Approx(0.25));

  // benchmark combination: 2.43e-4 / 5.05e-2
  tau.mean = 5.05e-2;
  tau.se = 0.0;
  r = crossover_rate(2.43e-4, tau);
  CHECK(r.nu == doctest::Approx(4.8119e-3).epsilon(1e-4));

  // 0.106 / 4.88 = 0.0217
  tau.mean = 4.88;
  r = crossover_rate(0.106, tau);
  CHECK(r.nu == doctest::Approx(0.02172).epsilon(1e-3));

  // identity holds bit-exactly and the interval transforms monotonically
  tau.mean = 3.7;
  tau.se = 0.2;
  tau.n = 250;
  r = crossover_rate(1.3e-3, tau, 0.95, 0.4);
  CHECK(r.nu == 1.3e-3 / 3.7);
  CHECK(r.lo < r.nu);
  CHECK(r.nu < r.hi);
  CHECK(*r.e_tau_a == doctest::Approx(3.7 * 0.4 / 1.3e-3));

  CHECK_THROWS_AS(crossover_rate(0.5, IntervalStats{}), NumericalFailure);
}

TEST_CASE("one-dimensional benchmark oracle") {
  auto v0 = [](double x) { return (x * x - 1) * (x * x - 1); };
  auto r = exact_1d_suite(v0, -0.5, 0.5, 3.0);
  // frozen reference values (independent quadrature)
  CHECK(r.nu_arc == doctest::Approx(9.46e-3).epsilon(0.01));
  CHECK(r.rho_arc == doctest::Approx(9.47e-3).epsilon(0.01));
  CHECK(r.nu_x == doctest::Approx(2.19e-2).epsilon(0.01));
  CHECK(r.rho_x == doctest::Approx(7.98e-3).epsilon(0.01));
  // tighter: the values this implementation should hit exactly
  CHECK(r.nu_arc == doctest::Approx(9.4622e-3).epsilon(1e-3));
  CHECK(r.rho_arc == doctest::Approx(9.4749e-3).epsilon(1e-3));
  CHECK(r.nu_x == doctest::Approx(2.1855e-2).epsilon(1e-3));
  CHECK(r.rho_x == doctest::Approx(7.9830e-3).epsilon(1e-3));

  // the suboptimal coordinate overestimates the rate
  CHECK(r.nu_x > r.nu_arc);

  // flat potential: linear committor
  auto prof = exact_1d_committor([](double) { return 0.0; }, 0.0, 1.0, 2.0, "x", 11);
  for (const auto& [x, q] : prof) CHECK(q == doctest::Approx(x).epsilon(1e-9));

  // arclength map matches its closed form at a few points
  CHECK(parabola_arclength(0.0) == doctest::Approx(0.0));
  const double x = 0.7;
  CHECK(parabola_arclength(x) ==
        doctest::Approx(0.5 * x * std::sqrt(1 + 4 * x * x) +
                        0.25 * std::log(2 * x + std::sqrt(1 + 4 * x * x))));
}

TEST_CASE("rate report round trip") {
  RateReport rep;
  rep.model = "mueller";
  rep.noise = 10.0;
  rep.seed = 42;
  rep.rho_ab_mc = 2.43e-4;
  rep.e_tau_ab = 5.05e-2;
  rep.nu_crossover = *rep.rho_ab_mc / *rep.e_tau_ab;
  rep.write_kv_file("report_test.txt");
  rep.write_csv_file("report_test.csv");
  auto kv = read_kv("report_test.txt");
  CHECK(kv.at("model") == "mueller");
  CHECK(std::stod(kv.at("rho_ab_mc")) == doctest::Approx(2.43e-4));
  CHECK(std::stod(kv.at("nu_crossover")) == doctest::Approx(2.43e-4 / 5.05e-2).epsilon(1e-14));
}
