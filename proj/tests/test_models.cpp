#include <doctest.h>

#include <cmath>

#include "tpt/models.hpp"
#include "tpt/rng.hpp"

using namespace tpt;

namespace {

// independent term-by-term evaluation of the four-exponential 2D potential
double mueller_direct(double x1, double x2) {
  const double a[4] = {-1, -1, -6.5, 0.7};
  const double b[4] = {0, 0, 11, 0.6};
  const double c[4] = {-10, -10, -6.5, 0.7};
  const double D[4] = {-200, -100, -170, 15};
  const double X[4] = {1, 0, -0.5, -1};
  const double Y[4] = {0, 0.5, 1.5, 1};
  double v = 0;
  for (int i = 0; i < 4; ++i)
    v += D[i] * std::exp(a[i] * (x1 - X[i]) * (x1 - X[i]) + b[i] * (x1 - X[i]) * (x2 - Y[i]) +
                         c[i] * (x2 - Y[i]) * (x2 - Y[i]));
  return v;
}

Vec finite_diff_grad(const std::function<double(CVecRef)>& f, const Vec& x, double rel = 1e-6) {
  Vec g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    const double h = rel * std::max(1.0, std::fabs(x[i]));
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("mueller model basics") {
  auto m = make_model("mueller", {{{"beta_inv", 10.0}}, {}});
  CHECK(m.dim == 2);
  CHECK(m.noise_rank == 2);
  CHECK(m.reversible);

  // the two deepest minima sit inside the benchmark regions
  Vec a = m.region_a.center();
  // local descent from the reactant center converges to a stationary point
  Vec x = a;
  for (int it = 0; it < 200000; ++it) {
    Vec g;
    m.potential(x, &g);
    if (g.norm() < 1e-9) break;
    x -= 1e-4 * g;
  }
  Vec g;
  m.potential(x, &g);
  CHECK(g.norm() <= 1e-8);
  CHECK((x - a).norm() < 0.01);

  // independent evaluation at the origin
  Vec origin = Vec::Zero(2);
  CHECK(m.potential(origin, nullptr) == doctest::Approx(mueller_direct(0, 0)).epsilon(1e-14));

  // drift equals the negative potential gradient pointwise
  Rng rng(7);
  for (int k = 0; k < 100; ++k) {
    Vec p(2);
    p << 3 * rng.uniform() - 1.8, 3 * rng.uniform() - 0.6;
    Vec grad, b;
    m.potential(p, &grad);
    m.drift(p, b);
    CHECK((b + grad).norm() <= 1e-12 * std::max(1.0, grad.norm()));
    // analytic gradient vs central differences
    Vec fd = finite_diff_grad([&](CVecRef y) { return m.potential(y, nullptr); }, p);
    CHECK((grad - fd).norm() <= 1e-5 * std::max(1.0, grad.norm()));
  }

  // invariant-density exponent is beta V
  Vec p(2);
  p << 0.1, 0.7;
  CHECK(m.energy_exponent(p) == doctest::Approx(0.1 * m.potential(p, nullptr)).epsilon(1e-14));
}

TEST_CASE("rugged 10d potential reduces to the 2d one on the sine lattice") {
  auto m = make_model("rugged_mueller_10d", {{{"beta_inv", 10.0}}, {}});
  auto m2 = make_model("mueller", {{{"beta_inv", 10.0}}, {}});
  CHECK(m.dim == 10);
  // at multiples of 1/(2k) the oscillatory factor vanishes
  const double k = 5;
  for (int i = -3; i <= 3; ++i) {
    for (int j = -3; j <= 3; ++j) {
      Vec x = Vec::Zero(10);
      x[0] = i / (2 * k);
      x[1] = j / (2 * k);
      Vec x2(2);
      x2 << x[0], x[1];
      CHECK(m.potential(x, nullptr) ==
            doctest::Approx(m2.potential(x2, nullptr)).epsilon(1e-10));
    }
  }
  // gradient matches central differences
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    Vec x(10);
    for (int i = 0; i < 10; ++i) x[i] = 0.2 * (rng.uniform() - 0.5);
    x[0] += 0.2;
    x[1] += 0.6;
    Vec g;
    m.potential(x, &g);
    Vec fd = finite_diff_grad([&](CVecRef y) { return m.potential(y, nullptr); }, x);
    CHECK((g - fd).norm() <= 1e-5 * std::max(1.0, g.norm()));
  }
}

TEST_CASE("duffing oscillator drift and diffusion") {
  auto m = make_model("duffing", {{{"eps", 0.1}, {"gamma", 0.5}, {"m", 1.0}}, {}});
  CHECK(m.dim == 2);
  CHECK(m.noise_rank == 1);
  CHECK(!m.reversible);

  // stable equilibrium
  Vec x(2);
  x << 1.0, 0.0;
  Vec b;
  m.drift(x, b);
  CHECK(b.norm() == doctest::Approx(0.0));

  // drift (p/m, -V' - gamma p) exactly
  x << -0.3, 0.8;
  m.drift(x, b);
  CHECK(b[0] == doctest::Approx(0.8));
  CHECK(b[1] == doctest::Approx(-(-0.3) * (0.09 - 1.0) - 0.5 * 0.8));

  // diffusion factor is the constant column (0, sqrt(2 gamma eps m))
  Mat sig;
  m.sigma(x, sig);
  CHECK(sig.rows() == 2);
  CHECK(sig.cols() == 1);
  CHECK(sig(0, 0) == 0.0);
  CHECK(sig(1, 0) == doctest::Approx(std::sqrt(2.0 * 0.5 * 0.1 * 1.0)));

  // energy exponent H / eps
  CHECK(m.energy_exponent(x) ==
        doctest::Approx((0.5 * 0.8 * 0.8 + 0.25 * (0.09 - 1) * (0.09 - 1)) / 0.1));
}

TEST_CASE("cluster potential: pair minimum, invariances, singularity guard") {
  // pair term at its minimum separation
  Vec x(14);
  x.setZero();
  const double rmin = std::pow(2.0, 1.0 / 6.0);
  x[2] = rmin;  // two particles at distance 2^(1/6), the rest spread far out
  for (int i = 2; i < 7; ++i) {
    x[2 * i] = 1e4 * (i + 1);
    x[2 * i + 1] = -1e4 * (i + 1);
  }
  Vec g;
  const double v = lj7_potential(x, &g);
  // the isolated pair contributes -1 with zero force at the minimum
  CHECK(v == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::fabs(g[0]) < 1e-10);

  auto m = make_model("lj7_cartesian", {{{"beta", 5.0}}, {}});
  Rng rng(11);
  Vec cfg = lj7_minimum_hexagon();
  // rigid translation invariance
  Vec shifted = cfg;
  for (int i = 0; i < 7; ++i) {
    shifted[2 * i] += 1.234;
    shifted[2 * i + 1] -= 0.777;
  }
  CHECK(m.potential(shifted, nullptr) == doctest::Approx(m.potential(cfg, nullptr)).epsilon(1e-10));
  // permutation invariance
  Vec perm = cfg;
  std::swap(perm[0], perm[4]);
  std::swap(perm[1], perm[5]);
  CHECK(m.potential(perm, nullptr) == doctest::Approx(m.potential(cfg, nullptr)).epsilon(1e-10));

  // gradient vs central differences at a well-separated random configuration
  for (int t = 0; t < 100; ++t) {
    Vec y = cfg;
    for (int i = 0; i < 14; ++i) y[i] += 0.05 * (rng.uniform() - 0.5);
    Vec grad;
    m.potential(y, &grad);
    Vec fd = finite_diff_grad([&](CVecRef z) { return m.potential(z, nullptr); }, y);
    CHECK((grad - fd).norm() <= 1e-5 * std::max(1.0, grad.norm()));
  }

  // overlapping particles raise
  Vec bad = cfg;
  bad[2] = bad[0] + 1e-9;
  bad[3] = bad[1];
  CHECK_THROWS_AS(lj7_potential(bad, nullptr), NumericalFailure);
}

TEST_CASE("collective variables of the cluster") {
  // all coordination numbers equal when particles are symmetric: coincident
  // points are excluded by the guard, so use the permutation-symmetry route
  double mu2, mu3;
  Vec hex = lj7_minimum_hexagon();
  CvMap::eval(hex, mu2, mu3);

  // permuting particle labels leaves the moments unchanged
  Vec perm = hex;
  std::swap(perm[2], perm[8]);
  std::swap(perm[3], perm[9]);
  double pmu2, pmu3;
  CvMap::eval(perm, pmu2, pmu3);
  CHECK(mu2 == doctest::Approx(pmu2).epsilon(1e-12));
  CHECK(mu3 == doctest::Approx(pmu3).epsilon(1e-12));

  // the hexagon minimum maps next to the product region in reduced space;
  // the region itself encloses the finite-temperature basin, whose center is
  // slightly offset from the zero-temperature image (0.747, 1.318)
  CHECK(mu2 == doctest::Approx(0.7472).epsilon(2e-3));
  CHECK(mu3 == doctest::Approx(1.3184).epsilon(2e-3));
  Vec bc(2);
  bc << 0.7184, 1.1607;
  Vec z(2);
  z << mu2, mu3;
  CHECK((z - bc).norm() < 0.2);

  // the trapezoid minimum lands inside (or at least near) the reactant region
  Vec trap = lj7_minimum_trapezoid();
  double tmu2, tmu3;
  CvMap::eval(trap, tmu2, tmu3);
  Vec zt(2);
  zt << tmu2, tmu3;
  Region a_cv = Region::ball((Vec(2) << 0.5526, -0.0935).finished(), 0.1);
  CHECK(a_cv.contains(zt));

  // Jacobian vs central differences at jiggled configurations with pair
  // distances at least 0.8
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    Vec y = t % 2 ? hex : trap;
    for (int i = 0; i < 14; ++i) y[i] += 0.04 * (rng.uniform() - 0.5);
    Mat jac;
    double a, b;
    CvMap::eval_jac(y, a, b, jac);
    Vec fd2 = finite_diff_grad(
        [&](CVecRef z2) {
          double u2, u3;
          CvMap::eval(z2, u2, u3);
          return u2;
        },
        y);
    Vec fd3 = finite_diff_grad(
        [&](CVecRef z2) {
          double u2, u3;
          CvMap::eval(z2, u2, u3);
          return u3;
        },
        y);
    CHECK((jac.row(0).transpose() - fd2).norm() <= 1e-6 * std::max(1.0, fd2.norm()));
    CHECK((jac.row(1).transpose() - fd3).norm() <= 1e-6 * std::max(1.0, fd3.norm()));
  }
}

TEST_CASE("mollified indicators") {
  Region ball = Region::ball((Vec(2) << 0.2, -0.3).finished(), 0.1);

  // center is deep inside
  CHECK(ball.indicator(ball.center()) >= 1.0 - 1e-6);

  // exactly on the inflated surface the indicator is one half
  Vec x = ball.center();
  x[0] += 0.1 + 0.02;
  CHECK(ball.indicator(x) == doctest::Approx(0.5).epsilon(1e-12));

  // far outside it vanishes: |x - c| >= r + 0.2 means the tanh argument is
  // at least 1000*((0.3)^2 - (0.12)^2) = 75.6
  x = ball.center();
  x[0] += 0.3;
  CHECK(ball.indicator(x) <= 1e-10);

  // indicator stays within [0,1] and matches membership of the inflated set
  Rng rng(2);
  for (int t = 0; t < 1000; ++t) {
    Vec p(2);
    p << 0.2 + 0.5 * (rng.uniform() - 0.5), -0.3 + 0.5 * (rng.uniform() - 0.5);
    const double chi = ball.indicator(p);
    CHECK(chi >= 0.0);
    CHECK(chi <= 1.0);
    const double d = (p - ball.center()).norm();
    if (std::fabs(d - 0.12) > 0.005) {
      CHECK((chi > 0.5) == (d < 0.12));
    }
  }

  // indicator gradients vs finite differences, ball and tilted ellipse
  Region ell = Region::ellipse((Vec(2) << 0.7184, 1.1607).finished(), 0.15, 0.03, 5 * M_PI / 12);
  for (int t = 0; t < 50; ++t) {
    Vec p(2);
    p << 0.7184 + 0.4 * (rng.uniform() - 0.5), 1.1607 + 0.4 * (rng.uniform() - 0.5);
    for (const Region* r : {&ball, &ell}) {
      Vec g;
      r->indicator_grad(p, g);
      Vec fd = finite_diff_grad([&](CVecRef y) { return r->indicator(y); }, p, 1e-7);
      CHECK((g - fd).norm() <= 1e-4 * std::max(1e-8, fd.norm()) + 1e-10);
    }
  }
}

TEST_CASE("tabulated-grid model") {
  // synthetic smooth tables exercise the interpolation and the drift assembly
  Grid2D g;
  g.n1 = 41;
  g.n2 = 31;
  g.x1min = 0.0;
  g.x1max = 1.2;
  g.x2min = -0.5;
  g.x2max = 1.5;
  auto fexact = [](double a, double b) { return 2.0 * a * a + 0.5 * b + 0.3 * a * b; };
  for (int j = 0; j < g.n2; ++j) {
    for (int i = 0; i < g.n1; ++i) {
      const double a = g.x1min + (g.x1max - g.x1min) * i / (g.n1 - 1);
      const double b = g.x2min + (g.x2max - g.x2min) * j / (g.n2 - 1);
      g.f.push_back(fexact(a, b));
      g.m11.push_back(1.0 + 0.1 * a);
      g.m12.push_back(0.05 * b);
      g.m22.push_back(0.8 + 0.05 * a * b);
    }
  }
  g.save("test_grid.txt");
  auto m = make_model("lj7_cv", {{{"beta", 5.0}}, {{"fgrid", "test_grid.txt"}}});
  CHECK(m.dim == 2);

  // bilinear interpolation reproduces values at nodes and is close between
  Vec x(2);
  x << 0.6, 0.5;
  CHECK(m.potential(x, nullptr) == doctest::Approx(fexact(0.6, 0.5)).epsilon(2e-3));

  // drift: -M grad F + beta^{-1} div M, checked against in-cell differences
  Vec b;
  m.drift(x, b);
  Mat mob;
  m.mobility(x, mob);
  Vec fg;
  m.potential(x, &fg);
  // div M for the synthetic tensor: d1 M11 + d2 M12 = 0.1 + 0.05; d1 M12 + d2 M22 = 0 + 0.05 a
  Vec expected = -(mob * fg);
  expected[0] += 0.2 * (0.1 + 0.05);
  expected[1] += 0.2 * (0.05 * 0.6);
  CHECK((b - expected).norm() <= 2e-2 * std::max(1.0, expected.norm()));

  // sigma sigma^T reproduces 2 beta^{-1} M
  Mat sig;
  m.sigma(x, sig);
  Mat ss = sig * sig.transpose();
  CHECK((ss - 0.4 * mob).norm() <= 1e-12);

  // missing grid errors
  CHECK_THROWS_AS(make_model("lj7_cv", {{{"beta", 5.0}}, {}}), MissingArtifact);
  CHECK_THROWS_AS(make_model("nope", {}), ConfigError);
  CHECK_THROWS_AS(make_model("mueller", {{{"beta_inv", -1.0}}, {}}), ConfigError);
}
