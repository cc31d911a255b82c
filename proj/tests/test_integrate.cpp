#include <doctest.h>

#include <cmath>

#include "tpt/estimators.hpp"
#include "tpt/integrate.hpp"
#include "tpt/models.hpp"

using namespace tpt;

namespace {

// 1D driftless diffusion with unit noise, built as a user model
DynamicsModel brownian_1d() {
  DynamicsModel m;
  m.kind = DynamicsModel::Kind::OverdampedIso;
  m.name = "brownian_1d";
  m.dim = 1;
  m.noise_rank = 1;
  m.noise = 0.5;  // sqrt(2 beta^{-1}) = 1
  m.reversible = true;
  m.potential = [](CVecRef, Vec* g) {
    if (g) g->setZero(1);
    return 0.0;
  };
  m.drift = [](CVecRef, Vec& b) { b.setZero(1); };
  m.sigma = [](CVecRef, Mat& s) { s = Mat::Identity(1, 1); };
  m.energy_exponent = [](CVecRef) { return 0.0; };
  m.region_a = Region::halfspace((Vec(1) << 1.0).finished(), 0.0);    // x <= 0
  m.region_b = Region::halfspace((Vec(1) << -1.0).finished(), -1.0);  // x >= 1
  return m;
}

}  // namespace

TEST_CASE("euler step identities") {
  auto m = make_model("duffing", {{{"eps", 0.1}}, {}});
  Vec x(2);
  x << 1.0, 0.0;
  Vec zero_noise = Vec::Zero(1);
  // equilibrium with zero noise stays put
  Vec y = em_step(m, nullptr, x, 1e-3, zero_noise);
  CHECK((y - x).norm() == 0.0);

  auto mm = make_model("mueller", {{{"beta_inv", 10.0}}, {}});
  Vec x0(2);
  x0 << 0.0, 0.5;
  Vec n2(2);
  n2 << 1.0, 1.0;
  const double dt = 1e-5;
  Vec grad;
  mm.potential(x0, &grad);
  Vec expect = x0 - grad * dt + std::sqrt(2.0 * 10.0 * dt) * n2;
  Vec got = em_step(mm, nullptr, x0, dt, n2);
  CHECK((got - expect).norm() <= 1e-14 * expect.norm());

  // affine in the noise vector (up to last-ulp rounding of the additions)
  Vec na(2), nb(2);
  na << 0.3, -0.7;
  nb << -1.1, 0.2;
  Vec s_ab = em_step(mm, nullptr, x0, dt, na + nb);
  Vec s_b = em_step(mm, nullptr, x0, dt, nb);
  Vec s_a = em_step(mm, nullptr, x0, dt, na);
  Vec s_0 = em_step(mm, nullptr, x0, dt, Vec::Zero(2));
  CHECK(((s_ab - s_b) - (s_a - s_0)).norm() <= 1e-14 * x0.norm() + 1e-16);
}

TEST_CASE("metropolis step: flat potential always accepts") {
  DynamicsModel m = brownian_1d();
  Rng rng(42);
  Vec x = Vec::Constant(1, 0.5);
  int accepted = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    auto [y, ok] = mala_step(m, nullptr, x, 1e-3, rng);
    x = y;
    accepted += ok;
  }
  CHECK(accepted == n);
}

TEST_CASE("metropolis step: 1d double well histogram matches the gibbs density") {
  DynamicsModel m;
  m.kind = DynamicsModel::Kind::OverdampedIso;
  m.dim = 1;
  m.noise_rank = 1;
  const double beta = 3.0;
  m.noise = 1.0 / beta;
  m.reversible = true;
  m.potential = [](CVecRef x, Vec* g) {
    const double s = x[0] * x[0] - 1.0;
    if (g) {
      g->resize(1);
      (*g)[0] = 4.0 * x[0] * s;
    }
    return s * s;
  };
  m.drift = [&m](CVecRef x, Vec& b) {
    m.potential(x, &b);
    b = -b;
  };
  m.sigma = [s = std::sqrt(2.0 / beta)](CVecRef, Mat& out) { out = s * Mat::Identity(1, 1); };
  m.energy_exponent = [beta, &m](CVecRef x) { return beta * m.potential(x, nullptr); };

  const double lo = -2.0, hi = 2.0;
  const int nbins = 50;
  std::vector<double> hist(nbins, 0.0);
  Rng rng(123);
  Vec x = Vec::Constant(1, 1.0);
  const long steps = 10000000;
  long burn = 10000;
  for (long s = 0; s < steps; ++s) {
    x = mala_step(m, nullptr, x, 1e-3, rng).first;
    if (s < burn) continue;
    if (x[0] > lo && x[0] < hi) hist[static_cast<int>((x[0] - lo) / (hi - lo) * nbins)] += 1.0;
  }
  double total = 0;
  for (double h : hist) total += h;
  // gibbs reference by quadrature on the same bins
  std::vector<double> ref(nbins);
  double z = 0;
  for (int i = 0; i < nbins; ++i) {
    const double a = lo + (hi - lo) * i / nbins;
    const double b = lo + (hi - lo) * (i + 1) / nbins;
    ref[i] = integrate(
        [&](double t) { return std::exp(-beta * (t * t - 1) * (t * t - 1)); }, a, b, 1e-12);
    z += ref[i];
  }
  double l1 = 0;
  for (int i = 0; i < nbins; ++i) l1 += std::fabs(hist[i] / total - ref[i] / z);
  CHECK(l1 <= 0.02);
}

TEST_CASE("controlled drift specializations") {
  // constant committor leaves the dynamics unchanged
  auto mm = make_model("mueller", {{{"beta_inv", 10.0}}, {}});
  AnalyticCommittor flat(2, [](CVecRef, Vec& g) {
    g.setZero(2);
    return 0.37;
  });
  Controller ctl;
  ctl.committor = &flat;
  Vec x(2), out;
  x << 0.1, 0.9;
  ctl.drift(mm, x, out);
  CHECK(out.norm() == 0.0);

  // harmonic committor between two circles: drift 2 grad(q)/q with radial
  // gradient of magnitude 1/(r ln(rB/rA)) for unit beta and sigma = sqrt(2) I
  DynamicsModel iso;
  iso.kind = DynamicsModel::Kind::OverdampedIso;
  iso.dim = 2;
  iso.noise_rank = 2;
  iso.noise = 1.0;
  iso.reversible = true;
  iso.potential = [](CVecRef, Vec* g) {
    if (g) g->setZero(2);
    return 0.0;
  };
  iso.drift = [](CVecRef, Vec& b) { b.setZero(2); };
  iso.sigma = [](CVecRef, Mat& s) { s = std::sqrt(2.0) * Mat::Identity(2, 2); };
  iso.energy_exponent = [](CVecRef) { return 0.0; };
  const double ra = 1.0, rb = 2.0;
  AnalyticCommittor annulus(2, [&](CVecRef p, Vec& g) {
    const double r = p.norm();
    const double lg = std::log(rb / ra);
    g = p / (r * r * lg);
    return std::log(r / ra) / lg;
  });
  Controller c2;
  c2.committor = &annulus;
  Vec p(2);
  p << 1.2, 0.9;  // r = 1.5
  c2.drift(iso, p, out);
  const double r = p.norm();
  const double q = std::log(r / ra) / std::log(rb / ra);
  const double gmag = 1.0 / (r * std::log(rb / ra));
  CHECK(out.norm() == doctest::Approx(2.0 * gmag / q).epsilon(1e-12));
  // direction is radial
  Vec radial = p / p.norm();
  CHECK((out - out.dot(radial) * radial).norm() <= 1e-14);

  // floored committor: zero correction, bounded magnitude
  AnalyticCommittor tiny(2, [](CVecRef, Vec& g) {
    g.setConstant(2, 1e3);
    return 5e-13;
  });
  Controller c3;
  c3.committor = &tiny;
  c3.drift(iso, p, out);
  CHECK(out.norm() == 0.0);  // below the floor the log is locally constant
  CHECK(out.norm() <= c3.c_max);

  // momentum-only correction for the underdamped oscillator
  auto duf = make_model("duffing", {{{"eps", 0.1}}, {}});
  AnalyticCommittor lin(2, [](CVecRef xp, Vec& g) {
    g.resize(2);
    g << 0.3, 0.5;
    return 0.25 + 0.1 * xp[0];
  });
  Controller c4;
  c4.committor = &lin;
  Vec xp(2);
  xp << 0.0, 0.0;
  c4.drift(duf, xp, out);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == doctest::Approx(2.0 * 0.5 * 0.1 * 1.0 * 0.5 / 0.25));
}

TEST_CASE("simulate_until stopping") {
  DynamicsModel m = brownian_1d();
  // zero allowed steps: immediate max-steps stop with zero crossover time
  SimulateOptions opt;
  opt.dt = 1e-4;
  opt.max_steps = 0;
  Rng rng(1);
  Vec start = Vec::Constant(1, 0.5);
  auto rec = simulate_until(m, nullptr, start, m.region_a, m.region_b, opt, rng);
  CHECK(rec.cause == StopCause::MaxSteps);
  CHECK(rec.steps == 0);
  CHECK(rec.crossover_time() == 0.0);

  // gambler's ruin: hit probability equals the start position
  auto hit_fraction = [&](double x0, int n_runs, std::uint64_t seed) {
    SimulateOptions o;
    o.dt = 1e-4;
    o.max_steps = 10000000;
    Rng base(seed);
    int hit_b = 0;
    for (int i = 0; i < n_runs; ++i) {
      Rng r = base.stream(i);
      auto t = simulate_until(m, nullptr, Vec::Constant(1, x0), m.region_a, m.region_b, o, r);
      REQUIRE(t.cause != StopCause::MaxSteps);
      hit_b += t.cause == StopCause::EnteredB;
    }
    return static_cast<double>(hit_b) / n_runs;
  };
  CHECK(hit_fraction(0.5, 100000, 7) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(hit_fraction(0.3, 100000, 8) == doctest::Approx(0.3).epsilon(0.033));

  // determinism: identical seeds give bit-identical trajectories
  SimulateOptions o2;
  o2.dt = 1e-4;
  o2.max_steps = 100000;
  o2.thinning = 10;
  Rng ra(99), rb2(99);
  auto t1 = simulate_until(m, nullptr, start, m.region_a, m.region_b, o2, ra);
  auto t2 = simulate_until(m, nullptr, start, m.region_a, m.region_b, o2, rb2);
  REQUIRE(t1.states.size() == t2.states.size());
  CHECK(t1.steps == t2.steps);
  for (std::size_t i = 0; i < t1.states.size(); ++i)
    CHECK((t1.states[i] - t2.states[i]).norm() == 0.0);

  // final state satisfies the stop-cause predicate
  CHECK(((t1.cause == StopCause::EnteredA && m.region_a.contains_closed(t1.states.back())) ||
         (t1.cause == StopCause::EnteredB && m.region_b.contains_closed(t1.states.back())) ||
         t1.cause == StopCause::MaxSteps));
}
