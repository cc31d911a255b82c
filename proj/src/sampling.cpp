#include "tpt/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace tpt {

// ---------------------------------------------------------------------------
// BiasField
// ---------------------------------------------------------------------------

double BiasField::value(double x, double y) const {
  double v = 0;
  for (const auto& g : gs) {
    const double dx = x - g.cx, dy = y - g.cy;
    v += g.w * std::exp(-dx * dx / (2 * g.s1 * g.s1) - dy * dy / (2 * g.s2 * g.s2));
  }
  return v;
}

void BiasField::add_grad(double x, double y, double& gx, double& gy) const {
  for (const auto& g : gs) {
    const double dx = x - g.cx, dy = y - g.cy;
    const double e = g.w * std::exp(-dx * dx / (2 * g.s1 * g.s1) - dy * dy / (2 * g.s2 * g.s2));
    gx += -e * dx / (g.s1 * g.s1);
    gy += -e * dy / (g.s2 * g.s2);
  }
}

ExtraPotential BiasField::as_extra(int dim) const {
  ExtraPotential e;
  e.value = [this](CVecRef x) { return value(x[0], x[1]); };
  e.grad = [this, dim](CVecRef x, Vec& g) {
    g.setZero(dim);
    add_grad(x[0], x[1], g[0], g[1]);
  };
  return e;
}

ExtraDrift BiasField::as_extra_drift(int dim) const {
  return [this, dim](CVecRef x, Vec& out) {
    out.setZero(dim);
    double gx = 0, gy = 0;
    add_grad(x[0], x[1], gx, gy);
    out[0] = -gx;  // repulsive bias enters the drift with a minus sign
    out[1] = -gy;
  };
}

void BiasField::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw MissingArtifact("cannot write " + path);
  f.precision(17);
  f << "x1,x2,w,s1,s2\n";
  for (const auto& g : gs) f << g.cx << "," << g.cy << "," << g.w << "," << g.s1 << "," << g.s2 << "\n";
}

BiasField BiasField::load(const std::string& path) {
  BiasField b;
  for (const auto& row : read_csv(path)) {
    if (row.size() != 5) throw ConfigError("bad bias file row in " + path);
    b.gs.push_back({row[0], row[1], row[2], row[3], row[4]});
  }
  return b;
}

std::pair<BiasField, std::vector<Vec>> run_metadynamics(const DynamicsModel& model,
                                                        const MetadOptions& opt) {
  if (model.kind != DynamicsModel::Kind::OverdampedIso)
    throw NumericalFailure("biased exploration requires isotropic overdamped dynamics");
  BiasField bias;
  bias.gs.reserve(opt.n_g);
  Rng rng(opt.seed);
  // start from the reactant center, zero in any projected-out coordinates
  Vec x = Vec::Zero(model.dim);
  x.head(model.region_a.center().size()) = model.region_a.center();

  Vec noise(model.noise_rank), b(model.dim), kick(model.dim);
  Mat sig;
  model.sigma(x, sig);
  const double sqrt_dt = std::sqrt(opt.dt);
  auto one_step = [&]() {
    for (int i = 0; i < model.noise_rank; ++i) noise[i] = rng.normal();
    model.drift(x, b);
    double gx = 0, gy = 0;
    bias.add_grad(x[0], x[1], gx, gy);
    b[0] -= gx;
    b[1] -= gy;
    kick.noalias() = sig * noise;
    x += opt.dt * b + sqrt_dt * kick;
    if (!x.allFinite()) throw NumericalFailure("biased trajectory diverged");
  };

  for (int g = 0; g < opt.n_g; ++g) {
    for (long s = 0; s < opt.deposit_stride; ++s) one_step();
    bias.gs.push_back({x[0], x[1], opt.w, opt.s1, opt.s2});
  }
  std::vector<Vec> cloud;
  cloud.reserve(static_cast<std::size_t>(opt.post_steps / std::max<long>(1, opt.record_stride)) + 1);
  for (long s = 0; s < opt.post_steps; ++s) {
    one_step();
    if ((s + 1) % opt.record_stride == 0) cloud.push_back(x);
  }
  return {std::move(bias), std::move(cloud)};
}

// ---------------------------------------------------------------------------
// spacing subsample
// ---------------------------------------------------------------------------

std::vector<int> delta_net_keep(const std::vector<Vec>& points, double delta) {
  const std::size_t n = points.size();
  std::vector<int> kept;
  if (n == 0) return kept;
  if (delta <= 0) {
    kept.resize(n);
    for (std::size_t i = 0; i < n; ++i) kept[i] = static_cast<int>(i);
    return kept;
  }
  // cell index over the first two coordinates (or one, in 1D); any pair
  // within delta in full dimension is within delta in this projection
  const int pd = points[0].size() >= 2 ? 2 : 1;
  double xmin = points[0][0], ymin = pd > 1 ? points[0][1] : 0;
  for (const auto& p : points) {
    xmin = std::min(xmin, p[0]);
    if (pd > 1) ymin = std::min(ymin, p[1]);
  }
  std::map<std::pair<long, long>, std::vector<int>> grid;
  auto cell_of = [&](const Vec& p) {
    return std::make_pair(static_cast<long>((p[0] - xmin) / delta),
                          pd > 1 ? static_cast<long>((p[1] - ymin) / delta) : 0L);
  };
  const double d2 = delta * delta;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [ci, cj] = cell_of(points[i]);
    bool discard = false;
    for (long a = ci - 1; a <= ci + 1 && !discard; ++a) {
      for (long b = cj - 1; b <= cj + 1 && !discard; ++b) {
        auto it = grid.find({a, b});
        if (it == grid.end()) continue;
        for (int k : it->second) {
          if ((points[k] - points[i]).squaredNorm() < d2) {
            discard = true;
            break;
          }
        }
      }
    }
    if (!discard) {
      kept.push_back(static_cast<int>(i));
      grid[{ci, cj}].push_back(static_cast<int>(i));
    }
  }
  return kept;
}

std::vector<Vec> delta_net(const std::vector<Vec>& points, double delta) {
  std::vector<Vec> out;
  for (int i : delta_net_keep(points, delta)) out.push_back(points[i]);
  return out;
}

// ---------------------------------------------------------------------------
// boundary distribution
// ---------------------------------------------------------------------------

std::size_t BoundaryDistribution::sample(Rng& rng) const {
  const double u = rng.uniform();
  double acc = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

void BoundaryDistribution::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw MissingArtifact("cannot write " + path);
  f.precision(17);
  f << "index,weight";
  for (int j = 0; j < points[0].size(); ++j) f << ",x" << j + 1;
  f << "\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    f << i << "," << weights[i];
    for (int j = 0; j < points[i].size(); ++j) f << "," << points[i][j];
    f << "\n";
  }
}

BoundaryDistribution boundary_distribution(const CommittorFn& committor, const Region& region_a,
                                           const DynamicsModel& model, int n_points, double dr) {
  BoundaryDistribution out;
  out.points.reserve(n_points);
  out.weights.resize(n_points);
  Vec grad;
  double wsum = 0;
  for (int i = 0; i < n_points; ++i) {
    Vec x = region_a.surface_point(static_cast<double>(i) / n_points, dr);
    const Vec n = region_a.outward_normal(x);
    committor.value_grad(x, grad);
    const double w = std::exp(-model.energy_exponent(x)) * std::fabs(n.dot(grad));
    out.points.push_back(std::move(x));
    out.weights[i] = w;
    wsum += w;
  }
  if (!(wsum > 0))
    throw NumericalFailure("all boundary weights vanish (flat committor near the reactant set)");
  for (double& w : out.weights) w /= wsum;
  return out;
}

// ---------------------------------------------------------------------------
// transition-path ensemble
// ---------------------------------------------------------------------------

IntervalStats CrossoverStats::interval() const {
  if (taus.size() < 2) {
    IntervalStats s;
    s.n = static_cast<int>(taus.size());
    s.mean = taus.empty() ? 0 : taus[0];
    s.lo = s.hi = s.mean;  // degenerate
    return s;
  }
  return confidence_interval(taus, alpha);
}

void CrossoverStats::save_csv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw MissingArtifact("cannot write " + path);
  f.precision(17);
  f << "sample_index,tau\n";
  for (std::size_t i = 0; i < taus.size(); ++i) f << i << "," << taus[i] << "\n";
  const auto s = interval();
  std::ofstream g(path + ".summary");
  g.precision(17);
  g << "mean,se,ci_lo,ci_hi,excluded\n";
  g << s.mean << "," << s.se << "," << s.lo << "," << s.hi << "," << excluded + max_step_runs
    << "\n";
}

CrossoverStats sample_transition_ensemble(const DynamicsModel& model, const Controller& controller,
                                          const StartSampler& start, const EnsembleOptions& opt) {
  CrossoverStats stats;
  stats.alpha = opt.alpha;
  Rng base(opt.seed);
  SimulateOptions sim;
  sim.dt = opt.dt;
  sim.max_steps = opt.max_steps;
  sim.use_mala = opt.use_mala;
  for (int i = 0; i < opt.n; ++i) {
    Rng rng = base.stream(static_cast<std::uint64_t>(i));
    Vec x0 = start(static_cast<std::size_t>(i), rng);
    auto rec = simulate_until(model, &controller, x0, model.region_a, model.region_b, sim, rng);
    switch (rec.cause) {
      case StopCause::EnteredB:
        stats.taus.push_back(rec.crossover_time());
        break;
      case StopCause::EnteredA:
        ++stats.excluded;
        break;
      case StopCause::MaxSteps:
        ++stats.max_step_runs;
        break;
    }
  }
  if (stats.attempted() > 0 && stats.excluded_fraction() > 0.5)
    throw NumericalFailure("more than half of the controlled runs fell back into the reactant set");
  return stats;
}

StartSampler starts_from_distribution(const BoundaryDistribution& dist) {
  return [&dist](std::size_t, Rng& rng) { return dist.points[dist.sample(rng)]; };
}

Vec lift_cv_point(const DynamicsModel& lj7, CVecRef z_cv, double kappa, long burn_in, double dt,
                  Rng& rng) {
  static const Vec start = lj7_minimum_trapezoid();
  const double band = kappa > 0 ? 3.0 / std::sqrt(kappa / lj7.noise) : 1e300;

  ExtraPotential restraint;
  restraint.value = [&](CVecRef x) {
    double mu2, mu3;
    CvMap::eval(x, mu2, mu3);
    const double d1 = mu2 - z_cv[0], d2 = mu3 - z_cv[1];
    return 0.5 * kappa * (d1 * d1 + d2 * d2);
  };
  restraint.grad = [&](CVecRef x, Vec& g) {
    double mu2, mu3;
    Mat jac;
    CvMap::eval_jac(x, mu2, mu3, jac);
    g = kappa * ((mu2 - z_cv[0]) * jac.row(0).transpose() + (mu3 - z_cv[1]) * jac.row(1).transpose());
  };

  for (int attempt = 0; attempt < 5; ++attempt) {
    Vec x = start;
    for (long s = 0; s < burn_in; ++s) x = mala_step(lj7, kappa > 0 ? &restraint : nullptr, x, dt, rng).first;
    if (kappa <= 0) return x;
    double mu2, mu3;
    CvMap::eval(x, mu2, mu3);
    const double dist = std::hypot(mu2 - z_cv[0], mu3 - z_cv[1]);
    if (dist <= band) return x;
  }
  throw NumericalFailure("restrained lift failed to reach the requested reduced-space point");
}

// ---------------------------------------------------------------------------
// long unbiased runs
// ---------------------------------------------------------------------------

double BruteForceResult::mean_tau() const {
  if (taus.empty()) return 0;
  double s = 0;
  for (double t : taus) s += t;
  return s / taus.size();
}

BruteForceResult brute_force_run(const DynamicsModel& model, CVecRef start,
                                 const BruteForceOptions& opt) {
  BruteForceResult res;
  Rng rng(opt.seed);
  Vec x = start;
  Vec noise(model.noise_rank), b(model.dim), kick(model.dim);
  Mat sig;
  const bool const_sigma = model.kind != DynamicsModel::Kind::OverdampedMobility;
  if (const_sigma) model.sigma(x, sig);
  const double sqrt_dt = std::sqrt(opt.dt);
  long accepted = 0;

  int last = 0;  // 0 unknown, 1 last hit A, 2 last hit B
  if (model.region_a.contains_closed(x)) last = 1;
  if (model.region_b.contains_closed(x)) last = 2;
  double exit_a_time = 0;

  for (long s = 0; s < opt.steps; ++s) {
    if (opt.use_mala) {
      auto [y, ok] = mala_step(model, nullptr, x, opt.dt, rng);
      x = std::move(y);
      accepted += ok ? 1 : 0;
    } else {
      for (int i = 0; i < model.noise_rank; ++i) noise[i] = rng.normal();
      model.drift(x, b);
      if (!const_sigma) model.sigma(x, sig);
      kick.noalias() = sig * noise;
      x += opt.dt * b + sqrt_dt * kick;
      if (!x.allFinite()) throw NumericalFailure("time step produced a non-finite state");
    }
    if (!opt.reflect.empty()) {
      for (int i = 0; i < model.dim; ++i) {
        const auto [lo, hi] = opt.reflect[i];
        while (x[i] < lo || x[i] > hi) {
          if (x[i] < lo) x[i] = 2 * lo - x[i];
          if (x[i] > hi) x[i] = 2 * hi - x[i];
        }
      }
    }
    const double t = (s + 1) * opt.dt;
    if (model.region_a.contains_closed(x)) {
      // exit time from the reactant set = last time found inside it
      last = 1;
      exit_a_time = t;
    } else if (model.region_b.contains_closed(x)) {
      if (last == 1) {
        res.n_ab += 1;
        const double tau = t - exit_a_time;
        res.taus.push_back(tau);
        res.t_reactive += tau;
      }
      last = 2;
    }
  }
  res.steps = opt.steps;
  res.t_total = opt.steps * opt.dt;
  res.mala_acceptance = opt.use_mala ? static_cast<double>(accepted) / opt.steps : 0.0;
  return res;
}

}  // namespace tpt
