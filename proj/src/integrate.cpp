#include "tpt/integrate.hpp"

#include <cmath>

namespace tpt {

void Controller::drift(const DynamicsModel& m, CVecRef x, Vec& out) const {
  Vec grad;
  const double q = committor->value_grad(x, grad);
  out.setZero(m.dim);
  if (!(q > eps_q)) return;  // floored: log max(q,eps) is locally constant
  switch (m.kind) {
    case DynamicsModel::Kind::OverdampedIso:
      out = (2.0 * m.noise / q) * grad;
      break;
    case DynamicsModel::Kind::OverdampedMobility: {
      Mat mob;
      m.mobility(x, mob);
      out = (2.0 * m.noise / q) * (mob * grad);
      break;
    }
    case DynamicsModel::Kind::Langevin:
      // noise lives in the momentum subspace only
      out[1] = 2.0 * m.gamma * m.noise * m.mass * grad[1] / q;
      break;
  }
  const double n = out.norm();
  if (n > c_max) out *= c_max / n;
}

ExtraPotential Controller::tilt(const DynamicsModel& m) const {
  if (m.kind == DynamicsModel::Kind::Langevin)
    throw NumericalFailure("controller tilt potential is defined for overdamped models only");
  const double two_beta_inv = 2.0 * m.noise;
  const CommittorFn* q = committor;
  const double eps = eps_q;
  ExtraPotential u;
  u.value = [q, eps, two_beta_inv](CVecRef x) {
    return -two_beta_inv * std::log(std::max(q->value(x), eps));
  };
  u.grad = [q, eps, two_beta_inv, d = m.dim](CVecRef x, Vec& g) {
    Vec qg;
    const double qv = q->value_grad(x, qg);
    if (qv > eps) {
      g = (-two_beta_inv / qv) * qg;
    } else {
      g.setZero(d);
    }
  };
  return u;
}

ExtraDrift Controller::as_extra_drift(const DynamicsModel& m) const {
  return [this, &m](CVecRef x, Vec& out) { drift(m, x, out); };
}

Vec em_step(const DynamicsModel& m, const ExtraDrift& extra, CVecRef state, double dt,
            CVecRef noise) {
  Vec b(m.dim);
  m.drift(state, b);
  if (extra) {
    Vec e;
    extra(state, e);
    b += e;
  }
  Mat sig;
  m.sigma(state, sig);
  Vec out = state + dt * b + std::sqrt(dt) * (sig * noise);
  if (!out.allFinite()) {
    throw NumericalFailure("time step produced a non-finite state");
  }
  return out;
}

std::pair<Vec, bool> mala_step(const DynamicsModel& m, const ExtraPotential* extra, CVecRef state,
                               double dt, Rng& rng) {
  if (m.kind != DynamicsModel::Kind::OverdampedIso)
    throw NumericalFailure("metropolis-adjusted steps require isotropic overdamped dynamics");
  const double beta_inv = m.noise;
  const double beta = 1.0 / beta_inv;

  thread_local Vec g, ge, bx, by, noise;
  auto eff = [&](CVecRef x, Vec& minus_grad) -> double {
    double v = m.potential(x, &g);
    if (extra) {
      v += extra->value(x);
      extra->grad(x, ge);
      g += ge;
    }
    minus_grad = -g;
    return v;
  };

  const double vx = eff(state, bx);
  noise.resize(m.dim);
  for (int i = 0; i < m.dim; ++i) noise[i] = rng.normal();
  Vec y = state + dt * bx + std::sqrt(2.0 * beta_inv * dt) * noise;
  if (!y.allFinite()) return {Vec(state), false};

  double vy;
  try {
    vy = eff(y, by);
  } catch (const NumericalFailure&) {
    return {Vec(state), false};
  }
  if (!std::isfinite(vy) || !by.allFinite()) return {Vec(state), false};

  const double denom = 4.0 * beta_inv * dt;
  const double fwd = (y - state - dt * bx).squaredNorm();
  const double bwd = (state - y - dt * by).squaredNorm();
  const double log_alpha = -beta * (vy - vx) + (fwd - bwd) / denom;
  if (log_alpha >= 0 || std::log(1.0 - rng.uniform()) < log_alpha) {
    return {std::move(y), true};
  }
  return {Vec(state), false};
}

TrajectoryRecord simulate_until(const DynamicsModel& m, const Controller* controller, CVecRef start,
                                const Region& a, const Region& b, const SimulateOptions& opt,
                                Rng& rng) {
  TrajectoryRecord rec;
  rec.dt = opt.dt;
  rec.seed = rng.seed();
  Vec x = start;
  rec.states.push_back(x);
  rec.state_steps.push_back(0);

  ExtraDrift extra;
  ExtraPotential tilt;
  if (controller) {
    if (opt.use_mala) {
      tilt = controller->tilt(m);
    } else {
      extra = controller->as_extra_drift(m);
    }
  }

  // constant diffusion factors are evaluated once
  Mat sig;
  const bool const_sigma = m.kind != DynamicsModel::Kind::OverdampedMobility;
  if (const_sigma) m.sigma(x, sig);
  const double sqrt_dt = std::sqrt(opt.dt);
  Vec noise(m.noise_rank), drift_buf(m.dim), extra_buf(m.dim), kick(m.dim);

  long step = 0;
  long last_stored = 0;
  for (; step < opt.max_steps;) {
    if (opt.use_mala) {
      auto [y, ok] = mala_step(m, controller ? &tilt : nullptr, x, opt.dt, rng);
      (void)ok;
      x = std::move(y);
    } else {
      for (int i = 0; i < m.noise_rank; ++i) noise[i] = rng.normal();
      m.drift(x, drift_buf);
      if (extra) {
        extra(x, extra_buf);
        drift_buf += extra_buf;
      }
      if (!const_sigma) m.sigma(x, sig);
      kick.noalias() = sig * noise;
      x += opt.dt * drift_buf + sqrt_dt * kick;
      if (!x.allFinite()) throw NumericalFailure("time step produced a non-finite state");
    }
    ++step;
    if (opt.thinning > 0 && step % opt.thinning == 0) {
      rec.states.push_back(x);
      rec.state_steps.push_back(step);
      last_stored = step;
    }
    if (a.contains_closed(x)) {
      rec.cause = StopCause::EnteredA;
      break;
    }
    if (b.contains_closed(x)) {
      rec.cause = StopCause::EnteredB;
      break;
    }
  }
  rec.steps = step;
  if (last_stored != step) {
    rec.states.push_back(x);
    rec.state_steps.push_back(step);
  }
  return rec;
}

void write_trajectory_csv(const std::string& path, const TrajectoryRecord& t, int dim) {
  std::ofstream f(path);
  if (!f) throw MissingArtifact("cannot write " + path);
  f.precision(17);
  const char* cause = t.cause == StopCause::EnteredA   ? "entered-A"
                      : t.cause == StopCause::EnteredB ? "entered-B"
                                                       : "max-steps";
  f << "# stop_cause=" << cause << " seed=" << t.seed << " steps=" << t.steps << "\n";
  f << "t";
  for (int j = 0; j < dim; ++j) f << ",x" << j + 1;
  f << "\n";
  for (std::size_t i = 0; i < t.states.size(); ++i) {
    f << t.state_steps[i] * t.dt;
    for (int j = 0; j < dim; ++j) f << "," << t.states[i][j];
    f << "\n";
  }
}

}  // namespace tpt

