#include "tpt/neural_committor.hpp"

#include <cmath>

#include "tpt/rng.hpp"

namespace tpt {

double NeuralCommittor::value(CVecRef x) const {
  const double u = 1.0 - a_.indicator(x);
  const double v = 1.0 - b_.indicator(x);
  return u * (v * net_.value(x) + 1.0 - v);
}

double NeuralCommittor::value_grad(CVecRef x, Vec& grad) const {
  auto j = net_.jet(x, {});
  Vec du, dv;
  const double u = 1.0 - a_.indicator_grad(x, du);
  const double v = 1.0 - b_.indicator_grad(x, dv);
  du = -du;
  dv = -dv;
  grad = du * (v * j.value + 1.0 - v) + (u * (j.value - 1.0)) * dv + (u * v) * j.grad;
  return u * (v * j.value + 1.0 - v);
}

void NeuralCommittor::jet(CVecRef x, const std::vector<int>& dirs2, double& q, Vec& grad,
                          Vec& diag2) const {
  auto j = net_.jet(x, dirs2);
  Vec du, dv, d2u, d2v;
  double chi_a = a_.indicator_jet2(x, du, dirs2, d2u);
  double chi_b = b_.indicator_jet2(x, dv, dirs2, d2v);
  const double u = 1.0 - chi_a, v = 1.0 - chi_b;
  du = -du;
  dv = -dv;
  d2u = -d2u;
  d2v = -d2v;
  q = u * (v * j.value + 1.0 - v);
  grad = du * (v * j.value + 1.0 - v) + (u * (j.value - 1.0)) * dv + (u * v) * j.grad;
  diag2.resize(static_cast<Eigen::Index>(dirs2.size()));
  for (std::size_t k = 0; k < dirs2.size(); ++k) {
    const int t = dirs2[k];
    const Eigen::Index kk = static_cast<Eigen::Index>(k);
    diag2[kk] = d2u[kk] * (v * j.value + 1.0 - v) + u * d2v[kk] * (j.value - 1.0) +
                u * v * j.diag2[kk] + 2.0 * du[t] * dv[t] * (j.value - 1.0) +
                2.0 * du[t] * v * j.grad[t] + 2.0 * u * dv[t] * j.grad[t];
  }
}

// ---------------------------------------------------------------------------
// variational loss
// ---------------------------------------------------------------------------

double variational_loss_grad(const NeuralCommittor& nc, const DynamicsModel& model,
                             const std::vector<Vec>& batch, DensityWeight weight,
                             DenseNet::Grads& grads) {
  if (batch.empty()) throw NumericalFailure("empty training batch");
  const int d = nc.dim();
  const double inv_k = 1.0 / static_cast<double>(batch.size());
  const bool iso = model.kind != DynamicsModel::Kind::OverdampedMobility;
  DenseNet::Tape tape;
  Mat mob;
  Vec du(d), dv(d), qgrad(d), s(d), grad_bar(d);
  double loss = 0;
  for (std::size_t idx = 0; idx < batch.size(); ++idx) {
    const Vec& x = batch[idx];
    auto j = nc.net().jet(x, {}, &tape);
    const double chi_a = nc.region_a().indicator_grad(x, du);
    const double chi_b = nc.region_b().indicator_grad(x, dv);
    const double u = 1.0 - chi_a, v = 1.0 - chi_b;
    du = -du;
    dv = -dv;
    qgrad = du * (v * j.value + 1.0 - v) + (u * (j.value - 1.0)) * dv + (u * v) * j.grad;

    double w = inv_k;
    if (weight == DensityWeight::InvariantDensity) w *= std::exp(-model.energy_exponent(x));
    if (iso) {
      s = (2.0 * w) * qgrad;
      loss += w * qgrad.squaredNorm();
    } else {
      model.mobility(x, mob);
      Vec mg = mob * qgrad;
      loss += w * qgrad.dot(mg);
      s = (2.0 * w) * mg;
    }
    if (!std::isfinite(loss))
      throw NumericalFailure("variational loss became non-finite at batch point " +
                             std::to_string(idx));
    const double value_bar = s.dot(du * v + u * dv);
    grad_bar = (u * v) * s;
    nc.net().backprop(tape, value_bar, grad_bar, Vec(), grads);
  }
  return loss;
}

// ---------------------------------------------------------------------------
// kinetic-generator residual loss with boundary penalties
// ---------------------------------------------------------------------------

double pinn_loss_grad(const DenseNet& net, const DynamicsModel& model, const PinnBatches& batches,
                      DenseNet::Grads& grads) {
  if (model.kind != DynamicsModel::Kind::Langevin)
    throw NumericalFailure("residual loss requires underdamped dynamics");
  if (!batches.interior || batches.interior->empty() || !batches.bdry_a || batches.bdry_a->empty() ||
      !batches.bdry_b || batches.bdry_b->empty())
    throw NumericalFailure("empty training batch");
  const double gamma = model.gamma, mass = model.mass, eps = model.noise;
  const std::vector<int> dirs2 = {1};  // d^2/dp^2
  DenseNet::Tape tape;
  Vec vgrad, grad_bar(2), diag2_bar(1);
  double loss = 0;

  const double inv_k = 1.0 / static_cast<double>(batches.interior->size());
  for (std::size_t idx = 0; idx < batches.interior->size(); ++idx) {
    const Vec& x = (*batches.interior)[idx];
    auto j = net.jet(x, dirs2, &tape);
    model.potential(x, &vgrad);
    const double vp = vgrad[0];
    const double p = x[1];
    const double ln = (p / mass) * j.grad[0] - vp * j.grad[1] - gamma * p * j.grad[1] +
                      gamma * mass * eps * j.diag2[0];
    loss += inv_k * ln * ln;
    if (!std::isfinite(loss))
      throw NumericalFailure("residual loss became non-finite at interior point " +
                             std::to_string(idx));
    const double c = 2.0 * inv_k * ln;
    grad_bar[0] = c * (p / mass);
    grad_bar[1] = c * (-vp - gamma * p);
    diag2_bar[0] = c * gamma * mass * eps;
    net.backprop(tape, 0.0, grad_bar, diag2_bar, grads);
  }

  grad_bar.setZero();
  const double inv_ka = 1.0 / static_cast<double>(batches.bdry_a->size());
  for (const Vec& x : *batches.bdry_a) {
    auto j = net.jet(x, {}, &tape);
    loss += inv_ka * j.value * j.value;
    net.backprop(tape, 2.0 * inv_ka * j.value, grad_bar, Vec(), grads);
  }
  const double inv_kb = 1.0 / static_cast<double>(batches.bdry_b->size());
  for (const Vec& x : *batches.bdry_b) {
    auto j = net.jet(x, {}, &tape);
    loss += inv_kb * (j.value - 1.0) * (j.value - 1.0);
    net.backprop(tape, 2.0 * inv_kb * (j.value - 1.0), grad_bar, Vec(), grads);
  }
  if (!std::isfinite(loss)) throw NumericalFailure("boundary penalty became non-finite");
  return loss;
}

// ---------------------------------------------------------------------------
// training loops
// ---------------------------------------------------------------------------

namespace {

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(idx[i - 1], idx[j]);
  }
}

bool want_checkpoint(const TrainOptions& opt, int epoch) {
  for (int e : opt.checkpoint_epochs)
    if (e == epoch) return true;
  return false;
}

std::string checkpoint_path(const TrainOptions& opt, int epoch) {
  return opt.checkpoint_prefix + "_epoch" + std::to_string(epoch) + ".txt";
}

}  // namespace

TrainResult train_variational(NeuralCommittor& nc, const DynamicsModel& model,
                              const std::vector<Vec>& points, DensityWeight weight,
                              const TrainOptions& opt) {
  if (points.empty()) throw NumericalFailure("empty training set");
  TrainResult res;
  DenseNet::Grads grads;
  grads.init(nc.net());
  res.epoch_loss.push_back(variational_loss_grad(nc, model, points, weight, grads));

  AdamState adam;
  adam.init(nc.net());
  adam.eta = opt.lr;
  Rng rng(opt.seed);
  std::vector<std::size_t> idx(points.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;

  for (int epoch = 1; epoch <= opt.epochs; ++epoch) {
    shuffle_indices(idx, rng);
    double mean_loss = 0;
    int n_batches = 0;
    for (std::size_t start = 0; start < points.size(); start += opt.batch_size) {
      const std::size_t end = std::min(points.size(), start + opt.batch_size);
      std::vector<Vec> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) batch.push_back(points[idx[i]]);
      grads.zero();
      double loss;
      try {
        loss = variational_loss_grad(nc, model, batch, weight, grads);
      } catch (const NumericalFailure& e) {
        throw NumericalFailure("epoch " + std::to_string(epoch) + " batch " +
                               std::to_string(n_batches) + ": " + e.what());
      }
      adam.update(nc.net(), grads);
      mean_loss += loss;
      ++n_batches;
    }
    res.epoch_loss.push_back(mean_loss / n_batches);
    if (want_checkpoint(opt, epoch)) {
      const std::string path = checkpoint_path(opt, epoch);
      nc.net().save(path, epoch, opt.seed);
      res.checkpoints.push_back(path);
    }
    if (opt.verbose && (epoch % 50 == 0 || epoch == 1))
      std::printf("epoch %d loss %.6e\n", epoch, res.epoch_loss.back());
  }
  return res;
}

TrainResult train_pinn(DenseNet& net, const DynamicsModel& model, const std::vector<Vec>& interior,
                       const std::vector<Vec>& bdry_a, const std::vector<Vec>& bdry_b,
                       const TrainOptions& opt) {
  TrainResult res;
  DenseNet::Grads grads;
  grads.init(net);
  PinnBatches full{&interior, &bdry_a, &bdry_b};
  res.epoch_loss.push_back(pinn_loss_grad(net, model, full, grads));

  AdamState adam;
  adam.init(net);
  adam.eta = opt.lr;
  Rng rng(opt.seed);
  std::vector<std::size_t> idx(interior.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;

  for (int epoch = 1; epoch <= opt.epochs; ++epoch) {
    shuffle_indices(idx, rng);
    double mean_loss = 0;
    int n_batches = 0;
    for (std::size_t start = 0; start < interior.size(); start += opt.batch_size) {
      const std::size_t end = std::min(interior.size(), start + opt.batch_size);
      std::vector<Vec> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) batch.push_back(interior[idx[i]]);
      // boundary penalties enter every step in full; they are small sets
      PinnBatches pb{&batch, &bdry_a, &bdry_b};
      grads.zero();
      double loss;
      try {
        loss = pinn_loss_grad(net, model, pb, grads);
      } catch (const NumericalFailure& e) {
        throw NumericalFailure("epoch " + std::to_string(epoch) + " batch " +
                               std::to_string(n_batches) + ": " + e.what());
      }
      adam.update(net, grads);
      mean_loss += loss;
      ++n_batches;
    }
    res.epoch_loss.push_back(mean_loss / n_batches);
    if (want_checkpoint(opt, epoch)) {
      const std::string path = checkpoint_path(opt, epoch);
      net.save(path, epoch, opt.seed);
      res.checkpoints.push_back(path);
    }
    if (opt.verbose && (epoch % 50 == 0 || epoch == 1))
      std::printf("epoch %d loss %.6e\n", epoch, res.epoch_loss.back());
  }
  return res;
}

PinnPointSet pinn_point_set(const DynamicsModel& model, double x0, double x1, double p0, double p1,
                            int nx, int np, int n_bdry) {
  PinnPointSet out;
  out.interior.reserve(static_cast<std::size_t>(nx) * np);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < np; ++j) {
      Vec x(2);
      x[0] = x0 + (x1 - x0) * i / (nx - 1.0);
      x[1] = p0 + (p1 - p0) * j / (np - 1.0);
      if (model.region_a.contains_closed(x) || model.region_b.contains_closed(x)) continue;
      out.interior.push_back(std::move(x));
    }
  }
  out.bdry_a.reserve(n_bdry);
  out.bdry_b.reserve(n_bdry);
  for (int i = 0; i < n_bdry; ++i) {
    const double t = (i + 0.5) / n_bdry;
    out.bdry_a.push_back(model.region_a.surface_point(t, 0.0));
    out.bdry_b.push_back(model.region_b.surface_point(t, 0.0));
  }
  return out;
}

}  // namespace tpt
