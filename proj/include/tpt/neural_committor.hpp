#pragma once

#include <optional>
#include <vector>

#include "tpt/committor_eval.hpp"
#include "tpt/dense_net.hpp"
#include "tpt/models.hpp"
#include "tpt/util.hpp"

namespace tpt {

// Solution model q(x) = (1 - chi_A) [ (1 - chi_B) N(x) + chi_B ]: the
// smoothed indicators hard-wire the boundary values for any parameters.
class NeuralCommittor : public CommittorFn {
 public:
  NeuralCommittor() = default;
  NeuralCommittor(DenseNet net, Region a, Region b)
      : net_(std::move(net)), a_(std::move(a)), b_(std::move(b)) {}

  int dim() const override { return net_.input_dim(); }
  const DenseNet& net() const { return net_; }
  DenseNet& net() { return net_; }
  const Region& region_a() const { return a_; }
  const Region& region_b() const { return b_; }

  double value(CVecRef x) const;
  double value_grad(CVecRef x, Vec& grad) const override;
  // value, gradient, and diagonal second derivatives for selected directions
  void jet(CVecRef x, const std::vector<int>& dirs2, double& q, Vec& grad, Vec& diag2) const;

 private:
  DenseNet net_;
  Region a_, b_;
};

// Raw network used directly as the committor estimate (penalty-enforced
// boundary conditions).
class RawNetCommittor : public CommittorFn {
 public:
  explicit RawNetCommittor(DenseNet net) : net_(std::move(net)) {}
  int dim() const override { return net_.input_dim(); }
  double value_grad(CVecRef x, Vec& grad) const override {
    auto j = net_.jet(x, {});
    grad = j.grad;
    return j.value;
  }
  const DenseNet& net() const { return net_; }

 private:
  DenseNet net_;
};

// ---------------------------------------------------------------------------
// losses
// ---------------------------------------------------------------------------

enum class DensityWeight { InvariantDensity, None };

// mean over the batch of  grad q^T M grad q * exp(-beta F) / rho  with
// rho == 1 for quasi-uniform training sets and the weight dropped entirely
// for trajectory-sampled sets.
double variational_loss_grad(const NeuralCommittor& nc, const DynamicsModel& model,
                             const std::vector<Vec>& batch, DensityWeight weight,
                             DenseNet::Grads& grads);

struct PinnBatches {
  const std::vector<Vec>* interior = nullptr;
  const std::vector<Vec>* bdry_a = nullptr;
  const std::vector<Vec>* bdry_b = nullptr;
};

// mean |L N|^2 over the interior plus mean |N|^2 on the reactant boundary and
// mean |N - 1|^2 on the product boundary; L is the kinetic generator of the
// underdamped dynamics applied to the raw network.
double pinn_loss_grad(const DenseNet& net, const DynamicsModel& model, const PinnBatches& batches,
                      DenseNet::Grads& grads);

// ---------------------------------------------------------------------------
// training
// ---------------------------------------------------------------------------

struct TrainOptions {
  int epochs = 1000;
  int batch_size = 1000;
  double lr = 1e-4;
  std::uint64_t seed = 0;
  std::vector<int> checkpoint_epochs;
  std::string checkpoint_prefix;
  bool verbose = false;
};

struct TrainResult {
  std::vector<double> epoch_loss;  // [0] = loss before training
  std::vector<std::string> checkpoints;
};

TrainResult train_variational(NeuralCommittor& nc, const DynamicsModel& model,
                              const std::vector<Vec>& points, DensityWeight weight,
                              const TrainOptions& opt);

TrainResult train_pinn(DenseNet& net, const DynamicsModel& model,
                       const std::vector<Vec>& interior, const std::vector<Vec>& bdry_a,
                       const std::vector<Vec>& bdry_b, const TrainOptions& opt);

// uniform grid over a rectangle with points inside the closed regions removed
// from the interior term, plus equispaced boundary batches
struct PinnPointSet {
  std::vector<Vec> interior, bdry_a, bdry_b;
};
PinnPointSet pinn_point_set(const DynamicsModel& model, double x0, double x1, double p0, double p1,
                            int nx, int np, int n_bdry = 200);

}  // namespace tpt
