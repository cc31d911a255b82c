#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tpt/util.hpp"

namespace tpt {

// Fully connected network with tanh hidden layers and a sigmoid output.
// Input derivatives are carried through the forward pass as jets: the value,
// one first-order jet per input coordinate, and optionally diagonal
// second-order jets for selected coordinates. Parameter gradients come from
// reverse accumulation over that augmented computation; finite differences
// appear only in tests.
class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(std::vector<int> widths);  // [d, w1, ..., wL, 1]
  static DenseNet init_uniform(std::vector<int> widths, std::uint64_t seed);

  int input_dim() const { return widths_.front(); }
  int n_layers() const { return static_cast<int>(W.size()); }  // linear maps
  long param_count() const;
  const std::vector<int>& widths() const { return widths_; }

  std::vector<Mat> W;
  std::vector<Vec> b;

  // forward tape; reusable across points of the same jet configuration
  struct Tape {
    // per linear map: post-activation a, its jets (pre- and post-activation)
    std::vector<Vec> a;        // a[l], l = 0..L+1 (a[0] = input)
    std::vector<Mat> jz, j2z;  // pre-activation jets of layer l >= 1
    std::vector<Mat> ja, j2a;  // post-activation jets, l = 0..L+1
    std::vector<int> dirs2;    // which coordinates carry second-order jets
  };

  struct Jet {
    double value = 0;
    Vec grad;   // dN/dx, all coordinates
    Vec diag2;  // d2N/dx_k^2 for tape.dirs2 order
  };

  double value(CVecRef x) const;
  // full first-order jet + selected diagonal second-order jets
  Jet jet(CVecRef x, const std::vector<int>& dirs2, Tape* tape = nullptr) const;

  struct Grads {
    std::vector<Mat> W;
    std::vector<Vec> b;
    void init(const DenseNet& net);
    void zero();
    void axpy(double alpha, const Grads& g);  // this += alpha * g
  };

  // accumulate d(loss)/d(params) given adjoints of (value, grad, diag2)
  void backprop(const Tape& tape, double value_bar, CVecRef grad_bar, CVecRef diag2_bar,
                Grads& out) const;

  void save(const std::string& path, int epoch, std::uint64_t seed) const;
  static DenseNet load(const std::string& path, int* epoch = nullptr, std::uint64_t* seed = nullptr);

 private:
  std::vector<int> widths_;
};

// Adam optimizer state for one network (first/second moments in parameter shape).
struct AdamState {
  std::vector<Mat> mW, vW;
  std::vector<Vec> mb, vb;
  long step = 0;
  double eta = 1e-3;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  void init(const DenseNet& net);
  void update(DenseNet& net, const DenseNet::Grads& g);
};

}  // namespace tpt
