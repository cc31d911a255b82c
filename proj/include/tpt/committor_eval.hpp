#pragma once

#include <functional>
#include <memory>

#include "tpt/models.hpp"
#include "tpt/util.hpp"

namespace tpt {

// Anything that can report q(x) and its gradient in some coordinate space:
// a trained network, a finite-element solution, or a closed form in tests.
class CommittorFn {
 public:
  virtual ~CommittorFn() = default;
  virtual int dim() const = 0;
  virtual double value_grad(CVecRef x, Vec& grad) const = 0;
  double value(CVecRef x) const {
    Vec g;
    return value_grad(x, g);
  }
};

class AnalyticCommittor : public CommittorFn {
 public:
  AnalyticCommittor(int dim, std::function<double(CVecRef, Vec&)> fn)
      : dim_(dim), fn_(std::move(fn)) {}
  int dim() const override { return dim_; }
  double value_grad(CVecRef x, Vec& grad) const override { return fn_(x, grad); }

 private:
  int dim_;
  std::function<double(CVecRef, Vec&)> fn_;
};

// q(x) = q2(z(x)) for a committor computed in collective variables z; the
// chain rule pulls the gradient back to the ambient space.
class LiftedCommittor : public CommittorFn {
 public:
  LiftedCommittor(std::shared_ptr<const CommittorFn> reduced, int ambient_dim)
      : reduced_(std::move(reduced)), ambient_(ambient_dim) {}
  int dim() const override { return ambient_; }
  double value_grad(CVecRef x, Vec& grad) const override {
    double mu2, mu3;
    Mat jac;
    CvMap::eval_jac(x, mu2, mu3, jac);
    Vec z(2), gz(2);
    z << mu2, mu3;
    const double q = reduced_->value_grad(z, gz);
    grad = jac.transpose() * gz;
    return q;
  }

 private:
  std::shared_ptr<const CommittorFn> reduced_;
  int ambient_;
};

}  // namespace tpt
