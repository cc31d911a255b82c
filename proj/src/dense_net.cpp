#include "tpt/dense_net.hpp"

#include <cmath>

#include "tpt/rng.hpp"

namespace tpt {

namespace {

inline double act(double z, bool last) { return last ? 1.0 / (1.0 + std::exp(-z)) : std::tanh(z); }

// derivatives of the activation expressed through the activation value
inline void act_derivs(double a, bool last, double& d1, double& d2, double& d3) {
  if (last) {
    d1 = a * (1.0 - a);
    d2 = d1 * (1.0 - 2.0 * a);
    d3 = d2 * (1.0 - 2.0 * a) - 2.0 * d1 * d1;
  } else {
    d1 = 1.0 - a * a;
    d2 = -2.0 * a * d1;
    d3 = -2.0 * d1 * d1 - 2.0 * a * d2;
  }
}

}  // namespace

DenseNet::DenseNet(std::vector<int> widths) : widths_(std::move(widths)) {
  if (widths_.size() < 2 || widths_.back() != 1)
    throw ConfigError("network widths must be [d, w1, ..., wL, 1]");
  const int L = static_cast<int>(widths_.size()) - 1;
  W.resize(L);
  b.resize(L);
  for (int l = 0; l < L; ++l) {
    W[l] = Mat::Zero(widths_[l + 1], widths_[l]);
    b[l] = Vec::Zero(widths_[l + 1]);
  }
}

DenseNet DenseNet::init_uniform(std::vector<int> widths, std::uint64_t seed) {
  DenseNet net(std::move(widths));
  Rng rng(seed);
  for (std::size_t l = 0; l < net.W.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.W[l].cols()));
    for (Eigen::Index j = 0; j < net.W[l].cols(); ++j)
      for (Eigen::Index i = 0; i < net.W[l].rows(); ++i)
        net.W[l](i, j) = bound * (2.0 * rng.uniform() - 1.0);
    for (Eigen::Index i = 0; i < net.b[l].size(); ++i)
      net.b[l][i] = bound * (2.0 * rng.uniform() - 1.0);
  }
  return net;
}

long DenseNet::param_count() const {
  long n = 0;
  for (std::size_t l = 0; l < W.size(); ++l) n += W[l].size() + b[l].size();
  return n;
}

double DenseNet::value(CVecRef x) const {
  Vec a = x;
  const int L = n_layers();
  for (int l = 0; l < L; ++l) {
    Vec z = W[l] * a + b[l];
    const bool last = (l == L - 1);
    a.resize(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) a[i] = act(z[i], last);
  }
  return a[0];
}

DenseNet::Jet DenseNet::jet(CVecRef x, const std::vector<int>& dirs2, Tape* tape) const {
  Tape local;
  Tape& t = tape ? *tape : local;
  const int L = n_layers();
  const int d = input_dim();
  const int n2 = static_cast<int>(dirs2.size());
  t.dirs2 = dirs2;
  t.a.resize(L + 1);
  t.ja.resize(L + 1);
  t.j2a.resize(L + 1);
  t.jz.resize(L);
  t.j2z.resize(L);

  t.a[0] = x;
  t.ja[0] = Mat::Zero(d, d);
  for (int k = 0; k < d; ++k) t.ja[0](k, k) = 1.0;
  t.j2a[0] = Mat::Zero(d, n2);

  for (int l = 0; l < L; ++l) {
    const bool last = (l == L - 1);
    Vec z = W[l] * t.a[l] + b[l];
    t.jz[l].noalias() = W[l] * t.ja[l];
    t.j2z[l].noalias() = W[l] * t.j2a[l];
    const Eigen::Index w = z.size();
    t.a[l + 1].resize(w);
    t.ja[l + 1].resize(w, d);
    t.j2a[l + 1].resize(w, n2);
    for (Eigen::Index i = 0; i < w; ++i) {
      const double ai = act(z[i], last);
      double d1, d2, d3;
      act_derivs(ai, last, d1, d2, d3);
      t.a[l + 1][i] = ai;
      for (int k = 0; k < d; ++k) t.ja[l + 1](i, k) = d1 * t.jz[l](i, k);
      for (int k = 0; k < n2; ++k) {
        const double jzk = t.jz[l](i, dirs2[k]);
        t.j2a[l + 1](i, k) = d2 * jzk * jzk + d1 * t.j2z[l](i, k);
      }
    }
  }

  Jet out;
  out.value = t.a[L][0];
  out.grad = t.ja[L].row(0).transpose();
  out.diag2 = t.j2a[L].row(0).transpose();
  return out;
}

void DenseNet::Grads::init(const DenseNet& net) {
  W.resize(net.W.size());
  b.resize(net.b.size());
  for (std::size_t l = 0; l < W.size(); ++l) {
    W[l] = Mat::Zero(net.W[l].rows(), net.W[l].cols());
    b[l] = Vec::Zero(net.b[l].size());
  }
}

void DenseNet::Grads::zero() {
  for (auto& m : W) m.setZero();
  for (auto& v : b) v.setZero();
}

void DenseNet::Grads::axpy(double alpha, const Grads& g) {
  for (std::size_t l = 0; l < W.size(); ++l) {
    W[l] += alpha * g.W[l];
    b[l] += alpha * g.b[l];
  }
}

void DenseNet::backprop(const Tape& t, double value_bar, CVecRef grad_bar, CVecRef diag2_bar,
                        Grads& out) const {
  const int L = n_layers();
  const int d = input_dim();
  const int n2 = static_cast<int>(t.dirs2.size());

  // adjoints with respect to post-activation quantities of the current layer
  Vec a_bar = Vec::Zero(1);
  a_bar[0] = value_bar;
  Mat ja_bar = Mat::Zero(1, d);
  ja_bar.row(0) = grad_bar.transpose();
  Mat j2a_bar = Mat::Zero(1, n2);
  for (int k = 0; k < n2; ++k) j2a_bar(0, k) = diag2_bar[k];

  for (int l = L - 1; l >= 0; --l) {
    const bool last = (l == L - 1);
    const Eigen::Index w = t.a[l + 1].size();
    Vec z_bar = Vec::Zero(w);
    Mat jz_bar = Mat::Zero(w, d);
    Mat j2z_bar = Mat::Zero(w, n2);
    for (Eigen::Index i = 0; i < w; ++i) {
      const double ai = t.a[l + 1][i];
      double d1, d2, d3;
      act_derivs(ai, last, d1, d2, d3);
      double zb = a_bar[i] * d1;
      for (int k = 0; k < d; ++k) {
        const double jzik = t.jz[l](i, k);
        zb += ja_bar(i, k) * d2 * jzik;
        jz_bar(i, k) += ja_bar(i, k) * d1;
      }
      for (int k = 0; k < n2; ++k) {
        const double jzik = t.jz[l](i, t.dirs2[k]);
        const double j2zik = t.j2z[l](i, k);
        zb += j2a_bar(i, k) * (d3 * jzik * jzik + d2 * j2zik);
        jz_bar(i, t.dirs2[k]) += j2a_bar(i, k) * 2.0 * d2 * jzik;
        j2z_bar(i, k) += j2a_bar(i, k) * d1;
      }
      z_bar[i] = zb;
    }
    // through the linear map
    out.W[l].noalias() += z_bar * t.a[l].transpose();
    out.W[l].noalias() += jz_bar * t.ja[l].transpose();
    out.W[l].noalias() += j2z_bar * t.j2a[l].transpose();
    out.b[l] += z_bar;
    if (l > 0) {
      a_bar.noalias() = W[l].transpose() * z_bar;
      ja_bar.noalias() = W[l].transpose() * jz_bar;
      j2a_bar.noalias() = W[l].transpose() * j2z_bar;
    }
  }
}

void DenseNet::save(const std::string& path, int epoch, std::uint64_t seed) const {
  std::ofstream f(path);
  if (!f) throw MissingArtifact("cannot write " + path);
  f.precision(17);
  f << "layers:";
  for (int w : widths_) f << " " << w;
  f << "\nactivation: tanh sigmoid\n";
  for (std::size_t l = 0; l < W.size(); ++l) {
    for (Eigen::Index i = 0; i < W[l].rows(); ++i) {
      for (Eigen::Index j = 0; j < W[l].cols(); ++j)
        f << W[l](i, j) << (j + 1 < W[l].cols() ? " " : "\n");
    }
    for (Eigen::Index i = 0; i < b[l].size(); ++i)
      f << b[l][i] << (i + 1 < b[l].size() ? " " : "\n");
  }
  f << "epoch: " << epoch << " seed: " << seed << "\n";
}

DenseNet DenseNet::load(const std::string& path, int* epoch, std::uint64_t* seed) {
  std::ifstream f(path);
  if (!f) throw MissingArtifact("cannot open checkpoint " + path);
  std::string line;
  if (!std::getline(f, line) || line.rfind("layers:", 0) != 0)
    throw ConfigError("bad checkpoint header in " + path);
  std::vector<int> widths;
  {
    std::stringstream ss(line.substr(7));
    int w;
    while (ss >> w) widths.push_back(w);
  }
  if (!std::getline(f, line) || line != "activation: tanh sigmoid")
    throw ConfigError("unsupported activation line in " + path);
  DenseNet net(widths);
  for (std::size_t l = 0; l < net.W.size(); ++l) {
    for (Eigen::Index i = 0; i < net.W[l].rows(); ++i)
      for (Eigen::Index j = 0; j < net.W[l].cols(); ++j)
        if (!(f >> net.W[l](i, j))) throw ConfigError("truncated checkpoint " + path);
    for (Eigen::Index i = 0; i < net.b[l].size(); ++i)
      if (!(f >> net.b[l][i])) throw ConfigError("truncated checkpoint " + path);
  }
  std::string tag;
  int ep = 0;
  std::uint64_t sd = 0;
  if (f >> tag >> ep) {
    if (tag != "epoch:") throw ConfigError("bad checkpoint trailer in " + path);
    if (f >> tag >> sd && tag != "seed:") throw ConfigError("bad checkpoint trailer in " + path);
  }
  if (epoch) *epoch = ep;
  if (seed) *seed = sd;
  return net;
}

void AdamState::init(const DenseNet& net) {
  mW.resize(net.W.size());
  vW.resize(net.W.size());
  mb.resize(net.b.size());
  vb.resize(net.b.size());
  for (std::size_t l = 0; l < net.W.size(); ++l) {
    mW[l] = Mat::Zero(net.W[l].rows(), net.W[l].cols());
    vW[l] = Mat::Zero(net.W[l].rows(), net.W[l].cols());
    mb[l] = Vec::Zero(net.b[l].size());
    vb[l] = Vec::Zero(net.b[l].size());
  }
  step = 0;
}

void AdamState::update(DenseNet& net, const DenseNet::Grads& g) {
  ++step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  for (std::size_t l = 0; l < net.W.size(); ++l) {
    mW[l] = beta1 * mW[l] + (1 - beta1) * g.W[l];
    vW[l] = beta2 * vW[l] + (1 - beta2) * g.W[l].cwiseProduct(g.W[l]);
    net.W[l].array() -= eta * (mW[l].array() / c1) / ((vW[l].array() / c2).sqrt() + eps);
    mb[l] = beta1 * mb[l] + (1 - beta1) * g.b[l];
    vb[l] = beta2 * vb[l] + (1 - beta2) * g.b[l].cwiseProduct(g.b[l]);
    net.b[l].array() -= eta * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + eps);
  }
}

}  // namespace tpt
