#include "tpt/models.hpp"

#include <cmath>

namespace tpt {

// ---------------------------------------------------------------------------
// Grid2D
// ---------------------------------------------------------------------------

Grid2D Grid2D::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw MissingArtifact("cannot open grid file " + path);
  std::string tag;
  Grid2D g;
  f >> tag >> g.n1 >> g.n2 >> g.x1min >> g.x1max >> g.x2min >> g.x2max;
  if (tag != "grid" || g.n1 < 2 || g.n2 < 2 || !(g.x1max > g.x1min) || !(g.x2max > g.x2min))
    throw ConfigError("bad grid header in " + path);
  const std::size_t n = static_cast<std::size_t>(g.n1) * g.n2;
  g.f.resize(n);
  g.m11.resize(n);
  g.m12.resize(n);
  g.m22.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(f >> g.f[i] >> g.m11[i] >> g.m12[i] >> g.m22[i]))
      throw ConfigError("truncated grid file " + path);
  }
  return g;
}

void Grid2D::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw MissingArtifact("cannot write " + path);
  out.precision(17);
  out << "grid " << n1 << " " << n2 << " " << x1min << " " << x1max << " " << x2min << " "
      << x2max << "\n";
  const std::size_t n = static_cast<std::size_t>(n1) * n2;
  for (std::size_t i = 0; i < n; ++i)
    out << f[i] << " " << m11[i] << " " << m12[i] << " " << m22[i] << "\n";
}

Grid2D::Sample Grid2D::eval(const std::vector<double>& field, double x1, double x2) const {
  const double d1 = dx1(), d2 = dx2();
  double u = (x1 - x1min) / d1;
  double v = (x2 - x2min) / d2;
  int i = static_cast<int>(std::floor(u));
  int j = static_cast<int>(std::floor(v));
  i = std::max(0, std::min(n1 - 2, i));
  j = std::max(0, std::min(n2 - 2, j));
  double t = std::max(0.0, std::min(1.0, u - i));
  double s = std::max(0.0, std::min(1.0, v - j));
  auto at = [&](int a, int b) { return field[static_cast<std::size_t>(b) * n1 + a]; };
  const double v00 = at(i, j), v10 = at(i + 1, j), v01 = at(i, j + 1), v11 = at(i + 1, j + 1);
  Sample out;
  out.v = (1 - t) * (1 - s) * v00 + t * (1 - s) * v10 + (1 - t) * s * v01 + t * s * v11;
  out.g1 = ((1 - s) * (v10 - v00) + s * (v11 - v01)) / d1;
  out.g2 = ((1 - t) * (v01 - v00) + t * (v11 - v10)) / d2;
  return out;
}

void Grid2D::eval_m(double x1, double x2, double m[3], double g1[3], double g2[3]) const {
  const std::vector<double>* fields[3] = {&m11, &m12, &m22};
  for (int k = 0; k < 3; ++k) {
    Sample s = eval(*fields[k], x1, x2);
    m[k] = s.v;
    g1[k] = s.g1;
    g2[k] = s.g2;
  }
}

// ---------------------------------------------------------------------------
// Region
// ---------------------------------------------------------------------------

Region Region::ball(Vec center, double radius) {
  Region r;
  r.shape_ = Shape::Ball;
  r.center_ = std::move(center);
  r.radius_ = radius;
  r.inner_dim_ = r.ambient_dim_ = static_cast<int>(r.center_.size());
  return r;
}

Region Region::ellipse(Vec center, double rx, double ry, double angle) {
  Region r;
  r.shape_ = Shape::Ellipse;
  r.center_ = std::move(center);
  r.rx_ = rx;
  r.ry_ = ry;
  r.cos_a_ = std::cos(angle);
  r.sin_a_ = std::sin(angle);
  r.inner_dim_ = r.ambient_dim_ = 2;
  return r;
}

Region Region::halfspace(Vec normal, double c) {
  Region r;
  r.shape_ = Shape::Halfspace;
  r.normal_ = std::move(normal);
  r.level_ = c;
  r.inner_dim_ = r.ambient_dim_ = static_cast<int>(r.normal_.size());
  return r;
}

Region& Region::project_prefix(int ambient_dim) {
  map_kind_ = MapKind::ProjectPrefix;
  ambient_dim_ = ambient_dim;
  return *this;
}

Region& Region::with_map(std::function<void(CVecRef, Vec&)> map,
                         std::function<void(CVecRef, Mat&)> jacobian, int ambient_dim) {
  map_kind_ = MapKind::Custom;
  map_ = std::move(map);
  map_jac_ = std::move(jacobian);
  ambient_dim_ = ambient_dim;
  return *this;
}

double Region::g_value(CVecRef y) const {
  switch (shape_) {
    case Shape::Ball:
      return (y - center_).squaredNorm();
    case Shape::Ellipse: {
      const double u = y[0] - center_[0], v = y[1] - center_[1];
      const double e1 = u * cos_a_ + v * sin_a_;
      const double e2 = -u * sin_a_ + v * cos_a_;
      return (e1 / rx_) * (e1 / rx_) + (e2 / ry_) * (e2 / ry_);
    }
    case Shape::Halfspace:
      return normal_.dot(y);
  }
  return 0;
}

double Region::g_offset() const {
  switch (shape_) {
    case Shape::Ball: {
      const double r = radius_ + moll_delta_;
      return r * r;
    }
    case Shape::Ellipse:
      return 1.0;  // g uses the inflated axes directly in g_jet / below
    case Shape::Halfspace:
      return level_ + moll_delta_;
  }
  return 0;
}

void Region::g_jet(CVecRef y, double& g, Vec& grad, const std::vector<int>& dirs2,
                   Vec* diag2) const {
  const int d = inner_dim_;
  grad.setZero(d);
  if (diag2) diag2->setZero(static_cast<Eigen::Index>(dirs2.size()));
  switch (shape_) {
    case Shape::Ball: {
      g = (y - center_).squaredNorm();
      grad = 2.0 * (y - center_);
      if (diag2)
        for (std::size_t k = 0; k < dirs2.size(); ++k) (*diag2)[static_cast<Eigen::Index>(k)] = 2.0;
      break;
    }
    case Shape::Ellipse: {
      const double ax = rx_ + moll_delta_, ay = ry_ + moll_delta_;
      const double u = y[0] - center_[0], v = y[1] - center_[1];
      const double e1 = u * cos_a_ + v * sin_a_;
      const double e2 = -u * sin_a_ + v * cos_a_;
      g = (e1 / ax) * (e1 / ax) + (e2 / ay) * (e2 / ay);
      const double q1 = 2 * e1 / (ax * ax), q2 = 2 * e2 / (ay * ay);
      grad[0] = q1 * cos_a_ - q2 * sin_a_;
      grad[1] = q1 * sin_a_ + q2 * cos_a_;
      if (diag2) {
        const double hxx =
            2 * (cos_a_ * cos_a_ / (ax * ax) + sin_a_ * sin_a_ / (ay * ay));
        const double hyy =
            2 * (sin_a_ * sin_a_ / (ax * ax) + cos_a_ * cos_a_ / (ay * ay));
        for (std::size_t k = 0; k < dirs2.size(); ++k)
          (*diag2)[static_cast<Eigen::Index>(k)] = dirs2[k] == 0 ? hxx : hyy;
      }
      break;
    }
    case Shape::Halfspace: {
      g = normal_.dot(y);
      grad = normal_;
      break;
    }
  }
}

bool Region::contains(CVecRef x) const {
  Vec y;
  if (map_kind_ == MapKind::ProjectPrefix) {
    y = x.head(inner_dim_);
  } else if (map_kind_ == MapKind::Custom) {
    map_(x, y);
  } else {
    y = x;
  }
  switch (shape_) {
    case Shape::Ball:
      return (y - center_).squaredNorm() < radius_ * radius_;
    case Shape::Ellipse:
      return g_value(y) < 1.0;
    case Shape::Halfspace:
      return normal_.dot(y) < level_;
  }
  return false;
}

bool Region::contains_closed(CVecRef x) const {
  Vec y;
  if (map_kind_ == MapKind::ProjectPrefix) {
    y = x.head(inner_dim_);
  } else if (map_kind_ == MapKind::Custom) {
    map_(x, y);
  } else {
    y = x;
  }
  switch (shape_) {
    case Shape::Ball:
      return (y - center_).squaredNorm() <= radius_ * radius_;
    case Shape::Ellipse:
      return g_value(y) <= 1.0;
    case Shape::Halfspace:
      return normal_.dot(y) <= level_;
  }
  return false;
}

double Region::indicator(CVecRef x) const {
  Vec y;
  if (map_kind_ == MapKind::ProjectPrefix) {
    y = x.head(inner_dim_);
  } else if (map_kind_ == MapKind::Custom) {
    map_(x, y);
  } else {
    y = x;
  }
  double g;
  Vec tmp;
  g_jet(y, g, tmp, {}, nullptr);  // ellipse g uses the inflated axes
  return 0.5 - 0.5 * std::tanh(moll_k_ * (g - g_offset()));
}

double Region::indicator_grad(CVecRef x, Vec& grad) const {
  Vec y;
  Mat jac;
  if (map_kind_ == MapKind::ProjectPrefix) {
    y = x.head(inner_dim_);
  } else if (map_kind_ == MapKind::Custom) {
    map_(x, y);
    map_jac_(x, jac);
  } else {
    y = x;
  }
  double g;
  Vec ggrad;
  g_jet(y, g, ggrad, {}, nullptr);
  const double arg = moll_k_ * (g - g_offset());
  const double t = std::tanh(arg);
  const double chi = 0.5 - 0.5 * t;
  const double dchi_dg = -0.5 * (1 - t * t) * moll_k_;
  grad.setZero(ambient_dim_ > 0 ? ambient_dim_ : inner_dim_);
  if (map_kind_ == MapKind::ProjectPrefix) {
    grad.head(inner_dim_) = dchi_dg * ggrad;
  } else if (map_kind_ == MapKind::Custom) {
    grad = dchi_dg * (jac.transpose() * ggrad);
  } else {
    grad = dchi_dg * ggrad;
  }
  return chi;
}

double Region::indicator_jet2(CVecRef x, Vec& grad, const std::vector<int>& dirs2,
                              Vec& diag2) const {
  if (map_kind_ == MapKind::Custom)
    throw NumericalFailure("second derivatives unsupported through a custom region map");
  Vec y = map_kind_ == MapKind::ProjectPrefix ? Vec(x.head(inner_dim_)) : Vec(x);
  // translate ambient directions to inner directions; derivatives vanish
  // for projected-out coordinates
  std::vector<int> inner_dirs;
  std::vector<std::size_t> pos;
  for (std::size_t k = 0; k < dirs2.size(); ++k) {
    if (dirs2[k] < inner_dim_) {
      inner_dirs.push_back(dirs2[k]);
      pos.push_back(k);
    }
  }
  double g;
  Vec ggrad, gdiag;
  g_jet(y, g, ggrad, inner_dirs, &gdiag);
  const double arg = moll_k_ * (g - g_offset());
  const double t = std::tanh(arg);
  const double chi = 0.5 - 0.5 * t;
  const double tp = 1 - t * t;  // tanh'
  const double dchi_dg = -0.5 * tp * moll_k_;
  const double d2chi_dg2 = t * tp * moll_k_ * moll_k_;  // -0.5 * (-2 t tp) k^2
  const int D = ambient_dim_;
  grad.setZero(D);
  grad.head(inner_dim_) = dchi_dg * ggrad;
  diag2.setZero(static_cast<Eigen::Index>(dirs2.size()));
  for (std::size_t k = 0; k < inner_dirs.size(); ++k) {
    const double gd = ggrad[inner_dirs[k]];
    diag2[static_cast<Eigen::Index>(pos[k])] =
        d2chi_dg2 * gd * gd + dchi_dg * gdiag[static_cast<Eigen::Index>(k)];
  }
  return chi;
}

Vec Region::surface_point(double t, double offset) const {
  if (map_kind_ == MapKind::Custom)
    throw NumericalFailure("surface points unsupported through a custom region map");
  Vec inner;
  const double a = 2.0 * M_PI * t;
  if (shape_ == Shape::Ball) {
    if (inner_dim_ != 2) throw NumericalFailure("surface points require a 2D region");
    inner = center_;
    inner[0] += (radius_ + offset) * std::cos(a);
    inner[1] += (radius_ + offset) * std::sin(a);
  } else if (shape_ == Shape::Ellipse) {
    const double ex = (rx_ + offset) * std::cos(a), ey = (ry_ + offset) * std::sin(a);
    inner = center_;
    inner[0] += ex * cos_a_ - ey * sin_a_;
    inner[1] += ex * sin_a_ + ey * cos_a_;
  } else {
    throw NumericalFailure("surface points undefined for half-spaces");
  }
  if (map_kind_ == MapKind::ProjectPrefix) {
    Vec out = Vec::Zero(ambient_dim_);
    out.head(inner_dim_) = inner;
    return out;
  }
  return inner;
}

Vec Region::outward_normal(CVecRef x) const {
  Vec y = map_kind_ == MapKind::ProjectPrefix ? Vec(x.head(inner_dim_)) : Vec(x);
  Vec n(inner_dim_);
  if (shape_ == Shape::Ball) {
    n = y - center_;
  } else if (shape_ == Shape::Ellipse) {
    const double u = y[0] - center_[0], v = y[1] - center_[1];
    const double e1 = u * cos_a_ + v * sin_a_;
    const double e2 = -u * sin_a_ + v * cos_a_;
    const double q1 = 2 * e1 / (rx_ * rx_), q2 = 2 * e2 / (ry_ * ry_);
    n[0] = q1 * cos_a_ - q2 * sin_a_;
    n[1] = q1 * sin_a_ + q2 * cos_a_;
  } else {
    n = normal_;
  }
  n.normalize();
  if (map_kind_ == MapKind::ProjectPrefix) {
    Vec out = Vec::Zero(ambient_dim_);
    out.head(inner_dim_) = n;
    return out;
  }
  return n;
}

// ---------------------------------------------------------------------------
// Mueller potential
// ---------------------------------------------------------------------------

namespace {
constexpr double mu_a[4] = {-1, -1, -6.5, 0.7};
constexpr double mu_b[4] = {0, 0, 11, 0.6};
constexpr double mu_c[4] = {-10, -10, -6.5, 0.7};
constexpr double mu_D[4] = {-200, -100, -170, 15};
constexpr double mu_X[4] = {1, 0, -0.5, -1};
constexpr double mu_Y[4] = {0, 0.5, 1.5, 1};
}  // namespace

double mueller_potential(double x1, double x2, double* g1, double* g2) {
  double v = 0, d1 = 0, d2 = 0;
  for (int i = 0; i < 4; ++i) {
    const double dx = x1 - mu_X[i], dy = x2 - mu_Y[i];
    const double e = mu_D[i] * std::exp(mu_a[i] * dx * dx + mu_b[i] * dx * dy + mu_c[i] * dy * dy);
    v += e;
    d1 += e * (2 * mu_a[i] * dx + mu_b[i] * dy);
    d2 += e * (mu_b[i] * dx + 2 * mu_c[i] * dy);
  }
  if (g1) *g1 = d1;
  if (g2) *g2 = d2;
  return v;
}

// ---------------------------------------------------------------------------
// Lennard-Jones 7 in the plane
// ---------------------------------------------------------------------------

double lj7_potential(CVecRef x, Vec* grad) {
  if (grad) grad->setZero(14);
  double v = 0;
  for (int i = 0; i < 7; ++i) {
    for (int j = i + 1; j < 7; ++j) {
      const double dx = x[2 * i] - x[2 * j];
      const double dy = x[2 * i + 1] - x[2 * j + 1];
      const double r2 = dx * dx + dy * dy;
      if (r2 < 1e-16) throw NumericalFailure("overlapping particles in the cluster potential");
      const double ir2 = 1.0 / r2;
      const double ir6 = ir2 * ir2 * ir2;
      v += 4.0 * (ir6 * ir6 - ir6);
      if (grad) {
        // dV/dr2 = 4 (-6 r^-14 + 3 r^-8) applied through dx, dy
        const double dvdr2 = 4.0 * (-6.0 * ir6 * ir6 * ir2 + 3.0 * ir6 * ir2);
        (*grad)[2 * i] += 2 * dvdr2 * dx;
        (*grad)[2 * i + 1] += 2 * dvdr2 * dy;
        (*grad)[2 * j] -= 2 * dvdr2 * dx;
        (*grad)[2 * j + 1] -= 2 * dvdr2 * dy;
      }
    }
  }
  return v;
}

void CvMap::eval(CVecRef x, double& mu2, double& mu3) {
  double c[7] = {0, 0, 0, 0, 0, 0, 0};
  for (int i = 0; i < 7; ++i) {
    for (int j = i + 1; j < 7; ++j) {
      const double dx = x[2 * i] - x[2 * j];
      const double dy = x[2 * i + 1] - x[2 * j + 1];
      const double r2 = dx * dx + dy * dy;
      const double q = r2 / 2.25;           // (r / 1.5)^2
      const double u = q * q * q * q;       // (r / 1.5)^8
      const double fij = 1.0 / (1.0 + u);   // (1-u)/(1-u^2)
      c[i] += fij;
      c[j] += fij;
    }
  }
  double cbar = 0;
  for (double ci : c) cbar += ci;
  cbar /= 7.0;
  mu2 = 0;
  mu3 = 0;
  for (double ci : c) {
    const double d = ci - cbar;
    mu2 += d * d;
    mu3 += d * d * d;
  }
  mu2 /= 7.0;
  mu3 /= 7.0;
}

void CvMap::eval_jac(CVecRef x, double& mu2, double& mu3, Mat& jac) {
  double c[7] = {0, 0, 0, 0, 0, 0, 0};
  Mat dc = Mat::Zero(7, 14);
  for (int i = 0; i < 7; ++i) {
    for (int j = i + 1; j < 7; ++j) {
      const double dx = x[2 * i] - x[2 * j];
      const double dy = x[2 * i + 1] - x[2 * j + 1];
      const double r2 = dx * dx + dy * dy;
      if (r2 <= 0) throw NumericalFailure("coincident particles in collective variables");
      const double q = r2 / 2.25;
      const double u = q * q * q * q;
      const double fij = 1.0 / (1.0 + u);
      // df/dr2 = -(du/dr2) / (1+u)^2, du/dr2 = 4 u / r2
      const double dfdr2 = -4.0 * u / r2 * fij * fij;
      c[i] += fij;
      c[j] += fij;
      const double gx = 2 * dfdr2 * dx, gy = 2 * dfdr2 * dy;
      dc(i, 2 * i) += gx;
      dc(i, 2 * i + 1) += gy;
      dc(i, 2 * j) -= gx;
      dc(i, 2 * j + 1) -= gy;
      dc(j, 2 * i) += gx;
      dc(j, 2 * i + 1) += gy;
      dc(j, 2 * j) -= gx;
      dc(j, 2 * j + 1) -= gy;
    }
  }
  double cbar = 0;
  for (double ci : c) cbar += ci;
  cbar /= 7.0;
  mu2 = 0;
  mu3 = 0;
  for (double ci : c) {
    const double d = ci - cbar;
    mu2 += d * d;
    mu3 += d * d * d;
  }
  mu2 /= 7.0;
  mu3 /= 7.0;
  jac.setZero(2, 14);
  // sum_i (c_i - cbar) dcbar = 0, so the cbar term drops out of mu2
  Vec dcbar = dc.colwise().sum() / 7.0;
  for (int i = 0; i < 7; ++i) {
    const double d = c[i] - cbar;
    jac.row(0) += (2.0 / 7.0) * d * dc.row(i);
    jac.row(1) += (3.0 / 7.0) * d * d * (dc.row(i) - dcbar.transpose());
  }
}

Vec lj7_descend(Vec x, int max_iter, double gtol) {
  Vec g(14), xn(14);
  double v = lj7_potential(x, &g);
  double step = 1e-3;
  for (int it = 0; it < max_iter; ++it) {
    if (g.norm() < gtol) break;
    xn = x - step * g;
    Vec gn(14);
    double vn;
    try {
      vn = lj7_potential(xn, &gn);
    } catch (const NumericalFailure&) {
      step *= 0.5;
      continue;
    }
    if (vn < v) {
      x.swap(xn);
      g.swap(gn);
      v = vn;
      step = std::min(step * 1.2, 1e-2);
    } else {
      step *= 0.5;
      if (step < 1e-18) break;
    }
  }
  return x;
}

Vec lj7_minimum_trapezoid() {
  const double d = std::pow(2.0, 1.0 / 6.0);
  Vec x(14);
  int n = 0;
  for (int i = 0; i < 4; ++i) {
    x[2 * n] = i * d;
    x[2 * n + 1] = 0;
    ++n;
  }
  for (int i = 0; i < 3; ++i) {
    x[2 * n] = (i + 0.5) * d;
    x[2 * n + 1] = d * std::sqrt(3.0) / 2.0;
    ++n;
  }
  return lj7_descend(std::move(x));
}

Vec lj7_minimum_hexagon() {
  const double d = std::pow(2.0, 1.0 / 6.0);
  Vec x(14);
  x[0] = 0;
  x[1] = 0;
  for (int i = 0; i < 6; ++i) {
    x[2 * (i + 1)] = d * std::cos(i * M_PI / 3.0);
    x[2 * (i + 1) + 1] = d * std::sin(i * M_PI / 3.0);
  }
  return lj7_descend(std::move(x));
}

// ---------------------------------------------------------------------------
// make_model
// ---------------------------------------------------------------------------

namespace {

double noise_param(const ModelParams& p, bool langevin) {
  double val;
  if (langevin) {
    val = p.get("eps", 0.0);
  } else if (p.has("beta_inv")) {
    val = p.get("beta_inv", 0.0);
  } else if (p.has("beta")) {
    val = 1.0 / p.get("beta", 0.0);
  } else {
    val = 0.0;
  }
  if (!(val > 0)) throw ConfigError("noise parameter must be positive");
  return val;
}

Region lj7_cv_region_a() { return Region::ball((Vec(2) << 0.5526, -0.0935).finished(), 0.1); }

Region lj7_cv_region_b() {
  return Region::ellipse((Vec(2) << 0.7184, 1.1607).finished(), 0.15, 0.03, 5.0 * M_PI / 12.0);
}

DynamicsModel make_mueller(const ModelParams& p) {
  DynamicsModel m;
  m.kind = DynamicsModel::Kind::OverdampedIso;
  m.name = "mueller";
  m.dim = 2;
  m.noise_rank = 2;
  m.noise = noise_param(p, false);
  m.reversible = true;
  m.region_a = Region::ball((Vec(2) << -0.558, 1.441).finished(), 0.1);
  m.region_b = Region::ball((Vec(2) << 0.623, 0.028).finished(), 0.1);
  m.potential = [](CVecRef x, Vec* g) {
    double g1, g2;
    const double v = mueller_potential(x[0], x[1], &g1, &g2);
    if (g) {
      g->resize(2);
      (*g)[0] = g1;
      (*g)[1] = g2;
    }
    return v;
  };
  const double beta = 1.0 / m.noise;
  m.drift = [pot = m.potential](CVecRef x, Vec& b) {
    pot(x, &b);
    b = -b;
  };
  m.sigma = [s = std::sqrt(2.0 * m.noise)](CVecRef, Mat& out) {
    out = s * Mat::Identity(2, 2);
  };
  m.energy_exponent = [pot = m.potential, beta](CVecRef x) { return beta * pot(x, nullptr); };
  return m;
}

DynamicsModel make_rugged(const ModelParams& p) {
  DynamicsModel m;
  m.kind = DynamicsModel::Kind::OverdampedIso;
  m.name = "rugged_mueller_10d";
  m.dim = 10;
  m.noise_rank = 10;
  m.noise = noise_param(p, false);
  m.reversible = true;
  const double gr = p.get("gamma_rug", 9.0);
  const double k = p.get("k", 5.0);
  const double sg = p.get("sigma", 0.05);
  m.region_a = Region::ball((Vec(2) << -0.558, 1.441).finished(), 0.1).project_prefix(10);
  m.region_b = Region::ball((Vec(2) << 0.623, 0.028).finished(), 0.1).project_prefix(10);
  m.potential = [gr, k, sg](CVecRef x, Vec* g) {
    double g1, g2;
    double v = mueller_potential(x[0], x[1], &g1, &g2);
    const double w = 2.0 * k * M_PI;
    v += gr * std::sin(w * x[0]) * std::sin(w * x[1]);
    if (g) {
      g->resize(10);
      (*g)[0] = g1 + gr * w * std::cos(w * x[0]) * std::sin(w * x[1]);
      (*g)[1] = g2 + gr * w * std::sin(w * x[0]) * std::cos(w * x[1]);
    }
    const double is2 = 1.0 / (sg * sg);
    for (int i = 2; i < 10; ++i) {
      v += is2 * x[i] * x[i];
      if (g) (*g)[i] = 2.0 * is2 * x[i];
    }
    return v;
  };
  const double beta = 1.0 / m.noise;
  m.drift = [pot = m.potential](CVecRef x, Vec& b) {
    pot(x, &b);
    b = -b;
  };
  m.sigma = [s = std::sqrt(2.0 * m.noise)](CVecRef, Mat& out) {
    out = s * Mat::Identity(10, 10);
  };
  m.energy_exponent = [pot = m.potential, beta](CVecRef x) { return beta * pot(x, nullptr); };
  return m;
}

DynamicsModel make_duffing(const ModelParams& p) {
  DynamicsModel m;
  m.kind = DynamicsModel::Kind::Langevin;
  m.name = "duffing";
  m.dim = 2;
  m.noise_rank = 1;
  m.noise = noise_param(p, true);
  m.gamma = p.get("gamma", 0.5);
  m.mass = p.get("m", 1.0);
  m.reversible = false;
  m.region_a = Region::ellipse((Vec(2) << -1.0, 0.0).finished(), 0.3, 0.4, 0.0);
  m.region_b = Region::ellipse((Vec(2) << 1.0, 0.0).finished(), 0.3, 0.4, 0.0);
  m.potential = [](CVecRef x, Vec* g) {
    const double s = x[0] * x[0] - 1.0;
    if (g) {
      g->setZero(2);
      (*g)[0] = x[0] * s;
    }
    return 0.25 * s * s;
  };
  const double gamma = m.gamma, mass = m.mass, eps = m.noise;
  m.drift = [gamma, mass](CVecRef x, Vec& b) {
    b.resize(2);
    b[0] = x[1] / mass;
    b[1] = -x[0] * (x[0] * x[0] - 1.0) - gamma * x[1];
  };
  m.sigma = [s = std::sqrt(2.0 * gamma * eps * mass)](CVecRef, Mat& out) {
    out.setZero(2, 1);
    out(1, 0) = s;
  };
  m.energy_exponent = [mass, eps](CVecRef x) {
    const double s = x[0] * x[0] - 1.0;
    return (x[1] * x[1] / (2.0 * mass) + 0.25 * s * s) / eps;
  };
  return m;
}

DynamicsModel make_lj7_cartesian(const ModelParams& p) {
  DynamicsModel m;
  m.kind = DynamicsModel::Kind::OverdampedIso;
  m.name = "lj7_cartesian";
  m.dim = 14;
  m.noise_rank = 14;
  m.noise = noise_param(p, false);
  m.reversible = true;
  auto cv = [](CVecRef x, Vec& z) {
    z.resize(2);
    CvMap::eval(x, z[0], z[1]);
  };
  auto cv_jac = [](CVecRef x, Mat& j) {
    double mu2, mu3;
    CvMap::eval_jac(x, mu2, mu3, j);
  };
  m.region_a = lj7_cv_region_a().with_map(cv, cv_jac, 14);
  m.region_b = lj7_cv_region_b().with_map(cv, cv_jac, 14);
  m.potential = [](CVecRef x, Vec* g) { return lj7_potential(x, g); };
  const double beta = 1.0 / m.noise;
  m.drift = [](CVecRef x, Vec& b) {
    lj7_potential(x, &b);
    b = -b;
  };
  m.sigma = [s = std::sqrt(2.0 * m.noise)](CVecRef, Mat& out) {
    out = s * Mat::Identity(14, 14);
  };
  m.energy_exponent = [beta](CVecRef x) { return beta * lj7_potential(x, nullptr); };
  return m;
}

DynamicsModel make_lj7_cv(const ModelParams& p) {
  auto it = p.str.find("fgrid");
  if (it == p.str.end()) throw MissingArtifact("lj7_cv requires an fgrid file with tabulated F and M");
  auto grid = std::make_shared<Grid2D>(Grid2D::load(it->second));

  DynamicsModel m;
  m.kind = DynamicsModel::Kind::OverdampedMobility;
  m.name = "lj7_cv";
  m.dim = 2;
  m.noise_rank = 2;
  m.noise = noise_param(p, false);
  m.reversible = true;
  m.grid = grid;
  m.region_a = lj7_cv_region_a();
  m.region_b = lj7_cv_region_b();
  const double beta = 1.0 / m.noise;
  m.potential = [grid](CVecRef x, Vec* g) {
    auto s = grid->eval_f(x[0], x[1]);
    if (g) {
      g->resize(2);
      (*g)[0] = s.g1;
      (*g)[1] = s.g2;
    }
    return s.v;
  };
  m.energy_exponent = [grid, beta](CVecRef x) { return beta * grid->eval_f(x[0], x[1]).v; };
  m.mobility = [grid](CVecRef x, Mat& out) {
    double mm[3], g1[3], g2[3];
    grid->eval_m(x[0], x[1], mm, g1, g2);
    out.resize(2, 2);
    out(0, 0) = mm[0];
    out(0, 1) = out(1, 0) = mm[1];
    out(1, 1) = mm[2];
  };
  const double beta_inv = m.noise;
  m.drift = [grid, beta_inv](CVecRef x, Vec& b) {
    auto s = grid->eval_f(x[0], x[1]);
    double mm[3], g1[3], g2[3];
    grid->eval_m(x[0], x[1], mm, g1, g2);
    b.resize(2);
    b[0] = -(mm[0] * s.g1 + mm[1] * s.g2) + beta_inv * (g1[0] + g2[1]);  // d1 M11 + d2 M12
    b[1] = -(mm[1] * s.g1 + mm[2] * s.g2) + beta_inv * (g1[1] + g2[2]);  // d1 M12 + d2 M22
  };
  m.sigma = [grid, s2 = std::sqrt(2.0 * m.noise)](CVecRef x, Mat& out) {
    double mm[3], g1[3], g2[3];
    grid->eval_m(x[0], x[1], mm, g1, g2);
    // principal square root of the SPD 2x2 tensor
    const double det = mm[0] * mm[2] - mm[1] * mm[1];
    const double tr = mm[0] + mm[2];
    if (!(det > 0) || !(tr > 0)) throw NumericalFailure("mobility tensor not positive definite");
    const double s = std::sqrt(det);
    const double t = std::sqrt(tr + 2 * s);
    out.resize(2, 2);
    out(0, 0) = (mm[0] + s) / t;
    out(0, 1) = out(1, 0) = mm[1] / t;
    out(1, 1) = (mm[2] + s) / t;
    out *= s2;
  };
  return m;
}

}  // namespace

DynamicsModel make_model(const std::string& name, const ModelParams& params) {
  if (name == "mueller") return make_mueller(params);
  if (name == "rugged_mueller_10d") return make_rugged(params);
  if (name == "duffing") return make_duffing(params);
  if (name == "lj7_cartesian") return make_lj7_cartesian(params);
  if (name == "lj7_cv") return make_lj7_cv(params);
  throw ConfigError("unknown model name: " + name);
}

}  // namespace tpt
