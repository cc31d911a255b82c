#include "tpt/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace tpt {

// ---------------------------------------------------------------------------
// Student-t quantile via the regularized incomplete beta function
// ---------------------------------------------------------------------------

namespace {

// continued fraction for the incomplete beta (Lentz)
double betacf(double a, double b, double x) {
  const double tiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return h;
}

double ibeta(double a, double b, double x) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  const double lnb = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                     b * std::log(1.0 - x);
  const double front = std::exp(lnb);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double t_cdf(double t, int dof) {
  const double x = dof / (dof + t * t);
  const double p = 0.5 * ibeta(0.5 * dof, 0.5, x);
  return t >= 0 ? 1.0 - p : p;
}

}  // namespace

double t_quantile(double alpha, int dof) {
  if (dof < 1) throw NumericalFailure("t quantile needs at least one degree of freedom");
  const double target = 1.0 - (1.0 - alpha) / 2.0;  // two-sided
  double lo = 0.0, hi = 1.0;
  while (t_cdf(hi, dof) < target) {
    hi *= 2.0;
    if (hi > 1e12) break;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (t_cdf(mid, dof) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-12 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

IntervalStats confidence_interval(const std::vector<double>& samples, double alpha) {
  if (samples.size() < 2) throw NumericalFailure("confidence interval needs at least 2 samples");
  IntervalStats s;
  s.n = static_cast<int>(samples.size());
  double sum = 0;
  for (double v : samples) sum += v;
  s.mean = sum / s.n;
  double ss = 0;
  for (double v : samples) ss += (v - s.mean) * (v - s.mean);
  const double sd = std::sqrt(ss / (s.n - 1));
  s.se = sd / std::sqrt(static_cast<double>(s.n));
  const double t = s.se > 0 ? t_quantile(alpha, s.n - 1) : 0.0;
  s.lo = s.mean - s.se * t;
  s.hi = s.mean + s.se * t;
  return s;
}

// ---------------------------------------------------------------------------
// adaptive Simpson
// ---------------------------------------------------------------------------

namespace {
double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0) throw NumericalFailure("quadrature failed to converge");
  if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}
}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60);
}

// ---------------------------------------------------------------------------
// Monte Carlo estimators
// ---------------------------------------------------------------------------

void check_committor_range(const std::vector<double>& q) {
  for (double v : q) {
    if (!(v >= -0.05 && v <= 1.05))
      throw NumericalFailure("committor value " + fmt_g(v) + " outside [-0.05, 1.05]");
  }
}

McEstimate rho_ab_mc(const std::vector<double>& q, const std::vector<double>& exponent) {
  if (q.empty() || q.size() != exponent.size()) throw NumericalFailure("empty or mismatched point set");
  check_committor_range(q);
  McEstimate e;
  e.n = static_cast<int>(q.size());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double w = std::exp(-exponent[i]);
    den += w;
    num += w * q[i] * (1.0 - q[i]);
  }
  e.z = den / e.n;
  e.value = num / den;
  return e;
}

McEstimate flux_rate_mc(const std::vector<double>& g, const std::vector<double>& exponent,
                        double coef) {
  if (g.empty() || g.size() != exponent.size()) throw NumericalFailure("empty or mismatched point set");
  McEstimate e;
  e.n = static_cast<int>(g.size());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = std::exp(-exponent[i]);
    den += w;
    num += w * g[i];
  }
  e.z = den / e.n;
  e.value = coef * num / den;
  return e;
}

McEstimate rho_a_mc(const std::vector<double>& qminus, const std::vector<double>& exponent) {
  if (qminus.empty() || qminus.size() != exponent.size())
    throw NumericalFailure("empty or mismatched point set");
  check_committor_range(qminus);
  McEstimate e;
  e.n = static_cast<int>(qminus.size());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < qminus.size(); ++i) {
    const double w = std::exp(-exponent[i]);
    den += w;
    num += w * qminus[i];
  }
  e.z = den / e.n;
  e.value = num / den;
  return e;
}

double rho_ab_jackknife_se(const std::vector<double>& q, const std::vector<double>& exponent) {
  const std::size_t n = q.size();
  if (n < 2) throw NumericalFailure("jackknife needs at least 2 points");
  double num = 0, den = 0;
  std::vector<double> wi(n), fi(n);
  for (std::size_t i = 0; i < n; ++i) {
    wi[i] = std::exp(-exponent[i]);
    fi[i] = wi[i] * q[i] * (1.0 - q[i]);
    num += fi[i];
    den += wi[i];
  }
  const double full = num / den;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double loo = (num - fi[i]) / (den - wi[i]);
    ss += (loo - full) * (loo - full);
  }
  return std::sqrt(ss * (n - 1) / static_cast<double>(n));
}

CrossoverRate crossover_rate(double rho_ab, const IntervalStats& tau, double alpha,
                             std::optional<double> rho_a) {
  if (!(tau.mean > 0)) throw NumericalFailure("crossover rate needs a positive mean time");
  CrossoverRate r;
  r.nu = rho_ab / tau.mean;
  const double t = tau.n >= 2 && tau.se > 0 ? t_quantile(alpha, tau.n - 1) : 0.0;
  r.lo = rho_ab / (tau.mean + tau.se * t);
  r.hi = rho_ab / (tau.mean - tau.se * t);
  if (rho_a) r.e_tau_a = tau.mean * (*rho_a) / rho_ab;
  return r;
}

Discrepancy weighted_discrepancy(const std::vector<double>& q_test,
                                 const std::vector<double>& q_ref,
                                 const std::vector<double>& mu) {
  const std::size_t n = q_test.size();
  if (n == 0 || q_ref.size() != n || mu.size() != n)
    throw NumericalFailure("mismatched committor value arrays");
  double wsum = 0;
  for (std::size_t i = 0; i < n; ++i) wsum += q_ref[i] * (1.0 - q_ref[i]) * mu[i];
  if (!(wsum > 0)) throw NumericalFailure("all reactive-density weights are zero");
  Discrepancy d;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = q_ref[i] * (1.0 - q_ref[i]) * mu[i] / wsum;
    const double diff = std::fabs(q_test[i] - q_ref[i]);
    d.wmae += w * diff;
    d.wrmse += w * diff * diff;
  }
  d.wrmse = std::sqrt(d.wrmse);
  return d;
}

// ---------------------------------------------------------------------------
// exact 1D benchmark
// ---------------------------------------------------------------------------

double parabola_arclength(double x) {
  const double r = std::sqrt(1.0 + 4.0 * x * x);
  return 0.5 * x * r + 0.25 * std::log(2.0 * x + r);
}

namespace {
// smallest L with a < -L, b < L such that exp(-beta(V0 - Vmin)) < 1e-18 outside
double support_cut(const std::function<double(double)>& v0, double a, double b, double beta) {
  double vmin = v0(a);
  for (int i = 0; i <= 400; ++i) {
    const double x = a + (b - a) * i / 400.0;
    vmin = std::min(vmin, v0(x));
  }
  double L = std::max(std::fabs(a), std::fabs(b)) + 1.0;
  while (L < 1e4) {
    if (beta * (v0(L) - vmin) > 42.0 && beta * (v0(-L) - vmin) > 42.0) break;
    L += 1.0;
  }
  return L;
}
}  // namespace

Oracle1DResult exact_1d_suite(const std::function<double(double)>& v0, double a, double b,
                              double beta) {
  if (!(a < b)) throw ConfigError("reactant boundary must lie left of the product boundary");
  const double L = support_cut(v0, a, b, beta);
  auto sp = [](double x) { return std::sqrt(1.0 + 4.0 * x * x); };

  const double tol = 1e-10;
  const double ib_x = integrate([&](double x) { return std::exp(beta * v0(x)); }, a, b, tol);
  const double ib_s = integrate([&](double x) { return std::exp(beta * v0(x)) * sp(x); }, a, b, tol);
  const double z_x = integrate([&](double x) { return std::exp(-beta * v0(x)); }, -L, L, tol);
  const double z_s = integrate([&](double x) { return std::exp(-beta * v0(x)) * sp(x); }, -L, L, tol);

  // committor derivative dq/dxi = exp(beta V0)/I along either coordinate;
  // cumulative value by quadrature from the reactant boundary
  auto q_of = [&](double x, bool arc) {
    const double num = arc
        ? integrate([&](double t) { return std::exp(beta * v0(t)) * sp(t); }, a, x, tol)
        : integrate([&](double t) { return std::exp(beta * v0(t)); }, a, x, tol);
    return num / (arc ? ib_s : ib_x);
  };

  Oracle1DResult r;
  // transition rate: (1/beta) Z^-1 int (dq/ds)^2 e^{-beta V0} ds
  r.nu_arc = integrate(
                 [&](double x) {
                   const double dqds = std::exp(beta * v0(x)) / ib_s;
                   return dqds * dqds * std::exp(-beta * v0(x)) * sp(x);
                 },
                 a, b, tol * 1e-3) /
             (beta * z_s);
  r.nu_x = integrate(
               [&](double x) {
                 const double dqdx = std::exp(beta * v0(x)) / ib_x;
                 return dqdx * dqdx * std::exp(-beta * v0(x));
               },
               a, b, tol * 1e-3) /
           (beta * z_x);
  // probability of being reactive; the arclength variant keeps the reference
  // normalization in x so that both coordinates share one equilibrium measure
  r.rho_arc = integrate(
                  [&](double x) {
                    const double q = q_of(x, true);
                    return std::exp(-beta * v0(x)) * q * (1.0 - q) * sp(x);
                  },
                  a, b, 1e-8) /
              z_x;
  r.rho_x = integrate(
                [&](double x) {
                  const double q = q_of(x, false);
                  return std::exp(-beta * v0(x)) * q * (1.0 - q);
                },
                a, b, 1e-8) /
            z_x;
  return r;
}

std::vector<std::pair<double, double>> exact_1d_committor(const std::function<double(double)>& v0,
                                                          double a, double b, double beta,
                                                          const std::string& cv, int n_pts) {
  const bool arc = cv == "arclength";
  if (!arc && cv != "x") throw ConfigError("reaction coordinate must be 'arclength' or 'x'");
  auto sp = [](double x) { return std::sqrt(1.0 + 4.0 * x * x); };
  auto integrand = [&](double t) { return std::exp(beta * v0(t)) * (arc ? sp(t) : 1.0); };
  const double norm = integrate(integrand, a, b, 1e-10);
  std::vector<std::pair<double, double>> out;
  out.reserve(n_pts);
  double acc = 0;
  double prev = a;
  for (int i = 0; i < n_pts; ++i) {
    const double x = a + (b - a) * i / (n_pts - 1.0);
    acc += integrate(integrand, prev, x, 1e-12);
    prev = x;
    out.emplace_back(arc ? parabola_arclength(x) : x, acc / norm);
  }
  return out;
}

}  // namespace tpt
