#pragma once

#include <array>
#include <string>
#include <vector>

#include "tpt/util.hpp"

namespace tpt {

// Rectangular table of (F, M11, M12, M22) with bilinear interpolation.
// File format: header line `grid <n1> <n2> <x1min> <x1max> <x2min> <x2max>`,
// then n1*n2 rows `F M11 M12 M22` in row-major order with the first coordinate
// fastest. Queries outside the box are clamped to it.
struct Grid2D {
  int n1 = 0, n2 = 0;
  double x1min = 0, x1max = 0, x2min = 0, x2max = 0;
  std::vector<double> f, m11, m12, m22;

  static Grid2D load(const std::string& path);
  void save(const std::string& path) const;

  double dx1() const { return (x1max - x1min) / (n1 - 1); }
  double dx2() const { return (x2max - x2min) / (n2 - 1); }

  // value and gradient of one field at (x1,x2)
  struct Sample {
    double v;
    double g1, g2;
  };
  Sample eval(const std::vector<double>& field, double x1, double x2) const;

  Sample eval_f(double x1, double x2) const { return eval(f, x1, x2); }
  // symmetric 2x2 tensor with per-entry gradients
  void eval_m(double x1, double x2, double m[3], double g1[3], double g2[3]) const;
};

}  // namespace tpt
