#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "tpt/models.hpp"
#include "tpt/util.hpp"

namespace tpt {

// node tags
inline constexpr int kTagInterior = 0;
inline constexpr int kTagBdryA = 1;
inline constexpr int kTagBdryB = 2;
inline constexpr int kTagOuter = 3;

struct TriMesh {
  std::vector<std::array<double, 2>> nodes;
  std::vector<std::array<int, 3>> tris;  // counterclockwise
  std::vector<int> tag;

  std::size_t n_nodes() const { return nodes.size(); }
  std::size_t n_tris() const { return tris.size(); }
  double tri_area(std::size_t t) const;
  std::array<double, 2> centroid(std::size_t t) const;
  // constant P1 basis gradients on a triangle, g[i] = grad of the hat
  // function of local node i
  void p1_gradients(std::size_t t, std::array<std::array<double, 2>, 3>& g, double& area) const;
};

// Delaunay triangulation of a planar point set (no constraints); ties on the
// circumcircle are broken deterministically.
std::vector<std::array<int, 3>> delaunay(const std::vector<std::array<double, 2>>& pts);

struct MeshSpec {
  enum class Domain { Sublevel, Rectangle, Annulus };
  Domain domain = Domain::Rectangle;

  std::function<double(double, double)> level_fn;  // sublevel: f(x,y) <= level
  double level = 0;
  double bbox[4] = {0, 1, 0, 1};  // xmin, xmax, ymin, ymax (rectangle bounds or search box)
  double ann_cx = 0, ann_cy = 0, ann_r0 = 1, ann_r1 = 2;

  const Region* region_a = nullptr;  // 2D ball or ellipse; meshed as holes
  const Region* region_b = nullptr;
  double h = 0.05;
  std::uint64_t seed = 1;
};

TriMesh generate_mesh(const MeshSpec& spec);

// Triangle-style files: `.node` with `<n> 2 0 1` then `<id> <x> <y> <tag>`,
// `.ele` with `<m> 3 0` then `<id> <n1> <n2> <n3>`; ids are 1-based.
TriMesh import_mesh(const std::string& node_path, const std::string& ele_path);
void export_mesh(const TriMesh& mesh, const std::string& node_path, const std::string& ele_path);

// closed level-set contour f = level traced on a fine grid, resampled to
// roughly equal arclength spacing
std::vector<std::vector<std::array<double, 2>>> trace_contours(
    const std::function<double(double, double)>& f, double level, const double bbox[4], int n_grid);

}  // namespace tpt
