#include <doctest.h>

#include <cmath>

#include "tpt/fem.hpp"
#include "tpt/mesh.hpp"
#include "tpt/models.hpp"

using namespace tpt;

namespace {
TensorField identity_tensor() {
  return [](double, double, double m[3]) {
    m[0] = 1;
    m[1] = 0;
    m[2] = 1;
  };
}
ScalarField zero_field() {
  return [](double, double) { return 0.0; };
}
}  // namespace

TEST_CASE("single-triangle element matrix equals the hand-integrated stiffness") {
  // reference triangle (0,0), (1,0), (0,1):P1 stiffness matrix is
  // [[1, -1/2, -1/2], [-1/2, 1/2, 0], [-1/2, 0, 1/2]]
  TriMesh mesh;
  mesh.nodes = {{0, 0}, {1, 0}, {0, 1}};
  mesh.tris = {{0, 1, 2}};
  mesh.tag = {kTagInterior, kTagInterior, kTagInterior};

  SpMat a;
  Vec rhs;
  std::vector<int> free_nodes;
  assemble_reversible(mesh, zero_field(), identity_tensor(), 3.7, a, rhs, free_nodes);
  REQUIRE(free_nodes.size() == 3);
  Mat dense = Mat(a);
  Mat expect(3, 3);
  expect << 1.0, -0.5, -0.5, -0.5, 0.5, 0.0, -0.5, 0.0, 0.5;
  CHECK((dense - expect).norm() <= 1e-14);

  // doubling the tensor doubles every entry
  SpMat a2;
  assemble_reversible(
      mesh, zero_field(),
      [](double, double, double m[3]) {
        m[0] = 2;
        m[1] = 0;
        m[2] = 2;
      },
      3.7, a2, rhs, free_nodes);
  CHECK((Mat(a2) - 2.0 * dense).norm() <= 1e-14);

  // exact symmetry
  CHECK((dense - dense.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("solve_system basics") {
  SpMat eye(3, 3);
  eye.setIdentity();
  Vec b(3);
  b << 1, 2, 3;
  CHECK((solve_system(eye, b, true) - b).norm() == 0.0);

  SpMat a(2, 2);
  a.insert(0, 0) = 2;
  a.insert(0, 1) = 1;
  a.insert(1, 0) = 1;
  a.insert(1, 1) = 2;
  a.makeCompressed();
  Vec r(2);
  r << 1, 1;
  Vec x = solve_system(a, r, true);
  CHECK(x[0] == doctest::Approx(1.0 / 3.0));
  CHECK(x[1] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("annulus committor matches the harmonic solution") {
  MeshSpec spec;
  spec.domain = MeshSpec::Domain::Annulus;
  spec.ann_r0 = 1;
  spec.ann_r1 = 2;
  spec.bbox[0] = -2.2;
  spec.bbox[1] = 2.2;
  spec.bbox[2] = -2.2;
  spec.bbox[3] = 2.2;
  spec.h = 0.02;
  auto mesh = generate_mesh(spec);
  auto sol = solve_committor_reversible(mesh, zero_field(), identity_tensor(), 1.0);

  // discrete maximum principle
  CHECK(sol.nodal().minCoeff() >= -1e-8);
  CHECK(sol.nodal().maxCoeff() <= 1.0 + 1e-8);

  double max_err = 0;
  for (std::size_t i = 0; i < mesh.n_nodes(); ++i) {
    const double r = std::hypot(mesh.nodes[i][0], mesh.nodes[i][1]);
    const double exact = std::log(std::max(r, 1.0) / 1.0) / std::log(2.0);
    max_err = std::max(max_err, std::fabs(sol.nodal()[i] - std::min(exact, 1.0)));
  }
  CHECK(max_err <= 5e-3);

  // boundary values exact
  for (std::size_t i = 0; i < mesh.n_nodes(); ++i) {
    if (mesh.tag[i] == kTagBdryA) CHECK(sol.nodal()[i] == 0.0);
    if (mesh.tag[i] == kTagBdryB) CHECK(sol.nodal()[i] == 1.0);
  }

  // interpolation: nodal values are reproduced exactly, gradients are radial
  Vec xy(2), grad(2);
  xy << 1.5, 0.0;
  const double q = sol.eval(xy, &grad);
  CHECK(q == doctest::Approx(std::log(1.5) / std::log(2.0)).epsilon(2e-3));
  CHECK(grad[0] == doctest::Approx(1.0 / (1.5 * std::log(2.0))).epsilon(5e-2));
  CHECK(std::fabs(grad[1]) < 0.05);
}

TEST_CASE("linear fields are reproduced exactly") {
  MeshSpec spec;
  spec.domain = MeshSpec::Domain::Rectangle;
  spec.bbox[0] = 0;
  spec.bbox[1] = 1;
  spec.bbox[2] = 0;
  spec.bbox[3] = 1;
  spec.h = 0.2;
  auto mesh = generate_mesh(spec);
  Vec nodal(mesh.n_nodes());
  for (std::size_t i = 0; i < mesh.n_nodes(); ++i) nodal[i] = mesh.nodes[i][0];
  FemSolution sol(mesh, nodal, "test", 1.0);
  Vec xy(2), grad(2);
  xy << 0.37, 0.61;
  CHECK(sol.eval(xy, &grad) == doctest::Approx(0.37).epsilon(1e-12));
  CHECK(grad[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(grad[1] == doctest::Approx(0.0));

  // a node is reproduced exactly
  xy << mesh.nodes[5][0], mesh.nodes[5][1];
  CHECK(sol.eval(xy) == doctest::Approx(nodal[5]).epsilon(1e-12));

  // outside point flagged as extrapolated
  bool extra = false;
  xy << 2.5, 2.5;
  sol.eval(xy, nullptr, &extra);
  CHECK(extra);
}

TEST_CASE("annulus convergence under spacing halving") {
  auto run = [&](double h) {
    MeshSpec spec;
    spec.domain = MeshSpec::Domain::Annulus;
    spec.ann_r0 = 1;
    spec.ann_r1 = 2;
    spec.bbox[0] = -2.2;
    spec.bbox[1] = 2.2;
    spec.bbox[2] = -2.2;
    spec.bbox[3] = 2.2;
    spec.h = h;
    auto mesh = generate_mesh(spec);
    auto sol = solve_committor_reversible(mesh, zero_field(), identity_tensor(), 1.0);
    double max_err = 0;
    for (std::size_t i = 0; i < mesh.n_nodes(); ++i) {
      const double r = std::hypot(mesh.nodes[i][0], mesh.nodes[i][1]);
      const double exact = std::log(std::min(std::max(r, 1.0), 2.0)) / std::log(2.0);
      max_err = std::max(max_err, std::fabs(sol.nodal()[i] - exact));
    }
    return max_err;
  };
  const double e1 = run(0.04);
  const double e2 = run(0.02);
  CHECK(e2 < 0.5 * e1);
}
