#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include <fundeform/fundeform.hpp>

#include "testutil.hpp"

using namespace fundeform;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

TriMesh bumpy_torus(uint64_t seed = 17) {
  auto data = meshgen::torus(14, 10);
  return TriMesh::build(meshgen::radial_jitter(data.V, 0.02, seed), data.F);
}

std::vector<int> identity_map(Eigen::Index n) {
  std::vector<int> m(static_cast<size_t>(n));
  std::iota(m.begin(), m.end(), 0);
  return m;
}

}  // namespace

TEST_CASE("modified stiffness") {
  auto data = meshgen::grid_plane(10, 10);
  TriMesh M = TriMesh::build(data.V, data.F);
  SECTION("equals the plain stiffness when every area ratio is one") {
    MatX3 sheared = data.V;
    sheared.col(0) += 0.3 * sheared.col(1);  // per-triangle area preserving
    TriMesh N = TriMesh::build(sheared, data.F);
    SpMat WMN = modified_stiffness(M, N);
    SpMat WN = stiffness(N);
    REQUIRE((MatX(WMN) - MatX(WN)).norm() < 1e-12 * MatX(WN).norm());
  }
  SECTION("symmetric with zero row sums") {
    MatX3 stretched = data.V;
    stretched.col(0) *= 1.4;
    TriMesh N = TriMesh::build(stretched, data.F);
    SpMat WMN = modified_stiffness(M, N);
    REQUIRE((MatX(WMN) - MatX(WMN).transpose()).norm() == 0.0);
    REQUIRE((WMN * VecX::Ones(M.n_vertices())).cwiseAbs().maxCoeff() < 1e-12);
  }
  SECTION("connectivity mismatch is rejected") {
    auto other = meshgen::grid_plane(9, 10);
    TriMesh N = TriMesh::build(other.V, other.F);
    REQUIRE_THROWS_AS(modified_stiffness(M, N), ConnectivityMismatch);
  }
}

TEST_CASE("same-connectivity shape differences") {
  TriMesh M = bumpy_torus();
  ReducedBasis basis = eigenbasis(M, 16);
  MatX I = MatX::Identity(16, 16);

  SECTION("identical meshes give identity for all kinds") {
    for (auto kind : {ShapeDiffKind::Area, ShapeDiffKind::Conformal, ShapeDiffKind::Unified}) {
      MatX D = shape_difference_same_conn(M, M, basis, kind);
      REQUIRE((D - I).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
  SECTION("rigid motion gives identity for the unified kind") {
    MatX3 moved = meshgen::rigid_transform(M.vertices(), meshgen::rotation({1, 2, 3}, 0.7),
                                           Vec3(0.4, -0.1, 2.0));
    TriMesh N = TriMesh::build(moved, M.simplices());
    MatX D = shape_difference_same_conn(M, N, basis, ShapeDiffKind::Unified);
    REQUIRE((D - I).norm() <= 1e-8);
  }
  SECTION("uniform scale: unified and area pick up the expected factors") {
    const double s = 1.3;
    TriMesh N = TriMesh::build(MatX3(s * M.vertices()), M.simplices());
    MatX DU = shape_difference_same_conn(M, N, basis, ShapeDiffKind::Unified);
    MatX expectU = I / (s * s);
    expectU(0, 0) = 1.0;  // identity on constants
    REQUIRE((DU - expectU).cwiseAbs().maxCoeff() < 1e-6);
    MatX DA = shape_difference_same_conn(M, N, basis, ShapeDiffKind::Area);
    REQUIRE((DA - s * s * I).cwiseAbs().maxCoeff() < 1e-8);
    // Cotangent weights are scale invariant, so a uniform scale is exactly
    // conformal and the conformal kind stays at identity.
    MatX DC = shape_difference_same_conn(M, N, basis, ShapeDiffKind::Conformal);
    REQUIRE((DC - I).cwiseAbs().maxCoeff() < 1e-8);
  }
  SECTION("a 20 percent stretch is far from identity") {
    MatX3 stretched = M.vertices();
    stretched.col(0) *= 1.2;
    TriMesh N = TriMesh::build(stretched, M.simplices());
    MatX D = shape_difference_same_conn(M, N, basis, ShapeDiffKind::Unified);
    REQUIRE((D - I).norm() >= 0.1);
  }
}

TEST_CASE("functional-map shape differences") {
  SECTION("identity map and equal spectra give identity") {
    TriMesh M = bumpy_torus();
    ReducedBasis basis = eigenbasis(M, 12);
    MatX C = MatX::Identity(12, 12);
    MatX D = shape_difference_fmap(basis, basis.lambda, C, ShapeDiffKind::Unified);
    REQUIRE((D - MatX::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-12);
  }
  SECTION("ground-truth map of a rigid copy gives identity") {
    TriMesh M = bumpy_torus();
    ReducedBasis bM = eigenbasis(M, 12);
    MatX3 moved = meshgen::rigid_transform(M.vertices(), meshgen::rotation({0, 0, 1}, 1.1),
                                           Vec3(1, 2, 3));
    TriMesh N = TriMesh::build(moved, M.simplices());
    ReducedBasis bN = eigenbasis(N, 12);
    MatX C = fmap_from_pointmap(identity_map(N.n_vertices()), bM, bN, lumped_mass(N));
    MatX D = shape_difference_fmap(bM, bN.lambda, C, ShapeDiffKind::Unified);
    REQUIRE((D - MatX::Identity(12, 12)).norm() <= 1e-6);
  }
  SECTION("sheared plane: area kind deviates far less than conformal kind") {
    auto data = meshgen::grid_plane(16, 16);
    TriMesh M = TriMesh::build(data.V, data.F);
    ReducedBasis bM = eigenbasis(M, 8);
    MatX3 sheared = data.V;
    sheared.col(0) += 0.3 * sheared.col(1);
    TriMesh N = TriMesh::build(sheared, data.F);
    ReducedBasis bN = eigenbasis(N, 8);
    MatX C = fmap_from_pointmap(identity_map(N.n_vertices()), bM, bN, lumped_mass(N));
    MatX I = MatX::Identity(8, 8);
    double area_dev = (shape_difference_fmap(bM, bN.lambda, C, ShapeDiffKind::Area) - I).norm();
    double conf_dev =
        (shape_difference_fmap(bM, bN.lambda, C, ShapeDiffKind::Conformal) - I).norm();
    REQUIRE(area_dev <= 0.3 * conf_dev);
  }
  SECTION("singular map is rejected") {
    TriMesh M = bumpy_torus();
    ReducedBasis basis = eigenbasis(M, 6);
    MatX C = MatX::Zero(6, 6);
    REQUIRE_THROWS_AS(shape_difference_fmap(basis, basis.lambda, C, ShapeDiffKind::Unified),
                      SingularMap);
  }
}

TEST_CASE("infinitesimal shape differences") {
  SECTION("divergence-free field on a flat patch has vanishing area part") {
    auto data = meshgen::grid_plane(12, 12);
    TriMesh mesh = TriMesh::build(data.V, data.F);
    ReducedBasis basis = eigenbasis(mesh, 10);
    // rotated gradient of the harmonic x^2 - y^2: a linear, trace-free field
    MatX3 field(mesh.n_vertices(), 3);
    for (Eigen::Index v = 0; v < mesh.n_vertices(); ++v) {
      double x = mesh.vertices()(v, 0), y = mesh.vertices()(v, 1);
      field.row(v) << 2.0 * y, 2.0 * x, 0.0;
    }
    auto ops = infinitesimal_shape_diffs(mesh, field, basis);
    REQUIRE(ops.area.norm() <= 1e-3 * ops.conformal.norm());
    REQUIRE(ops.conformal.norm() > 1e-3);
  }
  SECTION("rigid fields vanish for all three") {
    TriMesh mesh = bumpy_torus();
    ReducedBasis basis = eigenbasis(mesh, 10);
    MatX3 rigid = testutil::constant_field(mesh.n_vertices(), {1, -1, 0.5}) +
                  testutil::infinitesimal_rotation_field(mesh.vertices(), {0.3, 0.3, -1.0});
    auto ops = infinitesimal_shape_diffs(mesh, rigid, basis);
    REQUIRE(ops.area.norm() < 1e-12 * mesh.n_vertices());
    REQUIRE(ops.conformal.norm() < 1e-11 * mesh.n_vertices());
    REQUIRE(ops.unified.norm() < 1e-11 * mesh.n_vertices());
  }
  SECTION("unified part shares the strain-matrix code path") {
    TriMesh mesh = bumpy_torus();
    ReducedBasis basis = eigenbasis(mesh, 10);
    MatX3 field = testutil::random_field(mesh.n_vertices(), 77);
    auto ops = infinitesimal_shape_diffs(mesh, field, basis);
    MatX direct = deformation_operator(mesh, field, basis).reduced;
    REQUIRE((ops.unified - direct).norm() == 0.0);
  }
}

TEST_CASE("exact decomposition between the infinitesimal kinds") {
  TriMesh mesh = bumpy_torus(19);
  MatX3 field = testutil::random_field(mesh.n_vertices(), 101);
  SpMat H = assemble_strain_matrix(mesh, field);
  SpMat K = divergence_weighted_stiffness(mesh, field);
  SpMat WEc = K + H;  // conformal pairing matrix
  for (uint64_t seed = 0; seed < 100; ++seed) {
    VecX f = testutil::random_vector(mesh.n_vertices(), 1000 + seed);
    VecX g = testutil::random_vector(mesh.n_vertices(), 2000 + seed);
    double lhs = f.dot(WEc * g);
    double rhs = f.dot(H * g) + testutil::div_dirichlet_quadrature_oracle(mesh, field, f, g);
    REQUIRE_THAT(lhs, WithinAbs(rhs, 1e-12 * (std::abs(rhs) + std::abs(lhs) + 1.0)));
  }
}

TEST_CASE("derivative of the unified difference is the strain operator") {
  TriMesh mesh = bumpy_torus(23);
  ReducedBasis basis = eigenbasis(mesh, 12);
  MatX3 field = testutil::random_field(mesh.n_vertices(), 55);
  MatX expected = deformation_operator(mesh, field, basis).reduced;
  double prev_err = -1.0;
  for (double t : {1e-3, 1e-4}) {
    TriMesh plus = TriMesh::build(MatX3(mesh.vertices() + t * field), mesh.simplices());
    TriMesh minus = TriMesh::build(MatX3(mesh.vertices() - t * field), mesh.simplices());
    MatX dp = shape_difference_same_conn(mesh, plus, basis, ShapeDiffKind::Unified);
    MatX dm = shape_difference_same_conn(mesh, minus, basis, ShapeDiffKind::Unified);
    MatX fd = (dp - dm) / (2.0 * t);
    double err = (fd - expected).norm() / expected.norm();
    if (prev_err > 0) {
      REQUIRE(prev_err / err > 50.0);
      REQUIRE(prev_err / err < 200.0);
    }
    prev_err = err;
  }
  REQUIRE(prev_err < 1e-5);
}

TEST_CASE("collection embedding") {
  SECTION("rigid motions collapse to a point") {
    TriMesh base = bumpy_torus(29);
    std::vector<TriMesh> shapes;
    for (double angle : {0.3, 1.0, 2.2, 2.9}) {
      MatX3 moved = meshgen::rigid_transform(base.vertices(), meshgen::rotation({1, 0, 2}, angle),
                                             Vec3(angle, 0, -angle));
      shapes.push_back(TriMesh::build(moved, base.simplices()));
    }
    ReducedBasis basis = eigenbasis(base, 12);
    auto emb = collection_embedding(base, shapes, basis, ShapeDiffKind::Unified);
    REQUIRE(emb.coords.cwiseAbs().maxCoeff() < 1e-8);
  }
  SECTION("shear family: area spread is negligible next to unified spread") {
    auto data = meshgen::grid_plane(12, 12);
    TriMesh base = TriMesh::build(data.V, data.F);
    std::vector<TriMesh> shapes;
    for (double t : {0.0, 0.1, 0.2, 0.3}) {
      MatX3 sheared = data.V;
      sheared.col(0) += t * sheared.col(1);
      shapes.push_back(TriMesh::build(sheared, data.F));
    }
    ReducedBasis basis = eigenbasis(base, 12);
    auto spread = [](const MatX& coords) {
      double m = 0.0;
      for (Eigen::Index a = 0; a < coords.rows(); ++a)
        for (Eigen::Index b = a + 1; b < coords.rows(); ++b)
          m = std::max(m, (coords.row(a) - coords.row(b)).norm());
      return m;
    };
    double area_spread =
        spread(collection_embedding(base, shapes, basis, ShapeDiffKind::Area).coords);
    double unified_spread =
        spread(collection_embedding(base, shapes, basis, ShapeDiffKind::Unified).coords);
    REQUIRE(unified_spread > 1e-3);
    REQUIRE(area_spread <= 0.01 * unified_spread);
  }
  SECTION("scale family: unified embeds as a monotone curve, conformal collapses") {
    TriMesh base = bumpy_torus(31);
    std::vector<TriMesh> shapes;
    std::vector<double> scales = {1.0, 1.1, 1.2, 1.3};
    for (double s : scales)
      shapes.push_back(TriMesh::build(MatX3(s * base.vertices()), base.simplices()));
    ReducedBasis basis = eigenbasis(base, 12);
    auto emb = collection_embedding(base, shapes, basis, ShapeDiffKind::Unified);
    double direction = emb.coords(1, 0) - emb.coords(0, 0);
    REQUIRE(std::abs(direction) > 1e-8);
    for (Eigen::Index i = 0; i + 1 < emb.coords.rows(); ++i)
      REQUIRE((emb.coords(i + 1, 0) - emb.coords(i, 0)) * direction > 0.0);
    // second axis carries nothing: the family is one-dimensional
    REQUIRE(emb.coords.col(1).cwiseAbs().maxCoeff() <
            1e-6 * emb.coords.col(0).cwiseAbs().maxCoeff());
    auto conf = collection_embedding(base, shapes, basis, ShapeDiffKind::Conformal);
    REQUIRE(conf.coords.cwiseAbs().maxCoeff() < 1e-7);
  }
}
