#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include <fundeform/fundeform.hpp>

#include "testutil.hpp"

using namespace fundeform;
namespace fs = std::filesystem;

TEST_CASE("icosahedron loads with equal face areas") {
  auto data = meshgen::icosahedron();
  TriMesh mesh = TriMesh::build(data.V, data.F);
  REQUIRE(mesh.n_vertices() == 12);
  REQUIRE(mesh.n_simplices() == 20);
  REQUIRE(mesh.closed());
  double a0 = mesh.frame(0).measure;
  for (Eigen::Index f = 0; f < 20; ++f)
    REQUIRE_THAT(mesh.frame(f).measure, Catch::Matchers::WithinRel(a0, 1e-12));
}

TEST_CASE("obj round trip is bit exact") {
  auto data = meshgen::icosphere(1);
  MatX3 V = meshgen::radial_jitter(data.V, 0.1, 3);
  TriMesh mesh = TriMesh::build(V, data.F);
  fs::path path = testutil::tmp_dir() / "roundtrip.obj";
  save_obj(mesh, path.string());
  TriMesh back = load_obj(path.string());
  REQUIRE(back.n_vertices() == mesh.n_vertices());
  for (Eigen::Index i = 0; i < V.rows(); ++i)
    for (int c = 0; c < 3; ++c) REQUIRE(back.vertices()(i, c) == V(i, c));
}

TEST_CASE("off round trip is bit exact") {
  auto data = meshgen::torus(8, 6);
  TriMesh mesh = TriMesh::build(data.V, data.F);
  fs::path path = testutil::tmp_dir() / "roundtrip.off";
  save_off(mesh, path.string());
  TriMesh back = load_off(path.string());
  for (Eigen::Index i = 0; i < data.V.rows(); ++i)
    for (int c = 0; c < 3; ++c) REQUIRE(back.vertices()(i, c) == mesh.vertices()(i, c));
  REQUIRE(back.simplices() == mesh.simplices());
}

TEST_CASE("obj with out-of-range one-based index is rejected") {
  fs::path path = testutil::tmp_dir() / "bad.obj";
  std::ofstream(path) << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n";
  REQUIRE_THROWS_AS(load_obj(path.string()), ParseError);
}

TEST_CASE("degenerate face is rejected at load") {
  fs::path path = testutil::tmp_dir() / "degenerate.obj";
  std::ofstream(path) << "v 0 0 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\n";
  REQUIRE_THROWS_AS(load_obj(path.string()), DegenerateSimplex);
}

TEST_CASE("non-manifold edge is rejected") {
  MatX3 V(5, 3);
  V << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, -1, 0;
  MatX3i F(3, 3);
  F << 0, 1, 2, 0, 3, 1, 0, 1, 4;  // edge (0,1) in three faces
  REQUIRE_THROWS_AS(TriMesh::build(V, F), NonManifold);
}

TEST_CASE("tetgen single unit corner tet") {
  fs::path base = testutil::tmp_dir() / "single";
  meshgen::TetData t = meshgen::single_tet();
  save_tetgen(TetMesh::build(t.V, t.T), base.string());
  TetMesh mesh = load_tetgen(base.string());
  REQUIRE(mesh.n_simplices() == 1);
  REQUIRE_THAT(mesh.frame(0).measure, Catch::Matchers::WithinAbs(1.0 / 6.0, 1e-15));
}

TEST_CASE("tetgen autodetects one-based indices") {
  fs::path base = testutil::tmp_dir() / "onebased";
  std::ofstream(base.string() + ".node") << "4 3 0 0\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n";
  std::ofstream(base.string() + ".ele") << "1 4 0\n1 1 2 3 4\n";
  TetMesh mesh = load_tetgen(base.string());
  REQUIRE_THAT(mesh.frame(0).measure, Catch::Matchers::WithinAbs(1.0 / 6.0, 1e-15));
}

TEST_CASE("tet orientation is fixed to positive volume") {
  meshgen::TetData t = meshgen::single_tet();
  std::swap(t.T(0, 0), t.T(0, 1));  // invert orientation
  TetMesh mesh = TetMesh::build(t.V, t.T);
  REQUIRE(mesh.frame(0).measure > 0);
  REQUIRE(std::abs(mesh.frame(0).E.determinant()) > 0.5);
}

TEST_CASE("face frame matches the cross product area formula") {
  SECTION("right unit triangle") {
    MatX3 V(3, 3);
    V << 0, 0, 0, 1, 0, 0, 0, 1, 0;
    MatX3i F(1, 3);
    F << 0, 1, 2;
    TriMesh mesh = TriMesh::build(V, F);
    REQUIRE_THAT(mesh.frame(0).G.determinant(), Catch::Matchers::WithinAbs(1.0, 1e-14));
    REQUIRE_THAT(mesh.frame(0).measure, Catch::Matchers::WithinAbs(0.5, 1e-14));
  }
  SECTION("equilateral side one") {
    MatX3 V(3, 3);
    V << 0, 0, 0, 1, 0, 0, 0.5, std::sqrt(3.0) / 2.0, 0;
    MatX3i F(1, 3);
    F << 0, 1, 2;
    TriMesh mesh = TriMesh::build(V, F);
    REQUIRE_THAT(mesh.frame(0).measure,
                 Catch::Matchers::WithinAbs(std::sqrt(3.0) / 4.0, 1e-14));
  }
  SECTION("half sqrt det G equals cross product area on a generic mesh") {
    auto data = meshgen::icosphere(2);
    TriMesh mesh = TriMesh::build(meshgen::radial_jitter(data.V, 0.05, 11), data.F);
    for (Eigen::Index f = 0; f < mesh.n_simplices(); ++f) {
      const auto& fr = mesh.frame(f);
      double from_gram = 0.5 * std::sqrt(fr.G.determinant());
      REQUIRE_THAT(from_gram, Catch::Matchers::WithinRel(fr.measure, 1e-13));
    }
  }
}

TEST_CASE("frame columns reconstruct all three edges") {
  auto data = meshgen::icosphere(1);
  TriMesh mesh = TriMesh::build(data.V, data.F);
  for (Eigen::Index f = 0; f < mesh.n_simplices(); ++f) {
    Vec3 pi = mesh.vertices().row(mesh.simplices()(f, 0));
    Vec3 pj = mesh.vertices().row(mesh.simplices()(f, 1));
    Vec3 pk = mesh.vertices().row(mesh.simplices()(f, 2));
    const auto& E = mesh.frame(f).E;
    REQUIRE((E.col(0) - (pi - pj)).norm() == 0.0);
    REQUIRE((E.col(1) - (pj - pk)).norm() == 0.0);
    // e_ki closes the loop
    REQUIRE((E.col(0) + E.col(1) + (pk - pi)).norm() < 1e-15);
  }
}

TEST_CASE("enclosed volume matches the analytic sphere volume") {
  auto data = meshgen::icosphere(3);
  TriMesh mesh = TriMesh::build(data.V, data.F);
  double analytic = 4.0 * M_PI / 3.0;
  REQUIRE_THAT(mesh.enclosed_volume(), Catch::Matchers::WithinRel(analytic, 0.02));
  REQUIRE(mesh.enclosed_volume() > 0);
}

TEST_CASE("sum of signed tet volumes of a closed box equals its volume") {
  auto box = meshgen::box_surface(4, 2, 2, 2.0, 1.0, 1.0);
  TriMesh mesh = TriMesh::build(box.V, box.F);
  REQUIRE_THAT(mesh.enclosed_volume(), Catch::Matchers::WithinRel(2.0, 1e-12));
}

TEST_CASE("vertex normals") {
  SECTION("icosphere normals are radial within 2 degrees") {
    auto data = meshgen::icosphere(2);
    TriMesh mesh = TriMesh::build(data.V, data.F);
    MatX3 normals = mesh.vertex_normals();
    for (Eigen::Index v = 0; v < mesh.n_vertices(); ++v) {
      Vec3 radial = mesh.vertices().row(v).normalized();
      double angle = std::acos(std::clamp(radial.dot(Vec3(normals.row(v))), -1.0, 1.0));
      REQUIRE(angle < 2.0 * M_PI / 180.0);
    }
  }
  SECTION("flat patch interior normal is exactly e_z") {
    auto data = meshgen::grid_plane(4, 4);
    TriMesh mesh = TriMesh::build(data.V, data.F);
    MatX3 normals = mesh.vertex_normals();
    for (Eigen::Index v = 0; v < mesh.n_vertices(); ++v) {
      REQUIRE(normals(v, 0) == 0.0);
      REQUIRE(normals(v, 1) == 0.0);
      REQUIRE(normals(v, 2) == 1.0);
    }
  }
  SECTION("corner with three equal right triangles averages the axis normals") {
    MatX3 V(4, 3);
    V << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1;
    MatX3i F(3, 3);
    F << 0, 1, 2, 0, 2, 3, 0, 3, 1;  // outward normals +z, +x, +y
    TriMesh mesh = TriMesh::build(V, F);
    Vec3 n0 = mesh.vertex_normals().row(0);
    Vec3 expect = Vec3(1, 1, 1) / std::sqrt(3.0);
    REQUIRE((n0 - expect).norm() < 1e-14);
  }
}

TEST_CASE("outward normals flip with inverted orientation") {
  auto data = meshgen::icosphere(1);
  MatX3i flipped = data.F;
  flipped.col(1).swap(flipped.col(2));
  TriMesh inward = TriMesh::build(data.V, flipped);
  REQUIRE(inward.enclosed_volume() < 0);
  MatX3 n = inward.outward_vertex_normals();
  for (Eigen::Index v = 0; v < inward.n_vertices(); ++v)
    REQUIRE(Vec3(n.row(v)).dot(Vec3(inward.vertices().row(v))) > 0);
}

TEST_CASE("field size mismatch is rejected") {
  auto data = meshgen::icosphere(1);
  TriMesh mesh = TriMesh::build(data.V, data.F);
  MatX3 field = MatX3::Zero(7, 3);
  REQUIRE_THROWS_AS(check_field(mesh, field), Error);
}

TEST_CASE("matrix io round trips in both formats") {
  MatX m = MatX::Random(7, 5);
  fs::path ascii = testutil::tmp_dir() / "mat.txt";
  fs::path binary = testutil::tmp_dir() / "mat.bin";
  save_matrix_ascii(m, ascii.string());
  save_matrix_binary(m, binary.string());
  MatX a = load_matrix(ascii.string());
  MatX b = load_matrix(binary.string());
  REQUIRE(a == m);
  REQUIRE(b == m);
}

TEST_CASE("field io round trips") {
  MatX3 f = MatX3::Random(11, 3);
  fs::path path = testutil::tmp_dir() / "field.txt";
  save_field(f, path.string());
  MatX3 back = load_field(path.string());
  REQUIRE(back == f);
}
