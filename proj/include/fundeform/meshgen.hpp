#pragma once

#include <cmath>
#include <map>
#include <random>
#include <tuple>

#include "fundeform/mesh.hpp"

namespace fundeform {
namespace meshgen {

struct MeshData {
  MatX3 V;
  MatX3i F;
};

inline MeshData icosahedron(double radius = 1.0) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  MatX3 V(12, 3);
  V << -1, phi, 0, 1, phi, 0, -1, -phi, 0, 1, -phi, 0, 0, -1, phi, 0, 1, phi, 0, -1, -phi, 0, 1,
      -phi, phi, 0, -1, phi, 0, 1, -phi, 0, -1, -phi, 0, 1;
  for (Eigen::Index i = 0; i < 12; ++i) V.row(i) *= radius / V.row(i).norm();
  MatX3i F(20, 3);
  F << 0, 11, 5, 0, 5, 1, 0, 1, 7, 0, 7, 10, 0, 10, 11, 1, 5, 9, 5, 11, 4, 11, 10, 2, 10, 7, 6, 7,
      1, 8, 3, 9, 4, 3, 4, 2, 3, 2, 6, 3, 6, 8, 3, 8, 9, 4, 9, 5, 2, 4, 11, 6, 2, 10, 8, 6, 7, 9,
      8, 1;
  return {V, F};
}

/// Icosahedron subdivided `subdiv` times, vertices projected onto the sphere
/// of the given radius. Vertex counts: 12, 42, 162, 642, ...
inline MeshData icosphere(int subdiv, double radius = 1.0) {
  MeshData m = icosahedron(1.0);
  for (int s = 0; s < subdiv; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    std::vector<Vec3> verts;
    verts.reserve(static_cast<size_t>(m.V.rows()));
    for (Eigen::Index i = 0; i < m.V.rows(); ++i) verts.push_back(m.V.row(i));
    auto mid = [&](int a, int b) {
      auto key = std::make_pair(std::min(a, b), std::max(a, b));
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 p = (verts[static_cast<size_t>(a)] + verts[static_cast<size_t>(b)]).normalized();
      verts.push_back(p);
      int idx = static_cast<int>(verts.size()) - 1;
      midpoint[key] = idx;
      return idx;
    };
    MatX3i F(m.F.rows() * 4, 3);
    for (Eigen::Index f = 0; f < m.F.rows(); ++f) {
      int a = m.F(f, 0), b = m.F(f, 1), c = m.F(f, 2);
      int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
      F.row(4 * f + 0) << a, ab, ca;
      F.row(4 * f + 1) << b, bc, ab;
      F.row(4 * f + 2) << c, ca, bc;
      F.row(4 * f + 3) << ab, bc, ca;
    }
    MatX3 V(static_cast<Eigen::Index>(verts.size()), 3);
    for (size_t i = 0; i < verts.size(); ++i)
      V.row(static_cast<Eigen::Index>(i)) = verts[i].normalized();
    m = {V, F};
  }
  m.V *= radius;
  return m;
}

/// Interpolates unit-sphere vertices toward their sup-norm projection onto
/// the unit cube: t = 0 is the sphere, t = 1 the cube.
inline MeshData sphere_cube_morph(int subdiv, double t) {
  MeshData m = icosphere(subdiv, 1.0);
  for (Eigen::Index i = 0; i < m.V.rows(); ++i) {
    Vec3 p = m.V.row(i);
    Vec3 q = p / p.cwiseAbs().maxCoeff();
    m.V.row(i) = ((1.0 - t) * p + t * q).transpose();
  }
  return m;
}

struct TetData {
  MatX3 V;
  MatX4i T;
};

/// Tet mesh of a ball: icosphere surface plus the center vertex (last index),
/// one tet per surface face.
inline TetData tet_ball(int subdiv, double radius = 1.0) {
  MeshData s = icosphere(subdiv, radius);
  TetData out;
  out.V.resize(s.V.rows() + 1, 3);
  out.V.topRows(s.V.rows()) = s.V;
  out.V.row(s.V.rows()).setZero();
  out.T.resize(s.F.rows(), 4);
  int center = static_cast<int>(s.V.rows());
  for (Eigen::Index f = 0; f < s.F.rows(); ++f)
    out.T.row(f) << center, s.F(f, 0), s.F(f, 1), s.F(f, 2);
  return out;
}

inline TetData tet_ball_morph(int subdiv, double t) {
  MeshData s = sphere_cube_morph(subdiv, t);
  TetData out;
  out.V.resize(s.V.rows() + 1, 3);
  out.V.topRows(s.V.rows()) = s.V;
  out.V.row(s.V.rows()).setZero();
  out.T.resize(s.F.rows(), 4);
  int center = static_cast<int>(s.V.rows());
  for (Eigen::Index f = 0; f < s.F.rows(); ++f)
    out.T.row(f) << center, s.F(f, 0), s.F(f, 1), s.F(f, 2);
  return out;
}

inline TetData single_tet() {
  TetData t;
  t.V.resize(4, 3);
  t.V << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1;
  t.T.resize(1, 4);
  t.T << 0, 1, 2, 3;
  return t;
}

/// Flat rectangular grid in the xy-plane, centered at the origin, open
/// boundary. nx, ny quads per side.
inline MeshData grid_plane(int nx, int ny, double lx = 1.0, double ly = 1.0) {
  MatX3 V((nx + 1) * (ny + 1), 3);
  auto vid = [&](int i, int j) { return i * (ny + 1) + j; };
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= ny; ++j)
      V.row(vid(i, j)) << (2 * i - nx) * (lx / (2 * nx)), (2 * j - ny) * (ly / (2 * ny)), 0.0;
  MatX3i F(2 * nx * ny, 3);
  Eigen::Index f = 0;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      F.row(f++) << vid(i, j), vid(i + 1, j), vid(i + 1, j + 1);
      F.row(f++) << vid(i, j), vid(i + 1, j + 1), vid(i, j + 1);
    }
  return {V, F};
}

/// Two-triangle unit square in the xy-plane with corners (0,0) and (1,1).
inline MeshData unit_square_two_tri() {
  MeshData m;
  m.V.resize(4, 3);
  m.V << 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0;
  m.F.resize(2, 3);
  m.F << 0, 1, 2, 0, 2, 3;
  return m;
}

/// Unit square split into four right triangles by a center vertex (index 4).
inline MeshData unit_square_center_fan() {
  MeshData m;
  m.V.resize(5, 3);
  m.V << 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0, 0.5, 0.5, 0;
  m.F.resize(4, 3);
  m.F << 0, 1, 4, 1, 2, 4, 2, 3, 4, 3, 0, 4;
  return m;
}

struct BoxSurface {
  MatX3 V;
  MatX3i F;
  std::vector<int> mirror_x;  // vertex map p -> (-x, y, z), exact by construction
};

/// Closed axis-aligned box surface centered at the origin, grid-subdivided,
/// with a triangulation that is exactly symmetric under x -> -x. nx must be
/// even so no quad straddles the mirror plane.
inline BoxSurface box_surface(int nx, int ny, int nz, double lx, double ly, double lz) {
  if (nx % 2 != 0) throw Error("box_surface: nx must be even");
  using Key = std::tuple<int, int, int>;
  std::map<Key, int> index;
  std::vector<Key> keys;
  auto vertex = [&](int i, int j, int k) {
    Key key{i, j, k};
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(keys.size());
    keys.push_back(key);
    index[key] = id;
    return id;
  };
  std::vector<Eigen::Vector3i> faces;
  // quad corners in outward CCW order
  auto quad = [&](int a, int b, int c, int d) {
    faces.push_back({a, b, c});
    faces.push_back({a, c, d});
  };
  // +x half of the box; the -x half is added as a mirror image below
  for (int j = 0; j < ny; ++j)
    for (int k = 0; k < nz; ++k) {
      quad(vertex(nx, j, k), vertex(nx, j + 1, k), vertex(nx, j + 1, k + 1), vertex(nx, j, k + 1));
    }
  for (int i = nx / 2; i < nx; ++i) {
    for (int k = 0; k < nz; ++k) {
      quad(vertex(i, 0, k), vertex(i + 1, 0, k), vertex(i + 1, 0, k + 1), vertex(i, 0, k + 1));
      quad(vertex(i + 1, ny, k), vertex(i, ny, k), vertex(i, ny, k + 1), vertex(i + 1, ny, k + 1));
    }
    for (int j = 0; j < ny; ++j) {
      quad(vertex(i + 1, j, 0), vertex(i, j, 0), vertex(i, j + 1, 0), vertex(i + 1, j + 1, 0));
      quad(vertex(i, j, nz), vertex(i + 1, j, nz), vertex(i + 1, j + 1, nz), vertex(i, j + 1, nz));
    }
  }
  size_t half_count = faces.size();
  auto mirrored = [&](int id) {
    auto [i, j, k] = keys[static_cast<size_t>(id)];
    return vertex(nx - i, j, k);
  };
  for (size_t f = 0; f < half_count; ++f) {
    Eigen::Vector3i t = faces[f];
    // reversed winding restores outward orientation after reflection
    faces.push_back({mirrored(t[0]), mirrored(t[2]), mirrored(t[1])});
  }

  BoxSurface out;
  out.V.resize(static_cast<Eigen::Index>(keys.size()), 3);
  for (size_t v = 0; v < keys.size(); ++v) {
    auto [i, j, k] = keys[v];
    out.V.row(static_cast<Eigen::Index>(v)) << (2 * i - nx) * (lx / (2 * nx)),
        (2 * j - ny) * (ly / (2 * ny)), (2 * k - nz) * (lz / (2 * nz));
  }
  out.F.resize(static_cast<Eigen::Index>(faces.size()), 3);
  for (size_t f = 0; f < faces.size(); ++f) out.F.row(static_cast<Eigen::Index>(f)) = faces[f];
  out.mirror_x.resize(keys.size());
  for (size_t v = 0; v < keys.size(); ++v) {
    auto [i, j, k] = keys[v];
    out.mirror_x[v] = index.at(Key{nx - i, j, k});
  }
  return out;
}

/// Closed cylinder along z with cap fans. Returns the mesh plus the face-index
/// range [barrel_begin, barrel_end) of the side wall.
struct Cylinder {
  MatX3 V;
  MatX3i F;
  Eigen::Index barrel_begin = 0;
  Eigen::Index barrel_end = 0;
};

inline Cylinder cylinder(int n_seg, int n_rings, double radius, double height) {
  std::vector<Vec3> verts;
  auto ring_vid = [&](int ring, int s) { return ring * n_seg + (s % n_seg); };
  for (int ring = 0; ring <= n_rings; ++ring) {
    double z = (2.0 * ring - n_rings) * (height / (2.0 * n_rings));
    for (int s = 0; s < n_seg; ++s) {
      double a = 2.0 * M_PI * s / n_seg;
      verts.push_back({radius * std::cos(a), radius * std::sin(a), z});
    }
  }
  int bottom_center = static_cast<int>(verts.size());
  verts.push_back({0, 0, -height / 2});
  int top_center = static_cast<int>(verts.size());
  verts.push_back({0, 0, height / 2});

  std::vector<Eigen::Vector3i> faces;
  for (int ring = 0; ring < n_rings; ++ring)
    for (int s = 0; s < n_seg; ++s) {
      int a = ring_vid(ring, s), b = ring_vid(ring, s + 1);
      int c = ring_vid(ring + 1, s + 1), d = ring_vid(ring + 1, s);
      faces.push_back({a, b, c});
      faces.push_back({a, c, d});
    }
  Eigen::Index barrel_end = static_cast<Eigen::Index>(faces.size());
  for (int s = 0; s < n_seg; ++s) {
    faces.push_back({bottom_center, ring_vid(0, s + 1), ring_vid(0, s)});
    faces.push_back({top_center, ring_vid(n_rings, s), ring_vid(n_rings, s + 1)});
  }
  Cylinder out;
  out.V.resize(static_cast<Eigen::Index>(verts.size()), 3);
  for (size_t i = 0; i < verts.size(); ++i) out.V.row(static_cast<Eigen::Index>(i)) = verts[i];
  out.F.resize(static_cast<Eigen::Index>(faces.size()), 3);
  for (size_t i = 0; i < faces.size(); ++i) out.F.row(static_cast<Eigen::Index>(i)) = faces[i];
  out.barrel_begin = 0;
  out.barrel_end = barrel_end;
  return out;
}

inline MeshData torus(int nu, int nv, double R = 1.0, double r = 0.4) {
  MatX3 V(nu * nv, 3);
  auto vid = [&](int i, int j) { return (i % nu) * nv + (j % nv); };
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      double u = 2.0 * M_PI * i / nu, v = 2.0 * M_PI * j / nv;
      V.row(vid(i, j)) << (R + r * std::cos(v)) * std::cos(u), (R + r * std::cos(v)) * std::sin(u),
          r * std::sin(v);
    }
  MatX3i F(2 * nu * nv, 3);
  Eigen::Index f = 0;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      F.row(f++) << vid(i, j), vid(i + 1, j), vid(i + 1, j + 1);
      F.row(f++) << vid(i, j), vid(i + 1, j + 1), vid(i, j + 1);
    }
  return {V, F};
}

/// Displaces each vertex along its position direction by a seeded random
/// amount in [-amplitude, amplitude]; keeps meshes generic.
inline MatX3 radial_jitter(const MatX3& V, double amplitude, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  MatX3 out = V;
  for (Eigen::Index i = 0; i < V.rows(); ++i) {
    Vec3 p = V.row(i);
    double len = p.norm();
    if (len > 1e-12) out.row(i) += (dist(rng) / len) * p.transpose();
  }
  return out;
}

inline Mat3 rotation(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

inline MatX3 rigid_transform(const MatX3& V, const Mat3& R, const Vec3& t) {
  return ((R * V.transpose()).colwise() + t).transpose();
}

}  // namespace meshgen
}  // namespace fundeform
