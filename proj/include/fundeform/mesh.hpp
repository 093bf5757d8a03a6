#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>

#include "fundeform/common.hpp"

namespace fundeform {

// Per-face frame. E holds the paired edge directions (p_i - p_j, p_j - p_k)
// for face (i, j, k); every downstream formula assumes this column order.
struct FaceFrame {
  Mat32 E;
  Mat2 G;      // E^T E, symmetric positive definite
  Mat2 Ginv;
  double measure = 0.0;  // triangle area
  Vec3 normal = Vec3::Zero();
};

struct TetFrame {
  Mat3 E;      // columns (p_i - p_j, p_j - p_k, p_k - p_l)
  Mat3 G;
  Mat3 Ginv;
  double measure = 0.0;  // tet volume
};

namespace detail {

// Difference matrices mapping simplex vertex values to edge differences,
// matching the column order of the frame's E.
inline const Eigen::Matrix<double, 2, 3>& tri_diff() {
  static const Eigen::Matrix<double, 2, 3> d = [] {
    Eigen::Matrix<double, 2, 3> m;
    m << 1, -1, 0, 0, 1, -1;
    return m;
  }();
  return d;
}

inline const Eigen::Matrix<double, 3, 4>& tet_diff() {
  static const Eigen::Matrix<double, 3, 4> d = [] {
    Eigen::Matrix<double, 3, 4> m;
    m << 1, -1, 0, 0, 0, 1, -1, 0, 0, 0, 1, -1;
    return m;
  }();
  return d;
}

}  // namespace detail

/// Immutable manifold triangle mesh with per-face frames.
class TriMesh {
 public:
  static constexpr int simplex_size = 3;
  using Frame = FaceFrame;
  using SimplexMatrix = MatX3i;

  static TriMesh build(MatX3 vertices, MatX3i faces) {
    TriMesh mesh;
    mesh.V_ = std::move(vertices);
    mesh.F_ = std::move(faces);
    mesh.validate_and_precompute();
    return mesh;
  }

  Eigen::Index n_vertices() const { return V_.rows(); }
  Eigen::Index n_simplices() const { return F_.rows(); }
  const MatX3& vertices() const { return V_; }
  const MatX3i& simplices() const { return F_; }
  const std::vector<FaceFrame>& frames() const { return frames_; }
  const FaceFrame& frame(Eigen::Index f) const { return frames_[static_cast<size_t>(f)]; }
  bool closed() const { return closed_; }
  double total_measure() const { return total_measure_; }

  double bbox_diagonal() const {
    return (V_.colwise().maxCoeff() - V_.colwise().minCoeff()).norm();
  }

  /// Signed volume enclosed by the surface (positive for outward-oriented
  /// closed meshes); the divergence-theorem sum of cone volumes at the origin.
  double enclosed_volume() const {
    double vol = 0.0;
    for (Eigen::Index f = 0; f < F_.rows(); ++f) {
      Vec3 a = V_.row(F_(f, 0)), b = V_.row(F_(f, 1)), c = V_.row(F_(f, 2));
      vol += a.dot(b.cross(c)) / 6.0;
    }
    return vol;
  }

  /// Area-weighted vertex normals, normalized per vertex.
  MatX3 vertex_normals() const {
    MatX3 normals = MatX3::Zero(n_vertices(), 3);
    for (Eigen::Index f = 0; f < F_.rows(); ++f) {
      const FaceFrame& fr = frames_[static_cast<size_t>(f)];
      for (int c = 0; c < 3; ++c) normals.row(F_(f, c)) += fr.measure * fr.normal.transpose();
    }
    for (Eigen::Index v = 0; v < n_vertices(); ++v) {
      double len = normals.row(v).norm();
      if (len <= 1e-12 * total_measure_)
        throw ZeroNormal("vertex " + std::to_string(v) + ": area-weighted normal sum vanishes");
      normals.row(v) /= len;
    }
    return normals;
  }

  /// Vertex normals flipped, if needed, so that the enclosed volume is
  /// positive. Only meaningful for closed meshes.
  MatX3 outward_vertex_normals() const {
    if (!closed_) throw Error("outward normals require a closed mesh");
    MatX3 n = vertex_normals();
    if (enclosed_volume() < 0) n = -n;
    return n;
  }

  bool connected() const { return connected_; }

 private:
  void validate_and_precompute() {
    const Eigen::Index n = V_.rows();
    if (!V_.allFinite()) throw ParseError("non-finite vertex coordinates");
    if (F_.minCoeff() < 0 || F_.maxCoeff() >= n) throw ParseError("face index out of range");

    // Manifold and orientation checks: an undirected edge may be shared by at
    // most two faces, and consistently oriented meshes never repeat a
    // directed edge.
    std::map<std::pair<int, int>, int> undirected;
    std::map<std::pair<int, int>, int> directed;
    for (Eigen::Index f = 0; f < F_.rows(); ++f) {
      for (int c = 0; c < 3; ++c) {
        int a = F_(f, c), b = F_(f, (c + 1) % 3);
        if (a == b) throw DegenerateSimplex("face " + std::to_string(f) + " repeats a vertex");
        undirected[{std::min(a, b), std::max(a, b)}]++;
        directed[{a, b}]++;
      }
    }
    for (const auto& [e, cnt] : undirected)
      if (cnt > 2)
        throw NonManifold("edge (" + std::to_string(e.first) + "," + std::to_string(e.second) +
                          ") shared by " + std::to_string(cnt) + " faces");
    for (const auto& [e, cnt] : directed)
      if (cnt > 1)
        throw NonManifold("inconsistent orientation at edge (" + std::to_string(e.first) + "," +
                          std::to_string(e.second) + ")");
    closed_ = std::all_of(undirected.begin(), undirected.end(),
                          [](const auto& kv) { return kv.second == 2; });

    frames_.resize(static_cast<size_t>(F_.rows()));
    total_measure_ = 0.0;
    const double scale2 = (V_.colwise().maxCoeff() - V_.colwise().minCoeff()).squaredNorm();
    for (Eigen::Index f = 0; f < F_.rows(); ++f) {
      Vec3 pi = V_.row(F_(f, 0)), pj = V_.row(F_(f, 1)), pk = V_.row(F_(f, 2));
      FaceFrame& fr = frames_[static_cast<size_t>(f)];
      fr.E.col(0) = pi - pj;
      fr.E.col(1) = pj - pk;
      fr.G = fr.E.transpose() * fr.E;
      Vec3 cross = (pj - pi).cross(pk - pi);
      fr.measure = 0.5 * cross.norm();
      if (!(fr.measure > 1e-14 * scale2))
        throw DegenerateSimplex("face " + std::to_string(f) + " has zero area");
      fr.normal = cross / cross.norm();
      fr.Ginv = fr.G.inverse();
      total_measure_ += fr.measure;
    }

    connected_ = compute_connected();
  }

  bool compute_connected() const {
    const Eigen::Index n = n_vertices();
    if (n == 0) return true;
    std::vector<Eigen::Index> parent(static_cast<size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](Eigen::Index x) {
      while (parent[static_cast<size_t>(x)] != x) {
        parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
        x = parent[static_cast<size_t>(x)];
      }
      return x;
    };
    for (Eigen::Index f = 0; f < F_.rows(); ++f)
      for (int c = 0; c < 3; ++c) {
        Eigen::Index a = find(F_(f, c)), b = find(F_(f, (c + 1) % 3));
        if (a != b) parent[static_cast<size_t>(a)] = b;
      }
    Eigen::Index root = find(0);
    for (Eigen::Index v = 1; v < n; ++v)
      if (find(v) != root) return false;
    return true;
  }

  MatX3 V_;
  MatX3i F_;
  std::vector<FaceFrame> frames_;
  bool closed_ = false;
  bool connected_ = true;
  double total_measure_ = 0.0;
};

/// Immutable tetrahedral mesh; tets are reordered to positive volume at build.
class TetMesh {
 public:
  static constexpr int simplex_size = 4;
  using Frame = TetFrame;
  using SimplexMatrix = MatX4i;

  static TetMesh build(MatX3 vertices, MatX4i tets) {
    TetMesh mesh;
    mesh.V_ = std::move(vertices);
    mesh.T_ = std::move(tets);
    mesh.validate_and_precompute();
    return mesh;
  }

  Eigen::Index n_vertices() const { return V_.rows(); }
  Eigen::Index n_simplices() const { return T_.rows(); }
  const MatX3& vertices() const { return V_; }
  const MatX4i& simplices() const { return T_; }
  const std::vector<TetFrame>& frames() const { return frames_; }
  const TetFrame& frame(Eigen::Index t) const { return frames_[static_cast<size_t>(t)]; }
  double total_measure() const { return total_measure_; }
  bool connected() const { return connected_; }

  double bbox_diagonal() const {
    return (V_.colwise().maxCoeff() - V_.colwise().minCoeff()).norm();
  }

 private:
  void validate_and_precompute() {
    const Eigen::Index n = V_.rows();
    if (!V_.allFinite()) throw ParseError("non-finite vertex coordinates");
    if (T_.minCoeff() < 0 || T_.maxCoeff() >= n) throw ParseError("tet index out of range");

    frames_.resize(static_cast<size_t>(T_.rows()));
    total_measure_ = 0.0;
    const double scale3 = std::pow((V_.colwise().maxCoeff() - V_.colwise().minCoeff()).norm(), 3);
    for (Eigen::Index t = 0; t < T_.rows(); ++t) {
      Vec3 pi = V_.row(T_(t, 0)), pj = V_.row(T_(t, 1)), pk = V_.row(T_(t, 2)), pl = V_.row(T_(t, 3));
      double vol6 = (pj - pi).cross(pk - pi).dot(pl - pi);
      if (vol6 < 0) {  // orientation fix
        std::swap(T_(t, 2), T_(t, 3));
        std::swap(pk, pl);
        vol6 = -vol6;
      }
      TetFrame& fr = frames_[static_cast<size_t>(t)];
      fr.E.col(0) = pi - pj;
      fr.E.col(1) = pj - pk;
      fr.E.col(2) = pk - pl;
      fr.measure = vol6 / 6.0;
      if (!(fr.measure > 1e-14 * scale3))
        throw DegenerateSimplex("tet " + std::to_string(t) + " has zero volume");
      fr.G = fr.E.transpose() * fr.E;
      fr.Ginv = fr.G.inverse();
      total_measure_ += fr.measure;
    }

    std::vector<Eigen::Index> parent(static_cast<size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](Eigen::Index x) {
      while (parent[static_cast<size_t>(x)] != x) {
        parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
        x = parent[static_cast<size_t>(x)];
      }
      return x;
    };
    for (Eigen::Index t = 0; t < T_.rows(); ++t)
      for (int c = 0; c < 4; ++c) {
        Eigen::Index a = find(T_(t, c)), b = find(T_(t, (c + 1) % 4));
        if (a != b) parent[static_cast<size_t>(a)] = b;
      }
    connected_ = true;
    Eigen::Index root = n > 0 ? find(0) : 0;
    for (Eigen::Index v = 1; v < n; ++v)
      if (find(v) != root) {
        connected_ = false;
        break;
      }
  }

  MatX3 V_;
  MatX4i T_;
  std::vector<TetFrame> frames_;
  bool connected_ = true;
  double total_measure_ = 0.0;
};

/// Throws unless `field` has one 3-vector per mesh vertex.
template <class Mesh>
void check_field(const Mesh& mesh, const MatX3& field) {
  if (field.rows() != mesh.n_vertices())
    throw Error("field has " + std::to_string(field.rows()) + " rows, mesh has " +
                std::to_string(mesh.n_vertices()) + " vertices");
  if (!field.allFinite()) throw Error("field has non-finite entries");
}

}  // namespace fundeform
