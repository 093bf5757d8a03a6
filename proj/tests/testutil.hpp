#pragma once

#include <filesystem>
#include <random>

#include <fundeform/fundeform.hpp>

namespace testutil {

using namespace fundeform;

inline std::filesystem::path tmp_dir() {
  static std::filesystem::path dir = [] {
    auto p = std::filesystem::temp_directory_path() /
             ("fundeform_tests_" + std::to_string(::getpid()));
    std::filesystem::create_directories(p);
    return p;
  }();
  return dir;
}

inline std::mt19937_64 rng(uint64_t seed) { return std::mt19937_64(seed); }

inline VecX random_vector(Eigen::Index n, uint64_t seed) {
  auto gen = rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  VecX v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(gen);
  return v;
}

inline MatX3 random_field(Eigen::Index n, uint64_t seed) {
  auto gen = rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  MatX3 f(n, 3);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) f(i, c) = dist(gen);
  return f;
}

// ---------------------------------------------------------------------------
// Independent oracles. These deliberately avoid the library's edge-frame
// code paths.

/// Hat-function gradients on one triangle via the rotated-edge formula
/// grad phi_v = (n x e_opposite) / (2 area). Rows are grad phi_i/j/k.
inline Eigen::Matrix3d hat_gradients(const Vec3& pi, const Vec3& pj, const Vec3& pk) {
  Vec3 cross = (pj - pi).cross(pk - pi);
  double area2 = cross.norm();
  Vec3 n = cross / area2;
  Eigen::Matrix3d g;
  g.row(0) = (n.cross(pk - pj) / area2).transpose();
  g.row(1) = (n.cross(pi - pk) / area2).transpose();
  g.row(2) = (n.cross(pj - pi) / area2).transpose();
  return g;
}

/// Cotangent-weight stiffness assembled from explicit angle cotangents.
inline MatX cotan_stiffness_oracle(const TriMesh& mesh) {
  MatX W = MatX::Zero(mesh.n_vertices(), mesh.n_vertices());
  const auto& F = mesh.simplices();
  const auto& V = mesh.vertices();
  for (Eigen::Index f = 0; f < F.rows(); ++f) {
    for (int c = 0; c < 3; ++c) {
      int a = F(f, c), b = F(f, (c + 1) % 3), apex = F(f, (c + 2) % 3);
      Vec3 u = V.row(a) - V.row(apex);
      Vec3 w = V.row(b) - V.row(apex);
      double cot = u.dot(w) / u.cross(w).norm();
      W(a, b) -= 0.5 * cot;
      W(b, a) -= 0.5 * cot;
      W(a, a) += 0.5 * cot;
      W(b, b) += 0.5 * cot;
    }
  }
  return W;
}

/// Direct per-face quadrature of sum_T L_V g(grad f, grad g) mu(T) using hat
/// gradients for everything, independent of the edge-frame assembly.
inline double strain_quadrature_oracle(const TriMesh& mesh, const MatX3& field, const VecX& f,
                                       const VecX& g) {
  double total = 0.0;
  const auto& F = mesh.simplices();
  const auto& V = mesh.vertices();
  for (Eigen::Index t = 0; t < F.rows(); ++t) {
    Vec3 pi = V.row(F(t, 0)), pj = V.row(F(t, 1)), pk = V.row(F(t, 2));
    Eigen::Matrix3d gh = hat_gradients(pi, pj, pk);
    Vec3 gf = Vec3::Zero(), gg = Vec3::Zero();
    Eigen::Matrix3d jac = Eigen::Matrix3d::Zero();  // d V / d (ambient direction), tangential
    for (int c = 0; c < 3; ++c) {
      gf += f[F(t, c)] * gh.row(c).transpose();
      gg += g[F(t, c)] * gh.row(c).transpose();
      jac += Vec3(field.row(F(t, c))) * gh.row(c);  // outer product V_v grad phi_v^T
    }
    double lie = gf.dot(jac * gg) + (jac * gf).dot(gg);
    double area = 0.5 * (pj - pi).cross(pk - pi).norm();
    total += lie * area;
  }
  return total;
}

/// Same quadrature for sum_T div(V)_T <grad f, grad g> mu(T).
inline double div_dirichlet_quadrature_oracle(const TriMesh& mesh, const MatX3& field,
                                              const VecX& f, const VecX& g) {
  double total = 0.0;
  const auto& F = mesh.simplices();
  const auto& V = mesh.vertices();
  for (Eigen::Index t = 0; t < F.rows(); ++t) {
    Vec3 pi = V.row(F(t, 0)), pj = V.row(F(t, 1)), pk = V.row(F(t, 2));
    Eigen::Matrix3d gh = hat_gradients(pi, pj, pk);
    Vec3 gf = Vec3::Zero(), gg = Vec3::Zero();
    Eigen::Matrix3d jac = Eigen::Matrix3d::Zero();
    for (int c = 0; c < 3; ++c) {
      gf += f[F(t, c)] * gh.row(c).transpose();
      gg += g[F(t, c)] * gh.row(c).transpose();
      jac += Vec3(field.row(F(t, c))) * gh.row(c);
    }
    double area = 0.5 * (pj - pi).cross(pk - pi).norm();
    total += jac.trace() * gf.dot(gg) * area;
  }
  return total;
}

inline MatX3 rotation_displacement(const MatX3& V, const Vec3& axis, double angle) {
  Mat3 R = meshgen::rotation(axis, angle);
  return (R * V.transpose()).transpose() - V;
}

inline MatX3 infinitesimal_rotation_field(const MatX3& V, const Vec3& omega) {
  MatX3 f(V.rows(), 3);
  for (Eigen::Index i = 0; i < V.rows(); ++i) f.row(i) = omega.cross(Vec3(V.row(i))).transpose();
  return f;
}

inline MatX3 constant_field(Eigen::Index n, const Vec3& v) {
  MatX3 f(n, 3);
  f.rowwise() = v.transpose();
  return f;
}

}  // namespace testutil
