#pragma once

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "fundeform/deformation.hpp"
#include "fundeform/mesh_io.hpp"

namespace fundeform {

/// 3m axis-aligned spectral fields phi_j * e_axis, ordered (j, axis).
/// The j = 1 triple spans the global translations.
inline std::vector<MatX3> spectral_family(const ReducedBasis& basis, Eigen::Index m) {
  if (m < 0 || m > basis.k()) throw Error("spectral_family: m out of range");
  std::vector<MatX3> fields;
  fields.reserve(static_cast<size_t>(3 * m));
  for (Eigen::Index j = 0; j < m; ++j)
    for (int axis = 0; axis < 3; ++axis) {
      MatX3 f = MatX3::Zero(basis.n(), 3);
      f.col(axis) = basis.phi.col(j);
      fields.push_back(std::move(f));
    }
  return fields;
}

/// Quadratic form of the componentwise Dirichlet energy of extrinsic fields,
/// V^T Q V = sum_T Tr(G^{-1} J^T J) mu(T) with J the ambient Jacobian, in the
/// interleaved (x0,y0,z0,...) layout.
template <class Mesh>
SpMat field_dirichlet_form(const Mesh& mesh) {
  constexpr int k = Mesh::simplex_size;
  const auto D = detail::diff_matrix<Mesh>();
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(mesh.n_simplices()) * k * k * 3);
  const auto& S = mesh.simplices();
  for (Eigen::Index s = 0; s < S.rows(); ++s) {
    const auto& fr = mesh.frame(s);
    Eigen::Matrix<double, k, k> local = fr.measure * D.transpose() * fr.Ginv * D;
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        for (int axis = 0; axis < 3; ++axis)
          trips.emplace_back(3 * S(s, a) + axis, 3 * S(s, b) + axis, local(a, b));
  }
  SpMat Q(3 * mesh.n_vertices(), 3 * mesh.n_vertices());
  Q.setFromTriplets(trips.begin(), trips.end());
  return Q;
}

/// Lowest-m modes of the field Dirichlet energy, orthonormal in the
/// block-lumped mass. The three zero modes are the translations; rotations
/// carry positive energy since the form measures the full ambient Jacobian.
template <class Mesh>
std::vector<MatX3> modal_family(const Mesh& mesh, Eigen::Index m) {
  const Eigen::Index n3 = 3 * mesh.n_vertices();
  if (m < 0 || m > n3) throw Error("modal_family: m out of range");
  SpMat Q = field_dirichlet_form(mesh);
  VecX mass = lumped_mass(mesh);
  VecX inv_sqrt(n3);
  for (Eigen::Index v = 0; v < mesh.n_vertices(); ++v)
    inv_sqrt.segment<3>(3 * v).setConstant(1.0 / std::sqrt(mass[v]));
  MatX B = inv_sqrt.asDiagonal() * MatX(Q) * inv_sqrt.asDiagonal();
  B = 0.5 * (B + B.transpose());
  Eigen::SelfAdjointEigenSolver<MatX> solver(B);
  if (solver.info() != Eigen::Success) throw ConvergenceFailure("modal_family: solver failed");
  MatX modes = inv_sqrt.asDiagonal() * solver.eigenvectors().leftCols(m);
  detail::fix_signs(modes);
  std::vector<MatX3> fields;
  fields.reserve(static_cast<size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) fields.push_back(unflatten_field(modes.col(j)));
  return fields;
}

struct HandleParams {
  int handles = 8;
  bool rotations = true;
  double radius_factor = 1.5;  // kernel radius over mean seed spacing
};

/// Farthest-point seeds (Euclidean, deterministic start at vertex 0).
inline std::vector<int> farthest_point_seeds(const MatX3& V, int h) {
  if (h < 1 || h > V.rows()) throw Error("farthest_point_seeds: handle count out of range");
  std::vector<int> seeds{0};
  VecX dist = (V.rowwise() - V.row(0)).rowwise().norm();
  for (int s = 1; s < h; ++s) {
    int best = 0;
    for (Eigen::Index v = 1; v < V.rows(); ++v)
      if (dist[v] > dist[best]) best = static_cast<int>(v);
    seeds.push_back(best);
    VecX d = (V.rowwise() - V.row(best)).rowwise().norm();
    dist = dist.cwiseMin(d);
  }
  return seeds;
}

/// Compactly supported quartic kernel, 1 at the seed, 0 with zero slope at
/// distance rho.
inline double handle_kernel(double d, double rho) {
  if (d >= rho) return 0.0;
  double r = d / rho;
  double t = 1.0 - r;
  return t * t * t * t * (4.0 * r + 1.0);
}

/// Handle family: per seed, kernel-weighted translations (and optionally
/// kernel-weighted rotations about the seed). Supports are local, which suits
/// localized deformations better than the global families.
template <class Mesh>
std::vector<MatX3> handle_family(const Mesh& mesh, const HandleParams& params) {
  const MatX3& V = mesh.vertices();
  std::vector<int> seeds = farthest_point_seeds(V, params.handles);
  double spacing = 0.0;
  if (seeds.size() > 1) {
    for (size_t a = 0; a < seeds.size(); ++a) {
      double nearest = std::numeric_limits<double>::infinity();
      for (size_t b = 0; b < seeds.size(); ++b)
        if (a != b)
          nearest = std::min(nearest, (V.row(seeds[a]) - V.row(seeds[b])).norm());
      spacing += nearest;
    }
    spacing /= static_cast<double>(seeds.size());
  } else {
    spacing = 0.5 * mesh.bbox_diagonal();
  }
  const double rho = params.radius_factor * spacing;

  std::vector<MatX3> fields;
  auto weights_for = [&](int seed) {
    VecX w(V.rows());
    for (Eigen::Index v = 0; v < V.rows(); ++v)
      w[v] = handle_kernel((V.row(v) - V.row(seed)).norm(), rho);
    return w;
  };
  for (int seed : seeds) {
    VecX w = weights_for(seed);
    for (int axis = 0; axis < 3; ++axis) {
      MatX3 f = MatX3::Zero(V.rows(), 3);
      f.col(axis) = w;
      fields.push_back(std::move(f));
    }
  }
  if (params.rotations) {
    for (int seed : seeds) {
      VecX w = weights_for(seed);
      for (int axis = 0; axis < 3; ++axis) {
        Vec3 omega = Vec3::Unit(axis);
        MatX3 f(V.rows(), 3);
        for (Eigen::Index v = 0; v < V.rows(); ++v) {
          Vec3 arm = (V.row(v) - V.row(seed)).transpose();
          f.row(v) = (w[v] * omega.cross(arm)).transpose();
        }
        fields.push_back(std::move(f));
      }
    }
  }
  return fields;
}

struct DictionarySpec {
  Eigen::Index n_spectral = 0;
  Eigen::Index n_modal = 0;
  Eigen::Index n_handle = 0;
  bool handle_rotations = true;
  double handle_radius_factor = 1.5;
};

/// Over-complete deformation dictionary: ordered fields with their
/// precomputed reduced operators.
struct Dictionary {
  std::vector<MatX3> fields;
  std::vector<MatX> ops;             // reduced operators, one per field
  std::vector<std::string> family;   // "spectral", "modal" or "handle"
  DictionarySpec spec;
  Eigen::Index k = 0;

  Eigen::Index size() const { return static_cast<Eigen::Index>(fields.size()); }

  /// Columns are vec of each field's reduced operator.
  MatX recovery_matrix() const {
    if (fields.empty()) throw Error("recovery_matrix: empty dictionary");
    MatX M(k * k, size());
    for (Eigen::Index i = 0; i < size(); ++i) M.col(i) = vec(ops[static_cast<size_t>(i)]);
    return M;
  }

  MatX3 combine(const VecX& alpha) const {
    if (alpha.size() != size()) throw Error("combine: coefficient size mismatch");
    MatX3 field = MatX3::Zero(fields.empty() ? 0 : fields[0].rows(), 3);
    for (Eigen::Index i = 0; i < size(); ++i)
      if (alpha[i] != 0.0) field += alpha[i] * fields[static_cast<size_t>(i)];
    return field;
  }
};

template <class Mesh>
Dictionary build_dictionary(const Mesh& mesh, const ReducedBasis& basis,
                            const DictionarySpec& spec) {
  Dictionary dict;
  dict.spec = spec;
  dict.k = basis.k();
  auto append = [&](std::vector<MatX3>&& fields, Eigen::Index count, const char* tag) {
    if (count > static_cast<Eigen::Index>(fields.size()))
      throw Error(std::string("build_dictionary: family '") + tag + "' cannot supply " +
                  std::to_string(count) + " fields");
    for (Eigen::Index i = 0; i < count; ++i) {
      dict.fields.push_back(std::move(fields[static_cast<size_t>(i)]));
      dict.family.emplace_back(tag);
    }
  };
  if (spec.n_spectral > 0) {
    Eigen::Index m = (spec.n_spectral + 2) / 3;
    append(spectral_family(basis, m), spec.n_spectral, "spectral");
  }
  if (spec.n_modal > 0) append(modal_family(mesh, spec.n_modal), spec.n_modal, "modal");
  if (spec.n_handle > 0) {
    HandleParams hp;
    hp.rotations = spec.handle_rotations;
    hp.radius_factor = spec.handle_radius_factor;
    int per_seed = spec.handle_rotations ? 6 : 3;
    hp.handles = static_cast<int>((spec.n_handle + per_seed - 1) / per_seed);
    append(handle_family(mesh, hp), spec.n_handle, "handle");
  }
  dict.ops.reserve(dict.fields.size());
  for (const MatX3& f : dict.fields)
    dict.ops.push_back(reduce_h1(assemble_strain_matrix(mesh, f), basis));
  return dict;
}

// ---------------------------------------------------------------------------
// Directory serialization: manifest.json plus one field and one operator
// file per entry.

inline void save_dictionary(const Dictionary& dict, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["k"] = dict.k;
  manifest["count"] = dict.size();
  manifest["spec"] = {{"n_spectral", dict.spec.n_spectral},
                      {"n_modal", dict.spec.n_modal},
                      {"n_handle", dict.spec.n_handle},
                      {"handle_rotations", dict.spec.handle_rotations},
                      {"handle_radius_factor", dict.spec.handle_radius_factor}};
  manifest["family"] = dict.family;
  std::ofstream(dir + "/manifest.json") << manifest.dump(2) << '\n';
  for (Eigen::Index i = 0; i < dict.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "field_%04lld.txt", static_cast<long long>(i));
    save_field(dict.fields[static_cast<size_t>(i)], dir + "/" + name);
    std::snprintf(name, sizeof(name), "op_%04lld.txt", static_cast<long long>(i));
    save_matrix_ascii(dict.ops[static_cast<size_t>(i)], dir + "/" + name);
  }
}

inline Dictionary load_dictionary(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json");
  if (!in) throw ParseError("cannot open '" + dir + "/manifest.json'");
  nlohmann::json manifest = nlohmann::json::parse(in);
  Dictionary dict;
  dict.k = manifest.at("k").get<Eigen::Index>();
  Eigen::Index count = manifest.at("count").get<Eigen::Index>();
  const auto& spec = manifest.at("spec");
  dict.spec.n_spectral = spec.at("n_spectral").get<Eigen::Index>();
  dict.spec.n_modal = spec.at("n_modal").get<Eigen::Index>();
  dict.spec.n_handle = spec.at("n_handle").get<Eigen::Index>();
  dict.spec.handle_rotations = spec.at("handle_rotations").get<bool>();
  dict.spec.handle_radius_factor = spec.at("handle_radius_factor").get<double>();
  dict.family = manifest.at("family").get<std::vector<std::string>>();
  for (Eigen::Index i = 0; i < count; ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "field_%04lld.txt", static_cast<long long>(i));
    dict.fields.push_back(load_field(dir + "/" + name));
    std::snprintf(name, sizeof(name), "op_%04lld.txt", static_cast<long long>(i));
    dict.ops.push_back(load_matrix(dir + "/" + name));
  }
  return dict;
}

}  // namespace fundeform
