// Command-line front end: one subcommand per pipeline.
//
// Exit codes: 0 success, 2 input error, 3 numerical failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include <fundeform/config.hpp>
#include <fundeform/fundeform.hpp>

namespace fdf = fundeform;
using fdf::MatX;
using fdf::MatX3;
using fdf::VecX;

namespace {

struct CommonOpts {
  std::string config_path;
  double k = 0, tau = 0, tau_reg = 0, tol = 0, max_iter = 0, iters = 0, seed = 0;
  double dict_spectral = 0, dict_modal = 0, dict_handle = 0;
  bool handle_rotations = true;
  double handle_radius_factor = 0;
  CLI::Option *o_k = nullptr, *o_tau = nullptr, *o_tau_reg = nullptr, *o_tol = nullptr,
              *o_max_iter = nullptr, *o_iters = nullptr, *o_seed = nullptr, *o_ds = nullptr,
              *o_dm = nullptr, *o_dh = nullptr, *o_hr = nullptr, *o_hrf = nullptr;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file; flags take precedence");
    o_k = cmd->add_option("--k", k, "reduced basis size (default 200, clamped to vertex count)");
    o_tau = cmd->add_option("--tau", tau, "l1 sparsity weight (default 1e-3)");
    o_tau_reg = cmd->add_option("--tau-reg", tau_reg, "symmetrize regularization (default 1e-2)");
    o_tol = cmd->add_option("--tol", tol, "solver KKT tolerance (default 1e-8)");
    o_max_iter = cmd->add_option("--max-iter", max_iter, "solver iteration cap (default 50000)");
    o_iters = cmd->add_option("--iters", iters, "symmetrize outer iterations (default 3)");
    o_seed = cmd->add_option("--seed", seed, "random seed for sampled mesh generation");
    o_ds = cmd->add_option("--dict-spectral", dict_spectral, "spectral field count (default 180)");
    o_dm = cmd->add_option("--dict-modal", dict_modal, "modal field count (default 180)");
    o_dh = cmd->add_option("--dict-handle", dict_handle, "handle field count (default 180)");
    o_hr = cmd->add_flag("--handle-rotations,!--no-handle-rotations", handle_rotations,
                         "include kernel-weighted rotations (default on)");
    o_hrf = cmd->add_option("--handle-radius-factor", handle_radius_factor,
                            "kernel radius over mean seed spacing (default 1.5)");
  }

  fdf::RunConfig resolve() const {
    fdf::RunConfig cfg;
    if (!config_path.empty()) cfg.load_file(config_path);
    auto flag = [](CLI::Option* opt, double value, fdf::RunConfig::Entry& entry) {
      if (opt && opt->count() > 0) entry = {value, "flag"};
    };
    flag(o_k, k, cfg.k);
    flag(o_tau, tau, cfg.tau);
    flag(o_tau_reg, tau_reg, cfg.tau_reg);
    flag(o_tol, tol, cfg.tol);
    flag(o_max_iter, max_iter, cfg.max_iter);
    flag(o_iters, iters, cfg.iters);
    flag(o_seed, seed, cfg.seed);
    flag(o_ds, dict_spectral, cfg.dict_spectral);
    flag(o_dm, dict_modal, cfg.dict_modal);
    flag(o_dh, dict_handle, cfg.dict_handle);
    flag(o_hr, handle_rotations ? 1.0 : 0.0, cfg.handle_rotations);
    flag(o_hrf, handle_radius_factor, cfg.handle_radius_factor);
    cfg.echo(std::cout);
    return cfg;
  }
};

fdf::SolveOptions solve_options(const fdf::RunConfig& cfg) {
  fdf::SolveOptions opts;
  opts.tol = cfg.tol.value;
  opts.max_iter = static_cast<Eigen::Index>(cfg.max_iter.value);
  return opts;
}

Eigen::Index clamp_k(const fdf::RunConfig& cfg, Eigen::Index n) {
  auto k = static_cast<Eigen::Index>(cfg.k.value);
  if (k > n) {
    std::cerr << "note: k clamped from " << k << " to vertex count " << n << "\n";
    return n;
  }
  if (k < 1) throw fdf::Error("k must be positive");
  return k;
}

bool is_tet_path(const std::string& path) {
  auto ext = std::filesystem::path(path).extension().string();
  return ext == ".node" || ext == ".ele";
}

void write_diag_csv(const std::string& path, const fdf::L1LSResult& result) {
  if (path.empty()) return;
  std::ofstream out(path);
  out << "iter,objective,kkt_residual,eq_violation,converged,method\n";
  for (size_t i = 0; i + 1 < result.trace.size(); ++i)
    out << i << ',' << fdf::io::fmt_double(result.trace[i]) << ",,,,\n";
  out << (result.trace.empty() ? 0 : result.trace.size() - 1) << ','
      << fdf::io::fmt_double(result.objective) << ',' << fdf::io::fmt_double(result.kkt_residual)
      << ',' << fdf::io::fmt_double(result.eq_violation) << ',' << (result.converged ? 1 : 0)
      << ',' << result.method << '\n';
}

int finish_solver_command(const fdf::L1LSResult& result) {
  if (!result.converged) {
    std::cerr << "solver did not reach tolerance (kkt residual "
              << fdf::io::fmt_double(result.kkt_residual) << ")\n";
    return 3;
  }
  std::cout << "solver: " << result.method << ", " << result.iterations
            << " iterations, kkt residual " << fdf::io::fmt_double(result.kkt_residual) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct GenmeshArgs {
  std::string shape, out, mirror_out;
  int subdiv = 2, nx = 8, ny = 4, nz = 4, nu = 24, nv = 16, nseg = 24, nrings = 12;
  double radius = 1.0, height = 4.0, t = 0.5, lx = 2.0, ly = 1.0, lz = 1.0;
  double jitter = 0.0;
};

int run_genmesh(const GenmeshArgs& args, const fdf::RunConfig& cfg) {
  using namespace fdf::meshgen;
  auto jitter = [&](MatX3 V) {
    if (args.jitter > 0)
      V = radial_jitter(V, args.jitter, static_cast<uint64_t>(cfg.seed.value));
    return V;
  };
  if (args.shape == "icosphere") {
    MeshData m = icosphere(args.subdiv, args.radius);
    fdf::save_obj(fdf::TriMesh::build(jitter(m.V), m.F), args.out);
  } else if (args.shape == "morph") {
    MeshData m = sphere_cube_morph(args.subdiv, args.t);
    fdf::save_obj(fdf::TriMesh::build(jitter(m.V), m.F), args.out);
  } else if (args.shape == "box" || args.shape == "bar") {
    BoxSurface b = box_surface(args.nx, args.ny, args.nz, args.lx, args.ly, args.lz);
    fdf::save_obj(fdf::TriMesh::build(jitter(b.V), b.F), args.out);
    if (!args.mirror_out.empty()) fdf::save_pointmap(b.mirror_x, args.mirror_out);
  } else if (args.shape == "plane") {
    MeshData m = grid_plane(args.nx, args.ny, args.lx, args.ly);
    fdf::save_obj(fdf::TriMesh::build(m.V, m.F), args.out);
  } else if (args.shape == "cylinder") {
    Cylinder c = cylinder(args.nseg, args.nrings, args.radius, args.height);
    fdf::save_obj(fdf::TriMesh::build(jitter(c.V), c.F), args.out);
  } else if (args.shape == "torus") {
    MeshData m = torus(args.nu, args.nv);
    fdf::save_obj(fdf::TriMesh::build(jitter(m.V), m.F), args.out);
  } else if (args.shape == "tetball") {
    TetData t = tet_ball(args.subdiv, args.radius);
    fdf::save_tetgen(fdf::TetMesh::build(t.V, t.T), args.out);
  } else if (args.shape == "tetmorph") {
    TetData t = tet_ball_morph(args.subdiv, args.t);
    fdf::save_tetgen(fdf::TetMesh::build(t.V, t.T), args.out);
  } else {
    throw fdf::Error("unknown shape '" + args.shape + "'");
  }
  std::cout << "wrote " << args.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct OperatorArgs {
  std::string mesh, field, out, h_out;
  bool normal = false;
  bool binary = false;
};

template <class Mesh>
int run_operator_on(const Mesh& mesh, const OperatorArgs& args, const fdf::RunConfig& cfg) {
  auto basis = fdf::eigenbasis(mesh, clamp_k(cfg, mesh.n_vertices()));
  MatX3 field;
  if (args.normal) {
    if constexpr (std::is_same_v<Mesh, fdf::TriMesh>)
      field = mesh.outward_vertex_normals();
    else
      throw fdf::Error("--normal requires a triangle mesh");
  } else {
    field = fdf::load_field(args.field);
    fdf::check_field(mesh, field);
  }
  auto op = fdf::deformation_operator(mesh, field, basis);
  if (args.binary)
    fdf::save_matrix_binary(op.reduced, args.out);
  else
    fdf::save_matrix_ascii(op.reduced, args.out);
  if (!args.h_out.empty()) fdf::save_matrix_ascii(MatX(op.full), args.h_out);
  std::cout << "operator frobenius norm " << fdf::io::fmt_double(op.reduced.norm()) << "\n";
  return 0;
}

int run_operator(const OperatorArgs& args, const fdf::RunConfig& cfg) {
  if (is_tet_path(args.mesh))
    return run_operator_on(fdf::load_tetmesh(args.mesh), args, cfg);
  return run_operator_on(fdf::load_trimesh(args.mesh), args, cfg);
}

// ---------------------------------------------------------------------------

struct ShapediffArgs {
  std::string src, dst, kind = "unified", fmap, out;
};

int run_shapediff(const ShapediffArgs& args, const fdf::RunConfig& cfg) {
  fdf::TriMesh src = fdf::load_trimesh(args.src);
  fdf::TriMesh dst = fdf::load_trimesh(args.dst);
  auto kind = fdf::shape_diff_kind_from_string(args.kind);
  auto basis = fdf::eigenbasis(src, clamp_k(cfg, src.n_vertices()));
  MatX D;
  if (args.fmap.empty()) {
    D = fdf::shape_difference_same_conn(src, dst, basis, kind);
  } else {
    auto corr = fdf::load_pointmap(args.fmap, dst.n_vertices(), src.n_vertices());
    auto basis_dst = fdf::eigenbasis(dst, clamp_k(cfg, dst.n_vertices()));
    MatX C = fdf::fmap_from_pointmap(corr, basis, basis_dst, fdf::lumped_mass(dst));
    D = fdf::shape_difference_fmap(basis, basis_dst.lambda, C, kind);
  }
  if (!args.out.empty()) fdf::save_matrix_ascii(D, args.out);
  double dev = (D - MatX::Identity(D.rows(), D.cols())).norm();
  std::cout << "distance to identity " << fdf::io::fmt_double(dev) << "\n";
  return 0;
}

struct CollectionArgs {
  std::string base, kind = "unified", out_csv;
  std::vector<std::string> shapes;
};

int run_collection(const CollectionArgs& args, const fdf::RunConfig& cfg) {
  fdf::TriMesh base = fdf::load_trimesh(args.base);
  std::vector<fdf::TriMesh> shapes;
  for (const auto& path : args.shapes) shapes.push_back(fdf::load_trimesh(path));
  auto basis = fdf::eigenbasis(base, clamp_k(cfg, base.n_vertices()));
  auto emb = fdf::collection_embedding(base, shapes, basis,
                                       fdf::shape_diff_kind_from_string(args.kind));
  std::ofstream out(args.out_csv);
  if (!out) throw fdf::Error("cannot write '" + args.out_csv + "'");
  out << "shape,x,y\n";
  for (Eigen::Index i = 0; i < emb.coords.rows(); ++i)
    out << args.shapes[static_cast<size_t>(i)] << ',' << fdf::io::fmt_double(emb.coords(i, 0))
        << ',' << fdf::io::fmt_double(emb.coords(i, 1)) << '\n';
  std::cout << "wrote " << args.out_csv << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct RecoverArgs {
  std::string mesh, target_field, target_op, out, deformed, diag;
};

int run_recover(const RecoverArgs& args, const fdf::RunConfig& cfg) {
  fdf::TriMesh mesh = fdf::load_trimesh(args.mesh);
  auto basis = fdf::eigenbasis(mesh, clamp_k(cfg, mesh.n_vertices()));
  MatX target;
  if (!args.target_field.empty()) {
    MatX3 field = fdf::load_field(args.target_field);
    fdf::check_field(mesh, field);
    target = fdf::deformation_operator(mesh, field, basis).reduced;
  } else if (!args.target_op.empty()) {
    target = fdf::load_matrix(args.target_op);
  } else {
    throw fdf::Error("recover needs --target-field or --target-op");
  }
  auto dict = fdf::build_dictionary(mesh, basis, cfg.dictionary_spec());
  auto result = fdf::recover_field(mesh, dict, target, cfg.tau.value, solve_options(cfg));
  fdf::save_field(result.field, args.out);
  if (!args.deformed.empty())
    fdf::save_obj(MatX3(mesh.vertices() + result.field), mesh.simplices(), args.deformed);
  write_diag_csv(args.diag, result.solve);
  return finish_solver_command(result.solve);
}

struct TransferArgs {
  std::string src, dst, field, map, out, deformed, diag;
  double tau = -1.0;
  bool tau_given = false;
};

int run_transfer(const TransferArgs& args, const fdf::RunConfig& cfg) {
  fdf::TriMesh src = fdf::load_trimesh(args.src);
  fdf::TriMesh dst = fdf::load_trimesh(args.dst);
  MatX3 field = fdf::load_field(args.field);
  fdf::check_field(src, field);
  Eigen::Index k = clamp_k(cfg, std::min(src.n_vertices(), dst.n_vertices()));
  auto basis_src = fdf::eigenbasis(src, k);
  auto basis_dst = fdf::eigenbasis(dst, k);
  auto corr = fdf::load_pointmap(args.map, dst.n_vertices(), src.n_vertices());
  MatX C = fdf::fmap_from_pointmap(corr, basis_src, basis_dst, fdf::lumped_mass(dst));
  MatX reducedU = fdf::deformation_operator(src, field, basis_src).reduced;
  auto dict = fdf::build_dictionary(dst, basis_dst, cfg.dictionary_spec());
  double tau = args.tau_given ? args.tau : -1.0;
  auto result = fdf::transfer(dict, C, reducedU, tau, solve_options(cfg));
  fdf::save_field(result.field, args.out);
  if (!args.deformed.empty())
    fdf::save_obj(MatX3(dst.vertices() + result.field), dst.simplices(), args.deformed);
  write_diag_csv(args.diag, result.solve);
  std::cout << "tau used " << fdf::io::fmt_double(result.tau_used) << "\n";
  return finish_solver_command(result.solve);
}

// ---------------------------------------------------------------------------

struct DesignArgs {
  std::string mesh, constraints, selfmap, out, deformed, diag;
  std::string mesh2, constraints2, map, out2, deformed2;
  double w_isometric = 0, w_symmetric = 0, w_antisymmetric = 0, w_laplacian = 0, w_smooth = 0;
  double w_couple = 1.0;
};

int run_design(const DesignArgs& args, const fdf::RunConfig& cfg) {
  fdf::TriMesh mesh = fdf::load_trimesh(args.mesh);
  Eigen::Index k = clamp_k(cfg, mesh.n_vertices());
  auto constraints = fdf::load_constraints(args.constraints, mesh.n_vertices());

  if (!args.mesh2.empty()) {  // joint design
    fdf::TriMesh mesh2 = fdf::load_trimesh(args.mesh2);
    k = clamp_k(cfg, std::min(mesh.n_vertices(), mesh2.n_vertices()));
    auto basis = fdf::eigenbasis(mesh, k);
    auto basis2 = fdf::eigenbasis(mesh2, k);
    auto constraints2 = fdf::load_constraints(args.constraints2, mesh2.n_vertices());
    auto corr = fdf::load_pointmap(args.map, mesh2.n_vertices(), mesh.n_vertices());
    MatX C = fdf::fmap_from_pointmap(corr, basis, basis2, fdf::lumped_mass(mesh2));
    auto dict = fdf::build_dictionary(mesh, basis, cfg.dictionary_spec());
    auto dict2 = fdf::build_dictionary(mesh2, basis2, cfg.dictionary_spec());
    auto result = fdf::joint_design(mesh, dict, mesh2, dict2, C, constraints, constraints2,
                                    args.w_couple, args.w_smooth > 0 ? args.w_smooth : 1.0,
                                    cfg.tau.value, solve_options(cfg));
    fdf::save_field(result.field_src, args.out);
    if (!args.out2.empty()) fdf::save_field(result.field_dst, args.out2);
    if (!args.deformed.empty())
      fdf::save_obj(MatX3(mesh.vertices() + result.field_src), mesh.simplices(), args.deformed);
    if (!args.deformed2.empty())
      fdf::save_obj(MatX3(mesh2.vertices() + result.field_dst), mesh2.simplices(),
                    args.deformed2);
    write_diag_csv(args.diag, result.solve);
    return finish_solver_command(result.solve);
  }

  auto basis = fdf::eigenbasis(mesh, k);
  auto dict = fdf::build_dictionary(mesh, basis, cfg.dictionary_spec());
  fdf::DesignObjectives objectives;
  objectives.w_isometric = args.w_isometric;
  objectives.w_symmetric = args.w_symmetric;
  objectives.w_antisymmetric = args.w_antisymmetric;
  objectives.w_laplacian = args.w_laplacian;
  objectives.w_smooth = args.w_smooth;
  if (objectives.w_isometric == 0 && objectives.w_symmetric == 0 &&
      objectives.w_antisymmetric == 0 && objectives.w_laplacian == 0 && objectives.w_smooth == 0)
    objectives.w_isometric = 1.0;
  if (!args.selfmap.empty()) {
    auto corr = fdf::load_pointmap(args.selfmap, mesh.n_vertices(), mesh.n_vertices());
    objectives.c_self = fdf::fmap_from_pointmap(corr, basis, basis, fdf::lumped_mass(mesh));
  }
  auto result =
      fdf::design(mesh, dict, basis, constraints, objectives, cfg.tau.value, solve_options(cfg));
  fdf::save_field(result.field, args.out);
  if (!args.deformed.empty())
    fdf::save_obj(MatX3(mesh.vertices() + result.field), mesh.simplices(), args.deformed);
  write_diag_csv(args.diag, result.solve);
  return finish_solver_command(result.solve);
}

// ---------------------------------------------------------------------------

struct SymmetrizeArgs {
  std::string mesh, selfmap, out_mesh, diag;
};

int run_symmetrize(const SymmetrizeArgs& args, const fdf::RunConfig& cfg) {
  fdf::TriMesh mesh = fdf::load_trimesh(args.mesh);
  auto corr = fdf::load_pointmap(args.selfmap, mesh.n_vertices(), mesh.n_vertices());
  fdf::SymmetrizeOptions opts;
  opts.k = clamp_k(cfg, mesh.n_vertices());
  opts.dict_spec = cfg.dictionary_spec();
  opts.tau_reg = cfg.tau_reg.value;
  opts.max_iters = static_cast<Eigen::Index>(cfg.iters.value);
  auto state = fdf::symmetrize(mesh, corr, opts);
  fdf::save_obj(state.vertices, state.faces, args.out_mesh);
  if (!args.diag.empty()) {
    std::ofstream out(args.diag);
    out << "iter,energy,step_norm\n";
    for (size_t i = 0; i < state.energy.size(); ++i) {
      out << i << ',' << fdf::io::fmt_double(state.energy[i]) << ',';
      if (i < state.step_norm.size()) out << fdf::io::fmt_double(state.step_norm[i]);
      out << '\n';
    }
  }
  for (size_t i = 0; i < state.energy.size(); ++i)
    std::cout << "iter " << i << " energy " << fdf::io::fmt_double(state.energy[i]) << "\n";
  if (state.aborted) {
    std::cerr << "symmetrize aborted: " << state.note << "\n";
    return 3;
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct FmapArgs {
  std::string src, dst, pointmap, landmarks, out, to_pointmap, blend;
  double tau_blend = 0.5;
  bool infer = false;
  bool no_extrinsic = false;
};

int run_fmap(const FmapArgs& args, const fdf::RunConfig& cfg) {
  fdf::TriMesh src = fdf::load_trimesh(args.src);
  fdf::TriMesh dst = fdf::load_trimesh(args.dst);
  Eigen::Index k = clamp_k(cfg, std::min(src.n_vertices(), dst.n_vertices()));
  auto basis_src = fdf::eigenbasis(src, k);
  auto basis_dst = fdf::eigenbasis(dst, k);
  MatX C;
  if (args.infer) {
    if (args.landmarks.empty()) throw fdf::Error("--infer needs --landmarks");
    auto landmarks = fdf::load_pairs(args.landmarks);
    for (auto [a, b] : landmarks)
      if (a < 0 || a >= src.n_vertices() || b < 0 || b >= dst.n_vertices())
        throw fdf::IndexError("landmark index out of range");
    fdf::FmapInferOptions opts;
    MatX opM, opN;
    if (args.no_extrinsic) {
      opts.w_extrinsic = 0;
      opM = MatX::Zero(k, k);
      opN = MatX::Zero(k, k);
    } else {
      opM = fdf::normal_deformation_operator(src, basis_src).reduced;
      opN = fdf::normal_deformation_operator(dst, basis_dst).reduced;
    }
    auto result = fdf::fmap_infer(basis_src, basis_dst, opM, opN, landmarks,
                                  fdf::lumped_mass(src), fdf::lumped_mass(dst), opts);
    if (result.rank_deficient)
      std::cerr << "note: rank-deficient system, minimum-norm solution returned\n";
    std::cout << "laplacian commutator " << fdf::io::fmt_double(result.laplacian_commutator)
              << "\nextrinsic commutator " << fdf::io::fmt_double(result.extrinsic_commutator)
              << "\n";
    C = result.C;
  } else if (!args.pointmap.empty()) {
    auto corr = fdf::load_pointmap(args.pointmap, dst.n_vertices(), src.n_vertices());
    C = fdf::fmap_from_pointmap(corr, basis_src, basis_dst, fdf::lumped_mass(dst));
  } else {
    throw fdf::Error("fmap needs --pointmap or --infer");
  }
  if (!args.blend.empty()) C = fdf::blend_fmaps(C, fdf::load_matrix(args.blend), args.tau_blend);
  fdf::save_matrix_ascii(C, args.out);
  if (!args.to_pointmap.empty())
    fdf::save_pointmap(fdf::fmap_to_pointmap(C, basis_src, basis_dst), args.to_pointmap);
  return 0;
}

int classify_exception(const std::exception& e) {
  if (dynamic_cast<const fdf::ConvergenceFailure*>(&e) ||
      dynamic_cast<const fdf::SingularMap*>(&e) || dynamic_cast<const fdf::Infeasible*>(&e) ||
      dynamic_cast<const fdf::DegenerateStep*>(&e))
    return 3;
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"functional representation of deformation fields on simplicial meshes"};
  app.require_subcommand(1);

  GenmeshArgs genmesh;
  CommonOpts genmesh_common;
  auto* cmd_genmesh = app.add_subcommand("genmesh", "generate a procedural mesh");
  cmd_genmesh->add_option("--shape", genmesh.shape,
                          "icosphere|morph|box|bar|plane|cylinder|torus|tetball|tetmorph")
      ->required();
  cmd_genmesh->add_option("--out", genmesh.out, "output mesh path (.obj/.off or tetgen base)")
      ->required();
  cmd_genmesh->add_option("--mirror-out", genmesh.mirror_out, "write the x-mirror self-map (box)");
  cmd_genmesh->add_option("--subdiv", genmesh.subdiv, "icosphere subdivisions (default 2)");
  cmd_genmesh->add_option("--radius", genmesh.radius, "radius (default 1)");
  cmd_genmesh->add_option("--height", genmesh.height, "cylinder height (default 4)");
  cmd_genmesh->add_option("--t", genmesh.t, "morph parameter in [0,1] (default 0.5)");
  cmd_genmesh->add_option("--nx", genmesh.nx, "grid divisions (default 8)");
  cmd_genmesh->add_option("--ny", genmesh.ny, "grid divisions (default 4)");
  cmd_genmesh->add_option("--nz", genmesh.nz, "grid divisions (default 4)");
  cmd_genmesh->add_option("--nu", genmesh.nu, "torus major divisions (default 24)");
  cmd_genmesh->add_option("--nv", genmesh.nv, "torus minor divisions (default 16)");
  cmd_genmesh->add_option("--nseg", genmesh.nseg, "cylinder segments (default 24)");
  cmd_genmesh->add_option("--nrings", genmesh.nrings, "cylinder rings (default 12)");
  cmd_genmesh->add_option("--lx", genmesh.lx, "box length x (default 2)");
  cmd_genmesh->add_option("--ly", genmesh.ly, "box length y (default 1)");
  cmd_genmesh->add_option("--lz", genmesh.lz, "box length z (default 1)");
  cmd_genmesh->add_option("--jitter", genmesh.jitter, "seeded radial jitter amplitude");
  genmesh_common.attach(cmd_genmesh);

  OperatorArgs op;
  CommonOpts op_common;
  auto* cmd_op = app.add_subcommand("operator", "reduced operator of a deformation field");
  cmd_op->add_option("--mesh", op.mesh, "mesh (.obj/.off or tetgen .node)")->required();
  cmd_op->add_option("--field", op.field, "vertex field file");
  cmd_op->add_flag("--normal", op.normal, "use the outward vertex-normal field");
  cmd_op->add_option("--out", op.out, "reduced operator output (matrix)")->required();
  cmd_op->add_option("--h-out", op.h_out, "also write the full matrix");
  cmd_op->add_flag("--binary", op.binary, "write the reduced operator in binary");
  op_common.attach(cmd_op);

  ShapediffArgs sd;
  CommonOpts sd_common;
  auto* cmd_sd = app.add_subcommand("shapediff", "shape difference between two meshes");
  cmd_sd->add_option("--src", sd.src)->required();
  cmd_sd->add_option("--dst", sd.dst)->required();
  cmd_sd->add_option("--kind", sd.kind, "area|conformal|unified (default unified)");
  cmd_sd->add_option("--fmap", sd.fmap, "dst->src vertex map; enables different connectivity");
  cmd_sd->add_option("--out", sd.out, "reduced difference output (matrix)");
  sd_common.attach(cmd_sd);

  CollectionArgs coll;
  CommonOpts coll_common;
  auto* cmd_coll = app.add_subcommand("collection", "PCA layout of a shape collection");
  cmd_coll->add_option("--base", coll.base)->required();
  cmd_coll->add_option("--shapes", coll.shapes, "same-connectivity shapes")->required();
  cmd_coll->add_option("--kind", coll.kind, "area|conformal|unified (default unified)");
  cmd_coll->add_option("--out-csv", coll.out_csv)->required();
  coll_common.attach(cmd_coll);

  RecoverArgs rec;
  CommonOpts rec_common;
  auto* cmd_rec = app.add_subcommand("recover", "recover a field from its operator");
  cmd_rec->add_option("--mesh", rec.mesh)->required();
  cmd_rec->add_option("--target-field", rec.target_field, "encode this field, then recover it");
  cmd_rec->add_option("--target-op", rec.target_op, "reduced operator file to match");
  cmd_rec->add_option("--out", rec.out, "recovered field output")->required();
  cmd_rec->add_option("--deformed", rec.deformed, "write mesh displaced by the field");
  cmd_rec->add_option("--diag", rec.diag, "solver diagnostics CSV");
  rec_common.attach(cmd_rec);

  TransferArgs tr;
  CommonOpts tr_common;
  auto* cmd_tr = app.add_subcommand("transfer", "transfer a deformation through a map");
  cmd_tr->add_option("--src", tr.src)->required();
  cmd_tr->add_option("--dst", tr.dst)->required();
  cmd_tr->add_option("--field", tr.field, "deformation field on the source")->required();
  cmd_tr->add_option("--map", tr.map, "dst->src vertex map file")->required();
  auto* tau_opt = cmd_tr->add_option("--transfer-tau", tr.tau,
                                     "override the automatic sparsity weight");
  cmd_tr->add_option("--out", tr.out, "transferred field output")->required();
  cmd_tr->add_option("--deformed", tr.deformed, "write target displaced by the field");
  cmd_tr->add_option("--diag", tr.diag, "solver diagnostics CSV");
  tr_common.attach(cmd_tr);

  DesignArgs de;
  CommonOpts de_common;
  auto* cmd_de = app.add_subcommand("design", "design a field under pointwise constraints");
  cmd_de->add_option("--mesh", de.mesh)->required();
  cmd_de->add_option("--constraints", de.constraints, "file of 'vertex ux uy uz'")->required();
  cmd_de->add_option("--selfmap", de.selfmap, "self-map for the symmetry objectives");
  cmd_de->add_option("--isometric", de.w_isometric, "weight of the operator-norm objective");
  cmd_de->add_option("--symmetric", de.w_symmetric, "weight of the commutator objective");
  cmd_de->add_option("--antisymmetric", de.w_antisymmetric,
                     "weight of the anti-commutator objective");
  cmd_de->add_option("--lap-commute", de.w_laplacian, "weight of Laplacian commutativity");
  cmd_de->add_option("--smooth", de.w_smooth, "weight of the field smoothness term");
  cmd_de->add_option("--mesh2", de.mesh2, "second shape (joint design)");
  cmd_de->add_option("--constraints2", de.constraints2, "constraints on the second shape");
  cmd_de->add_option("--map", de.map, "mesh2->mesh vertex map (joint design)");
  cmd_de->add_option("--couple", de.w_couple, "joint coupling weight (default 1)");
  cmd_de->add_option("--out", de.out, "designed field output")->required();
  cmd_de->add_option("--out2", de.out2, "second designed field output (joint)");
  cmd_de->add_option("--deformed", de.deformed, "write mesh displaced by the field");
  cmd_de->add_option("--deformed2", de.deformed2, "write second displaced mesh (joint)");
  cmd_de->add_option("--diag", de.diag, "solver diagnostics CSV");
  de_common.attach(cmd_de);

  SymmetrizeArgs sy;
  CommonOpts sy_common;
  auto* cmd_sy = app.add_subcommand("symmetrize", "make a self-map intrinsically isometric");
  cmd_sy->add_option("--mesh", sy.mesh)->required();
  cmd_sy->add_option("--selfmap", sy.selfmap, "vertex self-map file")->required();
  cmd_sy->add_option("--out-mesh", sy.out_mesh, "symmetrized mesh output")->required();
  cmd_sy->add_option("--diag", sy.diag, "energy history CSV");
  sy_common.attach(cmd_sy);

  FmapArgs fm;
  CommonOpts fm_common;
  auto* cmd_fm = app.add_subcommand("fmap", "build or infer a functional map");
  cmd_fm->add_option("--src", fm.src)->required();
  cmd_fm->add_option("--dst", fm.dst)->required();
  cmd_fm->add_option("--pointmap", fm.pointmap, "dst->src vertex map file");
  cmd_fm->add_flag("--infer", fm.infer, "infer from commutativity + landmarks");
  cmd_fm->add_option("--landmarks", fm.landmarks, "file of 'src_vertex dst_vertex' pairs");
  cmd_fm->add_flag("--no-extrinsic", fm.no_extrinsic, "drop the normal-operator term");
  cmd_fm->add_option("--blend", fm.blend, "blend with this map (matrix file)");
  cmd_fm->add_option("--tau-blend", fm.tau_blend, "blend parameter (default 0.5)");
  cmd_fm->add_option("--out", fm.out, "functional map output (matrix)")->required();
  cmd_fm->add_option("--to-pointmap", fm.to_pointmap, "also convert to a vertex map");
  fm_common.attach(cmd_fm);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_genmesh->parsed()) return run_genmesh(genmesh, genmesh_common.resolve());
    if (cmd_op->parsed()) return run_operator(op, op_common.resolve());
    if (cmd_sd->parsed()) return run_shapediff(sd, sd_common.resolve());
    if (cmd_coll->parsed()) return run_collection(coll, coll_common.resolve());
    if (cmd_rec->parsed()) return run_recover(rec, rec_common.resolve());
    if (cmd_tr->parsed()) {
      tr.tau_given = tau_opt->count() > 0;
      return run_transfer(tr, tr_common.resolve());
    }
    if (cmd_de->parsed()) return run_design(de, de_common.resolve());
    if (cmd_sy->parsed()) return run_symmetrize(sy, sy_common.resolve());
    if (cmd_fm->parsed()) return run_fmap(fm, fm_common.resolve());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify_exception(e);
  }
  return 0;
}
