#pragma once

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fundeform/mesh.hpp"

namespace fundeform {

namespace io {

// All ASCII writers print doubles with 17 significant digits so a
// save/load round trip reproduces every value bit-exactly.
inline std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return in;
}

inline std::ofstream open_output(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

inline bool is_comment_or_blank(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace io

inline TriMesh load_obj(const std::string& path) {
  std::ifstream in = io::open_input(path);
  std::vector<Vec3> verts;
  std::vector<Eigen::Vector3i> faces;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (io::is_comment_or_blank(line)) continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Vec3 p;
      if (!(ss >> p.x() >> p.y() >> p.z()))
        throw ParseError(path + ":" + std::to_string(lineno) + ": malformed vertex");
      verts.push_back(p);
    } else if (tag == "f") {
      std::vector<long> idx;
      std::string tok;
      while (ss >> tok) {
        // accept "i", "i/t", "i/t/n"; only the vertex index is used
        size_t slash = tok.find('/');
        std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
        try {
          idx.push_back(std::stol(head));
        } catch (const std::exception&) {
          throw ParseError(path + ":" + std::to_string(lineno) + ": malformed face index '" + tok + "'");
        }
      }
      if (idx.size() != 3)
        throw ParseError(path + ":" + std::to_string(lineno) + ": only triangle faces are supported");
      Eigen::Vector3i f;
      for (int c = 0; c < 3; ++c) {
        long i = idx[static_cast<size_t>(c)];
        if (i < 1 || i > static_cast<long>(verts.size()) + (1 << 30))
          throw ParseError(path + ":" + std::to_string(lineno) + ": face index out of range");
        f[c] = static_cast<int>(i - 1);  // OBJ is 1-based
      }
      faces.push_back(f);
    }
    // every other record type is ignored
  }
  MatX3 V(static_cast<Eigen::Index>(verts.size()), 3);
  for (size_t i = 0; i < verts.size(); ++i) V.row(static_cast<Eigen::Index>(i)) = verts[i];
  MatX3i F(static_cast<Eigen::Index>(faces.size()), 3);
  for (size_t i = 0; i < faces.size(); ++i) F.row(static_cast<Eigen::Index>(i)) = faces[i];
  if (F.size() > 0 && (F.minCoeff() < 0 || F.maxCoeff() >= V.rows()))
    throw ParseError(path + ": face index out of range");
  try {
    return TriMesh::build(std::move(V), std::move(F));
  } catch (const ParseError&) {
    throw;
  }
}

inline void save_obj(const MatX3& V, const MatX3i& F, const std::string& path) {
  std::ofstream out = io::open_output(path);
  for (Eigen::Index i = 0; i < V.rows(); ++i)
    out << "v " << io::fmt_double(V(i, 0)) << ' ' << io::fmt_double(V(i, 1)) << ' '
        << io::fmt_double(V(i, 2)) << '\n';
  for (Eigen::Index f = 0; f < F.rows(); ++f)
    out << "f " << F(f, 0) + 1 << ' ' << F(f, 1) + 1 << ' ' << F(f, 2) + 1 << '\n';
}

inline void save_obj(const TriMesh& mesh, const std::string& path) {
  save_obj(mesh.vertices(), mesh.simplices(), path);
}

inline TriMesh load_off(const std::string& path) {
  std::ifstream in = io::open_input(path);
  std::string line;
  auto next_line = [&]() {
    while (std::getline(in, line))
      if (!io::is_comment_or_blank(line)) return true;
    return false;
  };
  if (!next_line()) throw ParseError(path + ": empty OFF file");
  {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "OFF") {
      if (!next_line()) throw ParseError(path + ": missing OFF counts");
    }
  }
  Eigen::Index nv = 0, nf = 0;
  long ne = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> nv >> nf >> ne)) throw ParseError(path + ": malformed OFF counts");
  }
  MatX3 V(nv, 3);
  for (Eigen::Index i = 0; i < nv; ++i) {
    if (!next_line()) throw ParseError(path + ": truncated vertex list");
    std::istringstream ss(line);
    if (!(ss >> V(i, 0) >> V(i, 1) >> V(i, 2))) throw ParseError(path + ": malformed OFF vertex");
  }
  MatX3i F(nf, 3);
  for (Eigen::Index f = 0; f < nf; ++f) {
    if (!next_line()) throw ParseError(path + ": truncated face list");
    std::istringstream ss(line);
    int cnt = 0;
    if (!(ss >> cnt) || cnt != 3) throw ParseError(path + ": only triangle OFF faces are supported");
    if (!(ss >> F(f, 0) >> F(f, 1) >> F(f, 2))) throw ParseError(path + ": malformed OFF face");
  }
  if (F.size() > 0 && (F.minCoeff() < 0 || F.maxCoeff() >= nv))
    throw ParseError(path + ": face index out of range");
  return TriMesh::build(std::move(V), std::move(F));
}

inline void save_off(const TriMesh& mesh, const std::string& path) {
  std::ofstream out = io::open_output(path);
  out << "OFF\n" << mesh.n_vertices() << ' ' << mesh.n_simplices() << " 0\n";
  const MatX3& V = mesh.vertices();
  for (Eigen::Index i = 0; i < V.rows(); ++i)
    out << io::fmt_double(V(i, 0)) << ' ' << io::fmt_double(V(i, 1)) << ' '
        << io::fmt_double(V(i, 2)) << '\n';
  const MatX3i& F = mesh.simplices();
  for (Eigen::Index f = 0; f < F.rows(); ++f)
    out << "3 " << F(f, 0) << ' ' << F(f, 1) << ' ' << F(f, 2) << '\n';
}

/// Loads a TetGen .node/.ele pair; `base_path` is the path without extension.
/// 0- or 1-based indexing is autodetected from the first listed node index.
inline TetMesh load_tetgen(const std::string& base_path) {
  std::ifstream node = io::open_input(base_path + ".node");
  std::string line;
  auto next_line = [](std::ifstream& in, std::string& l) {
    while (std::getline(in, l))
      if (!io::is_comment_or_blank(l)) return true;
    return false;
  };
  if (!next_line(node, line)) throw ParseError(base_path + ".node: empty file");
  Eigen::Index nv = 0;
  int dim = 3, nattr = 0, nbdry = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> nv >> dim)) throw ParseError(base_path + ".node: malformed header");
    ss >> nattr >> nbdry;
    if (dim != 3) throw ParseError(base_path + ".node: expected dimension 3");
  }
  MatX3 V(nv, 3);
  long first_index = 0;
  for (Eigen::Index i = 0; i < nv; ++i) {
    if (!next_line(node, line)) throw ParseError(base_path + ".node: truncated node list");
    std::istringstream ss(line);
    long idx;
    Vec3 p;
    if (!(ss >> idx >> p.x() >> p.y() >> p.z()))
      throw ParseError(base_path + ".node: malformed node line");
    if (i == 0) {
      first_index = idx;
      if (first_index != 0 && first_index != 1)
        throw ParseError(base_path + ".node: first node index must be 0 or 1");
    }
    long row = idx - first_index;
    if (row < 0 || row >= nv) throw ParseError(base_path + ".node: node index out of range");
    V.row(row) = p;
  }

  std::ifstream ele = io::open_input(base_path + ".ele");
  if (!next_line(ele, line)) throw ParseError(base_path + ".ele: empty file");
  Eigen::Index nt = 0;
  int npt = 4, nattr2 = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> nt)) throw ParseError(base_path + ".ele: malformed header");
    ss >> npt >> nattr2;
    if (npt != 4) throw ParseError(base_path + ".ele: expected 4 nodes per tet");
  }
  MatX4i T(nt, 4);
  for (Eigen::Index t = 0; t < nt; ++t) {
    if (!next_line(ele, line)) throw ParseError(base_path + ".ele: truncated element list");
    std::istringstream ss(line);
    long idx;
    long a, b, c, d;
    if (!(ss >> idx >> a >> b >> c >> d)) throw ParseError(base_path + ".ele: malformed element line");
    for (long* p : {&a, &b, &c, &d}) {
      *p -= first_index;
      if (*p < 0 || *p >= nv) throw ParseError(base_path + ".ele: element index out of range");
    }
    T.row(t - 0) << static_cast<int>(a), static_cast<int>(b), static_cast<int>(c), static_cast<int>(d);
  }
  return TetMesh::build(std::move(V), std::move(T));
}

inline void save_tetgen(const TetMesh& mesh, const std::string& base_path) {
  {
    std::ofstream out = io::open_output(base_path + ".node");
    out << mesh.n_vertices() << " 3 0 0\n";
    const MatX3& V = mesh.vertices();
    for (Eigen::Index i = 0; i < V.rows(); ++i)
      out << i << ' ' << io::fmt_double(V(i, 0)) << ' ' << io::fmt_double(V(i, 1)) << ' '
          << io::fmt_double(V(i, 2)) << '\n';
  }
  {
    std::ofstream out = io::open_output(base_path + ".ele");
    out << mesh.n_simplices() << " 4 0\n";
    const MatX4i& T = mesh.simplices();
    for (Eigen::Index t = 0; t < T.rows(); ++t)
      out << t << ' ' << T(t, 0) << ' ' << T(t, 1) << ' ' << T(t, 2) << ' ' << T(t, 3) << '\n';
  }
}

enum class MeshFormat { Obj, Off, Tetgen };

inline MeshFormat guess_format(const std::string& path) {
  std::filesystem::path p(path);
  std::string ext = p.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".obj") return MeshFormat::Obj;
  if (ext == ".off") return MeshFormat::Off;
  if (ext == ".node" || ext == ".ele" || ext.empty()) return MeshFormat::Tetgen;
  throw ParseError("unrecognized mesh extension '" + ext + "'");
}

inline TriMesh load_trimesh(const std::string& path) {
  switch (guess_format(path)) {
    case MeshFormat::Obj:
      return load_obj(path);
    case MeshFormat::Off:
      return load_off(path);
    default:
      throw ParseError("'" + path + "' is not a surface mesh format");
  }
}

inline TetMesh load_tetmesh(const std::string& path) {
  std::filesystem::path p(path);
  std::string base = path;
  std::string ext = p.extension().string();
  if (ext == ".node" || ext == ".ele") base = (p.parent_path() / p.stem()).string();
  return load_tetgen(base);
}

// ---------------------------------------------------------------------------
// Vertex field files: a line with the count, then one "x y z" row per vertex.

inline void save_field(const MatX3& field, const std::string& path) {
  std::ofstream out = io::open_output(path);
  out << field.rows() << '\n';
  for (Eigen::Index i = 0; i < field.rows(); ++i)
    out << io::fmt_double(field(i, 0)) << ' ' << io::fmt_double(field(i, 1)) << ' '
        << io::fmt_double(field(i, 2)) << '\n';
}

inline MatX3 load_field(const std::string& path) {
  std::ifstream in = io::open_input(path);
  Eigen::Index n = 0;
  if (!(in >> n) || n < 0) throw ParseError(path + ": malformed field header");
  MatX3 field(n, 3);
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(in >> field(i, 0) >> field(i, 1) >> field(i, 2)))
      throw ParseError(path + ": truncated field file");
  return field;
}

// ---------------------------------------------------------------------------
// Dense matrix files. ASCII: "rows cols" header then row-major values.
// Binary: 8-byte magic, two little-endian int64 dims, row-major doubles.

inline constexpr char kMatrixMagic[8] = {'F', 'D', 'F', 'M', 'A', 'T', '0', '1'};

inline void save_matrix_ascii(const MatX& m, const std::string& path) {
  std::ofstream out = io::open_output(path);
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << io::fmt_double(m(i, j));
    }
    out << '\n';
  }
}

inline void save_matrix_binary(const MatX& m, const std::string& path) {
  std::ofstream out = io::open_output(path, /*binary=*/true);
  out.write(kMatrixMagic, 8);
  int64_t dims[2] = {m.rows(), m.cols()};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double v = m(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
}

inline MatX load_matrix(const std::string& path) {
  {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw ParseError("cannot open '" + path + "'");
    char magic[8] = {};
    probe.read(magic, 8);
    if (probe.gcount() == 8 && std::memcmp(magic, kMatrixMagic, 8) == 0) {
      int64_t dims[2];
      probe.read(reinterpret_cast<char*>(dims), sizeof(dims));
      if (!probe || dims[0] < 0 || dims[1] < 0) throw ParseError(path + ": malformed binary matrix");
      MatX m(dims[0], dims[1]);
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
          double v;
          probe.read(reinterpret_cast<char*>(&v), sizeof(v));
          if (!probe) throw ParseError(path + ": truncated binary matrix");
          m(i, j) = v;
        }
      return m;
    }
  }
  std::ifstream in = io::open_input(path);
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0)
    throw ParseError(path + ": malformed matrix header");
  MatX m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      if (!(in >> m(i, j))) throw ParseError(path + ": truncated matrix file");
  return m;
}

// ---------------------------------------------------------------------------
// Sidecar files: vertex correspondences ("i j" per line, 0-based) and
// pointwise constraints ("vertex_index ux uy uz" per line).

inline std::vector<int> load_pointmap(const std::string& path, Eigen::Index n_from,
                                      Eigen::Index n_to) {
  std::ifstream in = io::open_input(path);
  std::vector<int> corr(static_cast<size_t>(n_from), -1);
  long a, b;
  while (in >> a >> b) {
    if (a < 0 || a >= n_from) throw ParseError(path + ": source vertex index out of range");
    if (b < 0 || b >= n_to) throw ParseError(path + ": target vertex index out of range");
    corr[static_cast<size_t>(a)] = static_cast<int>(b);
  }
  for (size_t i = 0; i < corr.size(); ++i)
    if (corr[i] < 0)
      throw ParseError(path + ": vertex " + std::to_string(i) + " has no correspondence");
  return corr;
}

inline void save_pointmap(const std::vector<int>& corr, const std::string& path) {
  std::ofstream out = io::open_output(path);
  for (size_t i = 0; i < corr.size(); ++i) out << i << ' ' << corr[i] << '\n';
}

/// Loose "i j" pair list (landmarks); no totality requirement.
inline std::vector<std::pair<int, int>> load_pairs(const std::string& path) {
  std::ifstream in = io::open_input(path);
  std::vector<std::pair<int, int>> pairs;
  long a, b;
  while (in >> a >> b) pairs.emplace_back(static_cast<int>(a), static_cast<int>(b));
  if (pairs.empty()) throw ParseError(path + ": no pairs found");
  return pairs;
}

struct PointConstraint {
  int vertex;
  Vec3 direction;
};

inline std::vector<PointConstraint> load_constraints(const std::string& path, Eigen::Index n) {
  std::ifstream in = io::open_input(path);
  std::vector<PointConstraint> cs;
  long v;
  double x, y, z;
  while (in >> v >> x >> y >> z) {
    if (v < 0 || v >= n) throw ParseError(path + ": constraint vertex index out of range");
    cs.push_back({static_cast<int>(v), Vec3(x, y, z)});
  }
  if (cs.empty()) throw ParseError(path + ": no constraints found");
  return cs;
}

}  // namespace fundeform
