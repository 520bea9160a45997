#include "ocfk/mesh_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "ocfk/io_util.hpp"

namespace ocfk {

namespace {

std::string lower_ext(const std::string& path) {
  const auto pos = path.rfind('.');
  if (pos == std::string::npos) return "";
  std::string ext = path.substr(pos + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return in;
}

double parse_double(const std::string& tok, const std::string& path) {
  try {
    size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(path + ": malformed number '" + tok + "'");
  }
}

long parse_long(const std::string& tok, const std::string& path) {
  try {
    size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(path + ": malformed integer '" + tok + "'");
  }
}

// OBJ face corner: "v", "v/vt", "v//vn", "v/vt/vn". Only the vertex index
// matters here; per-corner normal indices are not retained (normals are
// per-vertex in this toolkit).
std::uint32_t parse_face_corner(const std::string& tok, size_t vertex_count,
                                const std::string& path) {
  const std::string head = tok.substr(0, tok.find('/'));
  const long idx = parse_long(head, path);
  if (idx < 1 || static_cast<size_t>(idx) > vertex_count) {
    throw std::runtime_error(path + ": face index " + std::to_string(idx) + " out of range");
  }
  return static_cast<std::uint32_t>(idx - 1);
}

}  // namespace

TriangleMesh load_mesh(const std::string& path) {
  const std::string ext = lower_ext(path);
  if (ext == "obj") return load_obj(path);
  if (ext == "off") return load_off(path);
  throw std::runtime_error("unsupported mesh format: " + path);
}

void save_mesh(const std::string& path, const TriangleMesh& mesh) {
  const std::string ext = lower_ext(path);
  if (ext == "obj") return save_obj(path, mesh);
  if (ext == "off") return save_off(path, mesh);
  throw std::runtime_error("unsupported mesh format: " + path);
}

TriangleMesh load_obj(const std::string& path) {
  std::ifstream in = open_input(path);
  TriangleMesh mesh;
  std::vector<Vec3> normals;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      std::string xs, ys, zs;
      if (!(ls >> xs >> ys >> zs)) throw std::runtime_error(path + ": malformed vertex line");
      mesh.vertices.push_back(
          {parse_double(xs, path), parse_double(ys, path), parse_double(zs, path)});
    } else if (tag == "vn") {
      std::string xs, ys, zs;
      if (!(ls >> xs >> ys >> zs)) throw std::runtime_error(path + ": malformed normal line");
      normals.push_back({parse_double(xs, path), parse_double(ys, path), parse_double(zs, path)});
    } else if (tag == "f") {
      std::vector<std::uint32_t> corners;
      std::string tok;
      while (ls >> tok) corners.push_back(parse_face_corner(tok, mesh.vertices.size(), path));
      if (corners.size() != 3) {
        throw std::runtime_error(path + ": only triangle faces are supported");
      }
      mesh.triangles.push_back({corners[0], corners[1], corners[2]});
    }
    // other records (vt, o, g, s, usemtl, ...) are ignored
  }
  if (normals.size() == mesh.vertices.size()) mesh.normals = std::move(normals);
  validate_mesh(mesh);
  return mesh;
}

void save_obj(const std::string& path, const TriangleMesh& mesh) {
  AtomicFileWriter writer(path, false);
  std::ostream& os = writer.stream();
  for (const Vec3& v : mesh.vertices) {
    os << "v " << format_double(v.x) << ' ' << format_double(v.y) << ' ' << format_double(v.z)
       << '\n';
  }
  for (const Vec3& n : mesh.normals) {
    os << "vn " << format_double(n.x) << ' ' << format_double(n.y) << ' ' << format_double(n.z)
       << '\n';
  }
  const bool with_normals = mesh.has_normals();
  for (const Triangle& t : mesh.triangles) {
    if (with_normals) {
      os << "f " << t[0] + 1 << "//" << t[0] + 1 << ' ' << t[1] + 1 << "//" << t[1] + 1 << ' '
         << t[2] + 1 << "//" << t[2] + 1 << '\n';
    } else {
      os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    }
  }
  writer.commit();
}

TriangleMesh load_off(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string tok;
  if (!(in >> tok) || tok != "OFF") throw std::runtime_error(path + ": missing OFF header");
  size_t nv = 0, nf = 0, ne = 0;
  if (!(in >> nv >> nf >> ne)) throw std::runtime_error(path + ": malformed OFF counts");
  TriangleMesh mesh;
  mesh.vertices.reserve(nv);
  for (size_t i = 0; i < nv; ++i) {
    std::string xs, ys, zs;
    if (!(in >> xs >> ys >> zs)) throw std::runtime_error(path + ": truncated vertex list");
    mesh.vertices.push_back(
        {parse_double(xs, path), parse_double(ys, path), parse_double(zs, path)});
  }
  mesh.triangles.reserve(nf);
  for (size_t i = 0; i < nf; ++i) {
    size_t arity = 0;
    if (!(in >> arity)) throw std::runtime_error(path + ": truncated face list");
    if (arity != 3) throw std::runtime_error(path + ": only triangle faces are supported");
    long a, b, c;
    if (!(in >> a >> b >> c)) throw std::runtime_error(path + ": truncated face list");
    for (long idx : {a, b, c}) {
      if (idx < 0 || static_cast<size_t>(idx) >= mesh.vertices.size()) {
        throw std::runtime_error(path + ": face index " + std::to_string(idx) + " out of range");
      }
    }
    mesh.triangles.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                              static_cast<std::uint32_t>(c)});
  }
  validate_mesh(mesh);
  return mesh;
}

void save_off(const std::string& path, const TriangleMesh& mesh) {
  AtomicFileWriter writer(path, false);
  std::ostream& os = writer.stream();
  os << "OFF\n" << mesh.vertices.size() << ' ' << mesh.triangles.size() << " 0\n";
  for (const Vec3& v : mesh.vertices) {
    os << format_double(v.x) << ' ' << format_double(v.y) << ' ' << format_double(v.z) << '\n';
  }
  for (const Triangle& t : mesh.triangles) {
    os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  writer.commit();
}

PointCloud load_cloud(const std::string& path) {
  const std::string ext = lower_ext(path);
  if (ext == "xyz") return load_xyz(path);
  if (ext == "ply") return load_ply_cloud(path);
  throw std::runtime_error("unsupported point-cloud format: " + path);
}

void save_cloud(const std::string& path, const PointCloud& cloud) {
  const std::string ext = lower_ext(path);
  if (ext == "xyz") return save_xyz(path, cloud);
  if (ext == "ply") return save_ply_cloud(path, cloud);
  throw std::runtime_error("unsupported point-cloud format: " + path);
}

PointCloud load_xyz(const std::string& path) {
  std::ifstream in = open_input(path);
  PointCloud cloud;
  std::string line;
  bool any_normals = false;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<std::string> toks;
    std::string tok;
    while (ls >> tok) toks.push_back(tok);
    if (toks.empty() || toks[0][0] == '#') continue;
    if (toks.size() != 3 && toks.size() != 6) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 3 or 6 values per line");
    }
    cloud.points.push_back(
        {parse_double(toks[0], path), parse_double(toks[1], path), parse_double(toks[2], path)});
    if (toks.size() == 6) {
      any_normals = true;
      cloud.normals.push_back(
          {parse_double(toks[3], path), parse_double(toks[4], path), parse_double(toks[5], path)});
    } else if (any_normals) {
      throw std::runtime_error(path + ": mixed lines with and without normals");
    }
  }
  if (any_normals && cloud.normals.size() != cloud.points.size()) {
    throw std::runtime_error(path + ": mixed lines with and without normals");
  }
  if (cloud.points.empty()) throw std::runtime_error(path + ": empty point cloud");
  return cloud;
}

void save_xyz(const std::string& path, const PointCloud& cloud) {
  AtomicFileWriter writer(path, false);
  std::ostream& os = writer.stream();
  const bool with_normals = cloud.has_normals();
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3& p = cloud.points[i];
    os << format_double(p.x) << ' ' << format_double(p.y) << ' ' << format_double(p.z);
    if (with_normals) {
      const Vec3& n = cloud.normals[i];
      os << ' ' << format_double(n.x) << ' ' << format_double(n.y) << ' ' << format_double(n.z);
    }
    os << '\n';
  }
  writer.commit();
}

PointCloud load_ply_cloud(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply") {
    throw std::runtime_error(path + ": not a PLY file");
  }

  size_t vertex_count = 0;
  std::vector<std::string> vertex_props;
  bool in_vertex_element = false;
  bool ascii = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = (fmt == "ascii");
    } else if (tag == "element") {
      std::string name;
      size_t count = 0;
      ls >> name >> count;
      in_vertex_element = (name == "vertex");
      if (in_vertex_element) vertex_count = count;
      if (name == "face" && count != 0) {
        throw std::runtime_error(path + ": PLY input must be a point cloud (no faces)");
      }
    } else if (tag == "property" && in_vertex_element) {
      std::string type, name;
      ls >> type >> name;
      vertex_props.push_back(name);
    } else if (tag == "end_header") {
      break;
    }
  }
  if (!ascii) throw std::runtime_error(path + ": only ASCII PLY is supported");
  if (vertex_count == 0) throw std::runtime_error(path + ": empty point cloud");

  auto prop_index = [&](const std::string& name) -> int {
    for (size_t i = 0; i < vertex_props.size(); ++i) {
      if (vertex_props[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  const int ix = prop_index("x"), iy = prop_index("y"), iz = prop_index("z");
  const int inx = prop_index("nx"), iny = prop_index("ny"), inz = prop_index("nz");
  if (ix < 0 || iy < 0 || iz < 0) throw std::runtime_error(path + ": PLY lacks x/y/z properties");
  const bool with_normals = inx >= 0 && iny >= 0 && inz >= 0;

  PointCloud cloud;
  cloud.points.reserve(vertex_count);
  for (size_t i = 0; i < vertex_count; ++i) {
    std::vector<double> row(vertex_props.size());
    for (size_t j = 0; j < row.size(); ++j) {
      std::string tok;
      if (!(in >> tok)) throw std::runtime_error(path + ": truncated vertex data");
      row[j] = parse_double(tok, path);
    }
    cloud.points.push_back({row[ix], row[iy], row[iz]});
    if (with_normals) cloud.normals.push_back({row[inx], row[iny], row[inz]});
  }
  return cloud;
}

void save_ply_cloud(const std::string& path, const PointCloud& cloud) {
  AtomicFileWriter writer(path, false);
  std::ostream& os = writer.stream();
  const bool with_normals = cloud.has_normals();
  os << "ply\nformat ascii 1.0\nelement vertex " << cloud.points.size() << '\n';
  os << "property double x\nproperty double y\nproperty double z\n";
  if (with_normals) os << "property double nx\nproperty double ny\nproperty double nz\n";
  os << "end_header\n";
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3& p = cloud.points[i];
    os << format_double(p.x) << ' ' << format_double(p.y) << ' ' << format_double(p.z);
    if (with_normals) {
      const Vec3& n = cloud.normals[i];
      os << ' ' << format_double(n.x) << ' ' << format_double(n.y) << ' ' << format_double(n.z);
    }
    os << '\n';
  }
  writer.commit();
}

}  // namespace ocfk
