// SPDX-License-Identifier: MIT
#include "insdg/mesh.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace insdg {

const char* tag_name(BoundaryTag t) {
  switch (t) {
    case BoundaryTag::Inflow: return "inflow";
    case BoundaryTag::Outflow: return "outflow";
    case BoundaryTag::Wall: return "wall";
    default: return "none";
  }
}

namespace {

struct LineReader {
  std::istringstream in;
  int lineno = 0;

  explicit LineReader(const std::string& text) : in(text) {}

  // next non-empty, non-comment line
  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++lineno;
      const auto p = line.find_first_not_of(" \t\r");
      if (p == std::string::npos) continue;
      if (line[p] == '#') continue;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw MeshError("mesh parse error at line " + std::to_string(lineno) + ": " + what);
  }
};

int read_header(LineReader& rd, const std::string& name) {
  std::string line;
  if (!rd.next(line)) rd.fail("unexpected end of file, expected " + name);
  std::istringstream ls(line);
  std::string word;
  long long n = -1;
  ls >> word >> n;
  if (word != name || !ls || n < 0) rd.fail("expected '" + name + " <count>'");
  return static_cast<int>(n);
}

double signed_area(const Mesh& m, const std::array<int, 3>& t) {
  const Vec2 a = m.vertices[t[0]], b = m.vertices[t[1]], c = m.vertices[t[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

}  // namespace

Mesh load_mesh(const std::string& text) {
  LineReader rd(text);
  Mesh mesh;
  std::string line;

  const int nv = read_header(rd, "$Nodes");
  std::map<long long, int> vid;
  for (int i = 0; i < nv; ++i) {
    if (!rd.next(line)) rd.fail("unexpected end of file in $Nodes");
    std::istringstream ls(line);
    long long id;
    double x, y;
    if (!(ls >> id >> x >> y)) rd.fail("expected 'id x y'");
    if (vid.count(id)) rd.fail("duplicate node id " + std::to_string(id));
    vid[id] = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back({x, y});
  }
  auto vertex = [&](long long id) {
    auto it = vid.find(id);
    if (it == vid.end()) rd.fail("unknown node id " + std::to_string(id));
    return it->second;
  };

  const int ne = read_header(rd, "$Elements");
  for (int i = 0; i < ne; ++i) {
    if (!rd.next(line)) rd.fail("unexpected end of file in $Elements");
    std::istringstream ls(line);
    long long id, a, b, c;
    if (!(ls >> id >> a >> b >> c)) rd.fail("expected 'id v1 v2 v3'");
    mesh.triangles.push_back({vertex(a), vertex(b), vertex(c)});
  }

  const int nb = read_header(rd, "$Boundary");
  for (int i = 0; i < nb; ++i) {
    if (!rd.next(line)) rd.fail("unexpected end of file in $Boundary");
    std::istringstream ls(line);
    long long a, b;
    int tag;
    if (!(ls >> a >> b >> tag)) rd.fail("expected 'va vb tag'");
    if (tag < 1 || tag > 3) rd.fail("boundary tag must be 1, 2 or 3");
    const EdgeKey key = edge_key(vertex(a), vertex(b));
    if (mesh.boundary.count(key)) rd.fail("edge tagged twice");
    mesh.boundary[key] = static_cast<BoundaryTag>(tag);
  }
  if (rd.next(line)) rd.fail("unexpected trailing content");

  validate_mesh(mesh);
  return mesh;
}

Mesh load_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_mesh(ss.str());
}

std::string write_mesh(const Mesh& mesh) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "$Nodes " << mesh.vertices.size() << "\n";
  for (size_t i = 0; i < mesh.vertices.size(); ++i)
    os << i + 1 << " " << mesh.vertices[i].x << " " << mesh.vertices[i].y << "\n";
  os << "$Elements " << mesh.triangles.size() << "\n";
  for (size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    os << i + 1 << " " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
  }
  os << "$Boundary " << mesh.boundary.size() << "\n";
  for (const auto& [key, tag] : mesh.boundary)
    os << key.first + 1 << " " << key.second + 1 << " " << static_cast<int>(tag) << "\n";
  return os.str();
}

void validate_mesh(Mesh& mesh) {
  const int nv = static_cast<int>(mesh.vertices.size());
  for (int e = 0; e < mesh.K(); ++e) {
    auto& t = mesh.triangles[e];
    for (int v : t)
      if (v < 0 || v >= nv) throw MeshError("element " + std::to_string(e) + " references missing vertex");
    const double area = signed_area(mesh, t);
    if (area == 0.0 || !std::isfinite(area)) throw MeshError("element " + std::to_string(e) + " is degenerate");
    if (area < 0.0) std::swap(t[1], t[2]);
  }
  std::map<EdgeKey, int> count;
  for (const auto& t : mesh.triangles)
    for (int f = 0; f < 3; ++f) ++count[edge_key(t[f], t[(f + 1) % 3])];
  auto name = [](const EdgeKey& key) {
    return "(" + std::to_string(key.first + 1) + "," + std::to_string(key.second + 1) + ")";
  };
  for (const auto& [key, n] : count)
    if (n > 2) throw MeshError("non-manifold edge " + name(key) + " shared by " + std::to_string(n) + " elements");
  for (const auto& [key, n] : count) {
    const std::string edge = name(key);
    const bool tagged = mesh.boundary.count(key) > 0;
    if (n == 1 && !tagged) throw MeshError("untagged boundary edge " + edge);
    if (n == 2 && tagged) throw MeshError("interior edge " + edge + " carries a boundary tag");
  }
  for (const auto& [key, tag] : mesh.boundary) {
    if (!count.count(key))
      throw MeshError("boundary entry (" + std::to_string(key.first + 1) + "," + std::to_string(key.second + 1) +
                      ") is not an element edge");
    if (tag == BoundaryTag::None) throw MeshError("boundary entry with tag none");
  }
}

Mesh generate_tensor(const std::vector<double>& xs, const std::vector<double>& ys, SideTags tags,
                     const Rect* hole, BoundaryTag hole_tag) {
  const int nx = static_cast<int>(xs.size()) - 1;
  const int ny = static_cast<int>(ys.size()) - 1;
  if (nx < 1 || ny < 1) throw MeshError("structured grid needs nx, ny >= 1");
  for (int i = 0; i < nx; ++i)
    if (!(xs[i + 1] > xs[i])) throw MeshError("degenerate bounds: x lines not increasing");
  for (int j = 0; j < ny; ++j)
    if (!(ys[j + 1] > ys[j])) throw MeshError("degenerate bounds: y lines not increasing");

  Mesh m;
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) m.vertices.push_back({xs[i], ys[j]});

  auto inside_hole = [&](int i, int j) {
    if (!hole) return false;
    const double cx = 0.5 * (xs[i] + xs[i + 1]);
    const double cy = 0.5 * (ys[j] + ys[j + 1]);
    return cx > hole->x0 && cx < hole->x1 && cy > hole->y0 && cy < hole->y1;
  };

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (inside_hole(i, j)) continue;
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
      m.triangles.push_back({v00, v10, v11});
      m.triangles.push_back({v00, v11, v01});
    }
  }

  std::map<EdgeKey, int> count;
  for (const auto& t : m.triangles)
    for (int f = 0; f < 3; ++f) ++count[edge_key(t[f], t[(f + 1) % 3])];
  const double x0 = xs.front(), x1 = xs.back(), y0 = ys.front(), y1 = ys.back();
  for (const auto& [key, n] : count) {
    if (n != 1) continue;
    const Vec2 a = m.vertices[key.first], b = m.vertices[key.second];
    BoundaryTag tag = hole_tag;
    if (a.x == x0 && b.x == x0) tag = tags.left;
    else if (a.x == x1 && b.x == x1) tag = tags.right;
    else if (a.y == y0 && b.y == y0) tag = tags.bottom;
    else if (a.y == y1 && b.y == y1) tag = tags.top;
    m.boundary[key] = tag;
  }

  // drop vertices unused because of the hole
  std::vector<int> remap(m.vertices.size(), -1);
  std::vector<Vec2> verts;
  for (auto& t : m.triangles)
    for (int& v : t) {
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(verts.size());
        verts.push_back(m.vertices[v]);
      }
      v = remap[v];
    }
  std::map<EdgeKey, BoundaryTag> bnd;
  for (const auto& [key, tag] : m.boundary) bnd[edge_key(remap[key.first], remap[key.second])] = tag;
  m.vertices = std::move(verts);
  m.boundary = std::move(bnd);

  validate_mesh(m);
  return m;
}

Mesh generate_structured(int nx, int ny, Rect b, SideTags tags) {
  if (nx < 1 || ny < 1) throw MeshError("structured grid needs nx, ny >= 1");
  if (!(b.x1 > b.x0) || !(b.y1 > b.y0)) throw MeshError("degenerate bounds");
  std::vector<double> xs(nx + 1), ys(ny + 1);
  for (int i = 0; i <= nx; ++i) xs[i] = (i == nx) ? b.x1 : b.x0 + (b.x1 - b.x0) * i / nx;
  for (int j = 0; j <= ny; ++j) ys[j] = (j == ny) ? b.y1 : b.y0 + (b.y1 - b.y0) * j / ny;
  return generate_tensor(xs, ys, tags);
}

void node_coordinates(const Mesh& mesh, const ReferenceElement& ref, std::vector<double>& x,
                      std::vector<double>& y) {
  const int K = mesh.K(), Np = ref.Np;
  x.assign(static_cast<size_t>(K) * Np, 0.0);
  y.assign(static_cast<size_t>(K) * Np, 0.0);
  for (int e = 0; e < K; ++e) {
    const auto& t = mesh.triangles[e];
    const Vec2 a = mesh.vertices[t[0]], b = mesh.vertices[t[1]], c = mesh.vertices[t[2]];
    for (int n = 0; n < Np; ++n) {
      const double r = ref.nodes.r[n], s = ref.nodes.s[n];
      const double la = -0.5 * (r + s), lb = 0.5 * (1.0 + r), lc = 0.5 * (1.0 + s);
      x[e * Np + n] = la * a.x + lb * b.x + lc * c.x;
      y[e * Np + n] = la * a.y + lb * b.y + lc * c.y;
    }
  }
}

namespace {

// element-face neighbor table from shared vertex pairs
void face_neighbors(const Mesh& mesh, std::vector<int>& EToE, std::vector<int>& EToF) {
  const int K = mesh.K();
  EToE.resize(3 * K);
  EToF.resize(3 * K);
  std::map<EdgeKey, std::pair<int, int>> first;
  for (int e = 0; e < K; ++e) {
    for (int f = 0; f < 3; ++f) {
      EToE[3 * e + f] = e;
      EToF[3 * e + f] = f;
    }
  }
  for (int e = 0; e < K; ++e) {
    const auto& t = mesh.triangles[e];
    for (int f = 0; f < 3; ++f) {
      const EdgeKey key = edge_key(t[f], t[(f + 1) % 3]);
      auto it = first.find(key);
      if (it == first.end()) {
        first[key] = {e, f};
      } else {
        const auto [e2, f2] = it->second;
        EToE[3 * e + f] = e2;
        EToF[3 * e + f] = f2;
        EToE[3 * e2 + f2] = e;
        EToF[3 * e2 + f2] = f;
      }
    }
  }
}

}  // namespace

Connectivity build_connectivity(const Mesh& mesh, const ReferenceElement& ref) {
  Connectivity c;
  c.K = mesh.K();
  c.Np = ref.Np;
  c.Nfp = ref.Nfp;
  const int K = c.K, Np = c.Np, Nfp = c.Nfp;
  face_neighbors(mesh, c.EToE, c.EToF);

  std::vector<double> x, y;
  node_coordinates(mesh, ref, x, y);

  c.bc.assign(3 * K, BoundaryTag::None);
  c.vmapM.resize(static_cast<size_t>(K) * 3 * Nfp);
  c.vmapP.resize(static_cast<size_t>(K) * 3 * Nfp);
  for (int e = 0; e < K; ++e) {
    const auto& t = mesh.triangles[e];
    for (int f = 0; f < 3; ++f) {
      const Vec2 va = mesh.vertices[t[f]], vb = mesh.vertices[t[(f + 1) % 3]];
      const double len = std::hypot(vb.x - va.x, vb.y - va.y);
      const int e2 = c.EToE[3 * e + f], f2 = c.EToF[3 * e + f];
      if (e2 == e && f2 == f) {
        auto it = mesh.boundary.find(edge_key(t[f], t[(f + 1) % 3]));
        c.bc[3 * e + f] = (it == mesh.boundary.end()) ? BoundaryTag::None : it->second;
        if (c.bc[3 * e + f] == BoundaryTag::None)
          throw MeshError("connectivity: boundary face of element " + std::to_string(e) + " has no tag");
      }
      for (int j = 0; j < Nfp; ++j) {
        const dlong idx = (static_cast<dlong>(e) * 3 + f) * Nfp + j;
        const dlong m = static_cast<dlong>(e) * Np + ref.fmask(f)[j];
        c.vmapM[idx] = m;
        if (e2 == e && f2 == f) {
          c.vmapP[idx] = m;
          continue;
        }
        dlong match = -1;
        for (int k = 0; k < Nfp; ++k) {
          const dlong p = static_cast<dlong>(e2) * Np + ref.fmask(f2)[k];
          if (std::hypot(x[p] - x[m], y[p] - y[m]) < 1e-10 * len) {
            match = p;
            break;
          }
        }
        if (match < 0)
          throw MeshError("connectivity: trace nodes of element " + std::to_string(e) + " face " +
                          std::to_string(f) + " do not match neighbor " + std::to_string(e2));
        c.vmapP[idx] = match;
      }
    }
  }
  return c;
}

Geometry compute_geometry(const Mesh& mesh, const ReferenceElement& /*ref*/, int N) {
  const int K = mesh.K();
  Geometry g;
  g.rx.resize(K);
  g.sx.resize(K);
  g.ry.resize(K);
  g.sy.resize(K);
  g.J.resize(K);
  g.nx.resize(3 * K);
  g.ny.resize(3 * K);
  g.Jf.resize(3 * K);
  g.tau.resize(3 * K);
  g.h.resize(3 * K);
  g.sJ_over_J.resize(3 * K);

  for (int e = 0; e < K; ++e) {
    const auto& t = mesh.triangles[e];
    const Vec2 a = mesh.vertices[t[0]], b = mesh.vertices[t[1]], c = mesh.vertices[t[2]];
    const double xr = 0.5 * (b.x - a.x), xs = 0.5 * (c.x - a.x);
    const double yr = 0.5 * (b.y - a.y), ys = 0.5 * (c.y - a.y);
    const double J = xr * ys - xs * yr;
    if (!(J > 0.0)) throw GeometryError("element " + std::to_string(e) + " is inverted (J = " + std::to_string(J) + ")");
    g.J[e] = J;
    g.rx[e] = ys / J;
    g.sx[e] = -yr / J;
    g.ry[e] = -xs / J;
    g.sy[e] = xr / J;
    const double area = 2.0 * J;
    for (int f = 0; f < 3; ++f) {
      const Vec2 va = mesh.vertices[t[f]], vb = mesh.vertices[t[(f + 1) % 3]];
      const double dx = vb.x - va.x, dy = vb.y - va.y;
      const double len = std::hypot(dx, dy);
      g.nx[3 * e + f] = dy / len;
      g.ny[3 * e + f] = -dx / len;
      g.Jf[3 * e + f] = 0.5 * len;
      g.h[3 * e + f] = area / len;
      g.sJ_over_J[3 * e + f] = 0.5 * len / J;
    }
  }

  std::vector<int> EToE, EToF;
  face_neighbors(mesh, EToE, EToF);
  const double base = 0.5 * (N + 1) * (N + 2);
  for (int e = 0; e < K; ++e) {
    for (int f = 0; f < 3; ++f) {
      const int e2 = EToE[3 * e + f], f2 = EToF[3 * e + f];
      const double hm = g.h[3 * e + f], hp = g.h[3 * e2 + f2];
      g.tau[3 * e + f] = base * std::max(1.0 / hm, 1.0 / hp);
    }
  }
  return g;
}

}  // namespace insdg
