// SPDX-License-Identifier: MIT
#pragma once

#include <map>
#include <string>
#include <utility>

#include "insdg/common.hpp"
#include "insdg/refelem.hpp"

namespace insdg {

enum class BoundaryTag : int { None = 0, Inflow = 1, Outflow = 2, Wall = 3 };

const char* tag_name(BoundaryTag t);

using EdgeKey = std::pair<int, int>;
inline EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::map<EdgeKey, BoundaryTag> boundary;

  int K() const { return static_cast<int>(triangles.size()); }
};

Mesh load_mesh(const std::string& text);
Mesh load_mesh_file(const std::string& path);
std::string write_mesh(const Mesh& mesh);

// checks orientation, manifoldness and boundary tagging; reorients clockwise triangles
void validate_mesh(Mesh& mesh);

struct Rect {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
};

struct SideTags {
  BoundaryTag left = BoundaryTag::Inflow;
  BoundaryTag right = BoundaryTag::Inflow;
  BoundaryTag bottom = BoundaryTag::Inflow;
  BoundaryTag top = BoundaryTag::Inflow;
};

Mesh generate_structured(int nx, int ny, Rect bounds, SideTags tags);

// tensor grid with given line coordinates, cells inside `hole` removed
Mesh generate_tensor(const std::vector<double>& xs, const std::vector<double>& ys, SideTags tags,
                     const Rect* hole = nullptr, BoundaryTag hole_tag = BoundaryTag::Wall);

struct Connectivity {
  int K = 0, Np = 0, Nfp = 0;
  std::vector<int> EToE, EToF;      // K x 3
  std::vector<BoundaryTag> bc;      // K x 3
  std::vector<dlong> vmapM, vmapP;  // K x 3 x Nfp
};

// physical coordinates of all nodes (K x Np each)
void node_coordinates(const Mesh& mesh, const ReferenceElement& ref, std::vector<double>& x,
                      std::vector<double>& y);

Connectivity build_connectivity(const Mesh& mesh, const ReferenceElement& ref);

struct Geometry {
  std::vector<double> rx, sx, ry, sy, J;  // K
  std::vector<double> nx, ny, Jf, tau, h;  // K x 3
  std::vector<double> sJ_over_J;           // K x 3, Jf / J
};

Geometry compute_geometry(const Mesh& mesh, const ReferenceElement& ref, int N);

}  // namespace insdg
