// SPDX-License-Identifier: MIT
#pragma once

#include <functional>

#include "insdg/mesh.hpp"

namespace insdg {

enum class EllipticKind { Dirichlet, Neumann };

// boundary kind per tag for a scalar elliptic problem
struct EllipticBC {
  EllipticKind inflow = EllipticKind::Dirichlet;
  EllipticKind outflow = EllipticKind::Neumann;
  EllipticKind wall = EllipticKind::Dirichlet;

  EllipticKind kind(BoundaryTag t) const {
    switch (t) {
      case BoundaryTag::Inflow: return inflow;
      case BoundaryTag::Outflow: return outflow;
      default: return wall;
    }
  }

  // velocity components: Dirichlet on inflow and walls, Neumann on outflow
  static EllipticBC velocity() { return {}; }
  // pressure: Dirichlet on outflow, Neumann elsewhere
  static EllipticBC pressure() {
    return {EllipticKind::Neumann, EllipticKind::Dirichlet, EllipticKind::Neumann};
  }
  static EllipticBC all_dirichlet() {
    return {EllipticKind::Dirichlet, EllipticKind::Dirichlet, EllipticKind::Dirichlet};
  }
  static EllipticBC all_neumann() {
    return {EllipticKind::Neumann, EllipticKind::Neumann, EllipticKind::Neumann};
  }
};

// flow boundary data; empty callables mean zero data
struct FlowBoundary {
  // Dirichlet velocity on inflow faces
  std::function<Vec2(double x, double y, double t)> velocity;
  // normal derivative of velocity on outflow faces
  std::function<Vec2(double x, double y, double t, double nx, double ny)> velocity_normal_derivative;
  // pressure on outflow faces
  std::function<double(double x, double y, double t)> pressure;
};

}  // namespace insdg
