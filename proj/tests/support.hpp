// Small scenarios shared by the tests.

#pragma once

#include "chns/control.hpp"
#include "chns/forward.hpp"

namespace support {

/// Stripes touching the obstacles, a stirring initial velocity and a stream control.
struct Small {
  chns::Model model;
  chns::CellField phi_a;
  chns::FaceField v_a;
  chns::ControlSeries u;
  chns::NewtonOptions newton;
};

inline Small small(int nx, int ny, int M, double alpha = 0.2, double lx = 4.0, double u_amp = 0.5,
                   double v_amp = 0.3) {
  chns::PhysConfig p;
  p.grid = {nx, ny, lx, lx};
  p.M = M;
  p.tau = 0.5;
  Small s;
  s.model = chns::Model{p, chns::YosidaPotential({p.psi1(), p.psi2(), 1.0}, {alpha, alpha * alpha})};
  s.phi_a = chns::initial_stripes(p.grid, 0.5, 1.0);
  s.v_a = chns::stream_field(p.grid, v_amp);
  s.u = chns::ControlSeries(p.grid, M);
  for (int k = 1; k < M; ++k) {
    s.u.at(k) = chns::stream_field(p.grid, u_amp * (1.0 + 0.3 * k));
  }
  return s;
}

inline chns::Scenario scenario(const Small& s) { return chns::Scenario{s.model, s.phi_a, s.v_a, s.newton}; }

}  // namespace support
