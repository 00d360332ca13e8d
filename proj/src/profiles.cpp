#include "rts/profiles.hpp"

#include <cmath>

namespace rts {

RealGrid bubble(const Grid& g, int power) {
  RealGrid out(g.size(), 0.0);
  const double R2 = g.radius() * g.radius();
  for (int node : g.mask_nodes()) {
    const double x = g.node_x(node), y = g.node_y(node);
    out[node] = std::pow(1.0 - (x * x + y * y) / R2, power);
  }
  return out;
}

ComplexGrid gaussian_sum(const Grid& g, const std::vector<Bump>& bumps) {
  ComplexGrid out(g.size(), 0.0);
  for (int node : g.mask_nodes()) {
    const double x = g.node_x(node), y = g.node_y(node);
    cplx acc = 0;
    for (const Bump& b : bumps) {
      const double d2 = (x - b.x0) * (x - b.x0) + (y - b.y0) * (y - b.y0);
      acc += b.amp * std::exp(-d2 / (b.width * b.width));
    }
    out[node] = acc;
  }
  return out;
}

ComplexGrid random_smooth(const Grid& g, std::mt19937_64& rng, bool real, bool zero_boundary, int bumps) {
  const double R = g.radius();
  std::uniform_real_distribution<double> pos(-0.5 * R, 0.5 * R), wid(0.35 * R, 0.8 * R), amp(-1.0, 1.0);
  std::vector<Bump> list;
  for (int b = 0; b < bumps; ++b) {
    Bump bp;
    bp.x0 = pos(rng);
    bp.y0 = pos(rng);
    bp.width = wid(rng);
    const double re = amp(rng), im = amp(rng);
    bp.amp = real ? cplx(re, 0) : cplx(re, im);
    list.push_back(bp);
  }
  ComplexGrid out = gaussian_sum(g, list);
  if (zero_boundary) {
    const RealGrid w = bubble(g, 2);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= w[i];
  }
  return out;
}

FiberField random_fiber_field(const GridPtr& g, int degree, std::mt19937_64& rng, bool real, bool zero_boundary) {
  FiberField u(g, degree, real);
  for (int n = real ? 0 : -degree; n <= degree; ++n) {
    ComplexGrid m = random_smooth(*g, rng, real && n == 0, zero_boundary);
    if (n != 0) {
      const double scale = 1.0 / (1 + std::abs(n));
      for (auto& v : m) v *= scale;
    }
    u.mode(n) = m;
    if (real && n > 0)
      for (std::size_t i = 0; i < m.size(); ++i) u.mode(-n)[i] = std::conj(m[i]);
  }
  return u;
}

}  // namespace rts
