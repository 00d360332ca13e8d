// Smooth test profiles on the grid: gaussian sums, boundary bubbles and random
// band-limited fiber fields.
#pragma once

#include <random>
#include <vector>

#include "rts/fiber.hpp"

namespace rts {

struct Bump {
  double x0 = 0, y0 = 0, width = 0.5;
  cplx amp = 1.0;
};

/// (1 - r^2 / R^2)^power at every node (zero outside the mask).
RealGrid bubble(const Grid& g, int power);
/// Sum of amp exp(-|x - x0|^2 / width^2).
ComplexGrid gaussian_sum(const Grid& g, const std::vector<Bump>& bumps);
/// A few random gaussians; multiplied by a bubble when zero_boundary is set.
ComplexGrid random_smooth(const Grid& g, std::mt19937_64& rng, bool real, bool zero_boundary = false, int bumps = 3);
/// Random field with modes |n| <= degree; real fields get u_{-n} = conj(u_n).
FiberField random_fiber_field(const GridPtr& g, int degree, std::mt19937_64& rng, bool real,
                              bool zero_boundary = false);

}  // namespace rts
