#include <cmath>

#include "doctest.h"
#include "rts/errors.hpp"
#include "rts/grid.hpp"

using namespace rts;

TEST_CASE("area weights sum to the disk area") {
  for (double R : {1.0, 2.5}) {
    DomainSpec d;
    d.radius = R;
    d.grid_n = 48;
    auto g = make_grid(d);
    double total = 0;
    for (int node : g->mask_nodes()) total += g->area_weight(node);
    CHECK(total == doctest::Approx(M_PI * R * R).epsilon(1e-12));
  }
}

TEST_CASE("domain validation") {
  DomainSpec d;
  d.grid_n = 3;
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
  d = DomainSpec{};
  d.radius = -1;
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
}

TEST_CASE("derivatives of a quadratic are exact in the interior and second order at the edge") {
  for (int n : {33, 65}) {
    DomainSpec d;
    d.grid_n = n;
    auto g = make_grid(d);
    ComplexGrid f(g->size());
    for (int node = 0; node < static_cast<int>(g->size()); ++node) {
      const double x = g->node_x(node), y = g->node_y(node);
      f[node] = x * x + 3 * x * y - y;
    }
    const ComplexGrid fx = diff(*g, f, 0, Flavor::Free);
    double err = 0;
    for (int node : g->mask_nodes()) {
      const double x = g->node_x(node), y = g->node_y(node);
      err = std::max(err, std::abs(fx[node] - (2 * x + 3 * y)));
    }
    CHECK(err < 1e-9);
  }
}

TEST_CASE("zero-boundary wirtinger derivative of (1 - r^2) is -zbar") {
  double prev = 0;
  for (int n : {33, 65}) {
    DomainSpec d;
    d.grid_n = n;
    auto g = make_grid(d);
    ComplexGrid f(g->size());
    for (int node : g->mask_nodes()) {
      const double x = g->node_x(node), y = g->node_y(node);
      f[node] = 1 - x * x - y * y;
    }
    const ComplexGrid df = wirtinger(*g, f, false, Flavor::ZeroBoundary);
    double err = 0;
    for (int node : g->mask_nodes())
      err = std::max(err, std::abs(df[node] + cplx(g->node_x(node), -g->node_y(node))));
    CHECK(err < 1e-9);
    prev = err;
  }
  (void)prev;
}

TEST_CASE("bilinear interpolation reproduces linear fields including the outside band") {
  DomainSpec d;
  d.grid_n = 40;
  auto g = make_grid(d);
  RealGrid f(g->size(), 0.0);
  for (int node : g->mask_nodes()) f[node] = 2 * g->node_x(node) - g->node_y(node) + 0.5;
  const RealGrid e = extend(*g, f);
  for (double t = 0; t < 2 * M_PI; t += 0.37) {
    const double x = std::cos(t), y = std::sin(t);
    CHECK(interpolate(*g, e, x, y) == doctest::Approx(2 * x - y + 0.5).epsilon(1e-9));
  }
}
