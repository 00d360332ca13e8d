#include <chrono>
#include <cmath>
#include <random>

#include "doctest.h"
#include "rts/geometry.hpp"

using namespace rts;

namespace {

SpeedField make_speed(SpeedModel m, int n = 64, double R = 1.0) {
  DomainSpec d;
  d.grid_n = n;
  d.radius = R;
  return SpeedField(make_grid(d), m);
}

}  // namespace

TEST_CASE("straight ray from the centre exits at distance R") {
  const SpeedField sp = make_speed(SpeedModel::constant());
  const GeodesicPath p = flow({0, 0, 0}, sp, FlowDirection::Forward);
  CHECK(p.tau_forward == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.points.back().x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(p.points.back().y) < 1e-12);
}

TEST_CASE("exit time matches the chord 2 cos beta on the unit disk") {
  const SpeedField sp = make_speed(SpeedModel::constant());
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> S(0, 2 * M_PI), B(-M_PI / 2 + 1e-3, M_PI / 2 - 1e-3);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const double s = S(rng), beta = B(rng);
    // Inward direction: beta measured from the inner normal.
    const PhasePoint p = boundary_point(s, s + M_PI + beta, 1.0);
    worst = std::max(worst, std::abs(exit_time(p, sp).forward - 2 * std::cos(beta)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("constant speed scales time by 1/c0") {
  const SpeedField sp = make_speed(SpeedModel::constant(2.0));
  CHECK(exit_time({0, 0, 1.0}, sp).forward == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("flow is reversible to RK4 accuracy") {
  const SpeedField sp = make_speed(SpeedModel::gaussian(0.3));
  const PhasePoint start{0.2, -0.1, 0.7};
  const GeodesicPath fw = flow(start, sp, FlowDirection::Forward);
  const int k = 60;
  REQUIRE(fw.points.size() > k + 1);
  // Run k steps back from the k-th forward node.
  PhasePoint back{};
  int count = 0;
  trace_ray(sp.model(), 1.0, fw.points[k], FlowDirection::Backward, fw.step, 100.0,
            [&](double, const PhasePoint& p) {
              if (count++ == k) back = p;
            });
  CHECK(std::hypot(back.x - start.x, back.y - start.y) < 1e-9);
  CHECK(std::abs(back.theta - start.theta) < 1e-9);
  // Exit points are only accurate to the linear back-tracking of the last step.
  const GeodesicPath bw = flow(fw.points.back(), sp, FlowDirection::Backward);
  const GeodesicPath entry = flow(start, sp, FlowDirection::Backward);
  CHECK(std::hypot(bw.points.back().x - entry.points.back().x, bw.points.back().y - entry.points.back().y) <
        sp.grid().h());
}

TEST_CASE("gaussian curvature of the gaussian speed") {
  const SpeedModel m = SpeedModel::gaussian(1.0);
  for (double r : {0.0, 0.3, 0.8}) {
    CHECK(m.curvature(r, 0.2) == doctest::Approx(-4 * std::exp(-2 * (r * r + 0.04))).epsilon(1e-10));
  }
  const SpeedField sp = make_speed(m, 65);
  const RealGrid k = curvature(sp);
  double err = 0;
  for (int node : sp.grid().mask_nodes()) {
    const double x = sp.grid().node_x(node), y = sp.grid().node_y(node);
    if (x * x + y * y < 0.8) err = std::max(err, std::abs(k[node] + 4 * std::exp(-2 * (x * x + y * y))));
  }
  CHECK(err < 5e-3);
}

TEST_CASE("boundary mu ignores the speed") {
  const SpeedField a = make_speed(SpeedModel::constant());
  const SpeedField b = make_speed(SpeedModel::bump(0.3, 0.5));
  CHECK(boundary_mu(0.4, 0.4, a) == doctest::Approx(1.0));
  CHECK(boundary_mu(0.4, 0.4 + M_PI / 3, b) == doctest::Approx(0.5));
}

TEST_CASE("Santalo identity for F = 1 on the unit disk") {
  DomainSpec d;
  d.grid_n = 128;
  d.boundary_n = 256;
  d.dir_n = 128;
  const SpeedField sp(make_grid(d), SpeedModel::constant());
  const auto t0 = std::chrono::steady_clock::now();
  const double v = santalo_integrate([](const PhasePoint&) { return 1.0; }, sp, d);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(std::abs(v / (2 * M_PI * M_PI) - 1) < 5e-3);
  CHECK(secs < 30);
}

TEST_CASE("Santalo against direct phase-space quadrature for a non-flat metric") {
  DomainSpec d;
  d.grid_n = 96;
  d.boundary_n = 192;
  d.dir_n = 96;
  const SpeedField sp(make_grid(d), SpeedModel::bump(0.2, 0.6));
  auto F = [](const PhasePoint& p) { return 1.0 + 0.5 * p.x * std::cos(p.theta) + p.y * p.y; };
  const double a = santalo_integrate(F, sp, d);
  const double b = grid_phase_integral(F, sp, 32);
  CHECK(a == doctest::Approx(b).epsilon(1e-2));
}

TEST_CASE("convexity constant of the disk is 2R") {
  DomainSpec d;
  const SpeedField sp(make_grid(d), SpeedModel::constant());
  const double c0 = convexity_constant(sp, d);
  CHECK(c0 >= 1.98);
  CHECK(c0 <= 2.02);
  d.radius = 2.5;
  const SpeedField sp2(make_grid(d), SpeedModel::constant());
  CHECK(convexity_constant(sp2, d) == doctest::Approx(2 * 2.5).epsilon(1e-2));
}

TEST_CASE("simplicity of flat and mildly curved disks") {
  DomainSpec d;
  d.boundary_n = 32;
  d.dir_n = 32;
  const SpeedField flat(make_grid(d), SpeedModel::constant());
  const SimplicityReport r = simplicity_check(flat, d);
  CHECK(r.simple());
  CHECK(r.min_boundary_curvature == doctest::Approx(1.0));
  const SpeedField bump(make_grid(d), SpeedModel::bump(0.2, 0.5));
  CHECK(simplicity_check(bump, d).simple());
}

TEST_CASE("Jacobi field on the flat disk is linear") {
  const SpeedField sp = make_speed(SpeedModel::constant());
  CHECK(jacobi_field({-0.5, 0, 0}, sp, 0.7) == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("fan weights integrate to the boundary measure") {
  const SpeedField sp = make_speed(SpeedModel::constant());
  double w = 0, wmu = 0;
  for (const FanEntry& e : fan_entries(sp, 128, 64, true)) {
    w += e.weight;
    wmu += e.weight * e.mu;
  }
  // int_{dM} int_{mu>0} dtheta ds = 2 pi * pi and with mu: 2 pi * 2.
  CHECK(w == doctest::Approx(2 * M_PI * M_PI).epsilon(1e-3));
  CHECK(wmu == doctest::Approx(4 * M_PI).epsilon(1e-3));
}
