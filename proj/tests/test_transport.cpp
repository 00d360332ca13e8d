#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "rts/errors.hpp"
#include "rts/profiles.hpp"
#include "rts/transport.hpp"

using namespace rts;

namespace {

DomainSpec domain(int n, int bn = 96, int dn = 48) {
  DomainSpec d;
  d.grid_n = n;
  d.boundary_n = bn;
  d.dir_n = dn;
  return d;
}

FiberField constant_source(const GridPtr& g, double v) {
  FiberField f(g, 0, true);
  for (int node : g->mask_nodes()) f.mode(0)[node] = v;
  return f;
}

// Adaptive Simpson on [a, b].
double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 0) {
  const double m = 0.5 * (a + b);
  const double whole = (b - a) / 6 * (f(a) + 4 * f(m) + f(b));
  const double l = (m - a) / 6 * (f(a) + 4 * f(0.5 * (a + m)) + f(m));
  const double r = (b - m) / 6 * (f(m) + 4 * f(0.5 * (m + b)) + f(b));
  if (depth > 40 || std::abs(l + r - whole) < 15 * tol) return l + r + (l + r - whole) / 15;
  return simpson(f, a, m, tol / 2, depth + 1) + simpson(f, m, b, tol / 2, depth + 1);
}

}  // namespace

TEST_CASE("free transport of f = 1 with constant attenuation matches (1 - e^{-a tau}) / a") {
  const DomainSpec d = domain(64);
  auto g = make_grid(d);
  const SpeedField sp(g, SpeedModel::constant());
  const double a0 = 0.7;
  const OpticalParams p = OpticalParams::constant(*g, a0, {0.0}, 0.1);
  const ForwardResult fr = forward_solve(constant_source(g, 1.0), p, sp);
  CHECK(fr.iterations == 1);
  const FiberField& u = fr.u;
  // Converged modes of the exact solution; a 2 N + 2 reference aliases like the solver does.
  const int J = 512;
  PhaseSamples s{g, J, std::vector<cplx>(g->size() * J, 0.0)};
  for (int node : g->mask_nodes())
    for (int j = 0; j < J; ++j) {
      const PhasePoint q{g->node_x(node), g->node_y(node), 2 * M_PI * j / J};
      s.at(node, j) = (1 - std::exp(-a0 * exit_time(q, sp).backward)) / a0;
    }
  const FiberField ref = decompose(s, u.degree(), true);
  CHECK(l2_norm(u - ref, sp) / l2_norm(ref, sp) < 1e-3);
}

TEST_CASE("free transport solves (X + a) w = q in the interior") {
  const DomainSpec d = domain(64);
  auto g = make_grid(d);
  const SpeedField sp(g, SpeedModel::bump(0.2, 0.6));
  std::mt19937_64 rng(5);
  const FiberField q = random_fiber_field(g, 1, rng, true);
  RealGrid a(g->size(), 0.0);
  for (int node : g->mask_nodes()) a[node] = 0.5 + 0.2 * g->node_x(node);
  const FiberField w = solve_free_transport(q, a, sp);
  const FiberField res = apply_X(w, sp) + multiply(a, w).with_degree(w.degree() + 1) - q.with_degree(w.degree() + 1);
  double err = 0, ref = 0;
  for (int n = -1; n <= 1; ++n)
    for (int node : g->mask_nodes())
      if (std::hypot(g->node_x(node), g->node_y(node)) < 0.6) {
        err = std::max(err, std::abs(res.mode(n)[node]));
        ref = std::max(ref, std::abs(q.mode(n)[node]));
      }
  CHECK(err < 2e-2 * ref);
}

TEST_CASE("attenuated ray transform of 1 on the flat disk is the chord length") {
  const DomainSpec d = domain(48);
  auto g = make_grid(d);
  const SpeedField sp(g, SpeedModel::constant());
  const BoundaryFan fan = attenuated_ray_transform(constant_source(g, 1.0), RealGrid(g->size(), 0.0), sp, d);
  double worst = 0;
  for (std::size_t i = 0; i < fan.size(); ++i) {
    worst = std::max(worst, std::abs(fan.values[i].real() - 2 * fan.entries[i].mu));
    worst = std::max(worst, std::abs(fan.tau[i] - 2 * fan.entries[i].mu));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("Green identity: int_SM X u = int_dSM u mu") {
  const DomainSpec d = domain(96, 256, 128);
  auto g = make_grid(d);
  const SpeedField sp(g, SpeedModel::bump(0.25, 0.6));
  auto U = [](double x, double y, double th) { return std::exp(0.5 * x) * (1 + y * std::cos(th)) + x * y * std::sin(2 * th); };
  const int J = 16;
  PhaseSamples s{g, J, std::vector<cplx>(g->size() * J, 0.0)};
  for (int node = 0; node < static_cast<int>(g->size()); ++node)
    for (int j = 0; j < J; ++j) s.at(node, j) = U(g->node_x(node), g->node_y(node), 2 * M_PI * j / J);
  // Extend mode values to the band too so derivatives near the edge stay accurate.
  FiberField u(g, 2, true);
  for (int node = 0; node < static_cast<int>(g->size()); ++node)
    for (int n = -2; n <= 2; ++n) {
      cplx acc = 0;
      for (int j = 0; j < J; ++j) acc += s.at(node, j) * std::polar(1.0 / J, -2 * M_PI * n * j / J);
      u.mode(n)[node] = acc;
    }
  const FiberField Xu = apply_X(u, sp);
  const double lhs = 2 * M_PI * inner(*g, Xu.mode(0), ComplexGrid(g->size(), 1.0), &sp.area_density()).real();
  double rhs = 0;
  const double R = 1.0, ds = 2 * M_PI * R / d.boundary_n, dth = 2 * M_PI / d.dir_n;
  for (int i = 0; i < d.boundary_n; ++i) {
    const double phi = ds * i, x = R * std::cos(phi), y = R * std::sin(phi);
    const double c = sp.model().eval(x, y).c;
    for (int j = 0; j < d.dir_n; ++j) {
      const double th = 2 * M_PI * (j + 0.5) / d.dir_n;
      rhs += U(x, y, th) * std::cos(th - phi) * ds / c * dth;
    }
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(2e-2));
}

TEST_CASE("trace bound |I q|^2 <= C0 |q|^2 without attenuation") {
  const DomainSpec d = domain(48);
  auto g = make_grid(d);
  const SpeedField sp(g, SpeedModel::bump(0.2, 0.5));
  const double c0 = convexity_constant(sp, d);
  std::mt19937_64 rng(9);
  for (int t = 0; t < 3; ++t) {
    const FiberField q = random_fiber_field(g, 2, rng, true);
    const BoundaryFan fan = attenuated_ray_transform(q, RealGrid(g->size(), 0.0), sp, d);
    CHECK(fan.l2_norm() <= std::sqrt(c0) * l2_norm(q, sp));
  }
}

TEST_CASE("source iteration contracts for isotropic and degree-2 kernels") {
  const DomainSpec d = domain(40);
  auto g = make_grid(d);
  const SpeedField sp(g, SpeedModel::bump(0.2, 0.5));
  for (const std::vector<cplx>& k : {std::vector<cplx>{0.8}, std::vector<cplx>{0.8, 0.25, 0.1}}) {
    const OpticalParams p = OpticalParams::constant(*g, 0.9, k, 0.1);
    const ForwardResult fr = forward_solve(constant_source(g, 1.0), p, sp);
    CHECK(fr.iterations <= 200);
    CHECK(fr.residuals.back() < 1e-10);
    for (std::size_t i = 1; i < fr.residuals.size(); ++i) CHECK(fr.residuals[i] < fr.residuals[i - 1]);
  }
}

TEST_CASE("measurement is linear and positive") {
  const DomainSpec d = domain(32, 64, 32);
  auto g = make_grid(d);
  const SpeedField sp(g, SpeedModel::constant());
  const OpticalParams p = OpticalParams::constant(*g, 1.0, {0.6, 0.2}, 0.1);
  std::mt19937_64 rng(2);
  const FiberField f1 = random_fiber_field(g, 1, rng, true), f2 = random_fiber_field(g, 1, rng, true);
  const BoundaryFan m1 = measure(f1, p, sp, d), m2 = measure(f2, p, sp, d);
  const BoundaryFan m12 = measure(f1 + 2.0 * f2, p, sp, d);
  double err = 0, scale = 0;
  for (std::size_t i = 0; i < m1.size(); ++i) {
    err = std::max(err, std::abs(m12.values[i] - m1.values[i] - 2.0 * m2.values[i]));
    scale = std::max(scale, std::abs(m12.values[i]));
  }
  CHECK(err < 1e-8 * scale);
  const BoundaryFan pos = measure(constant_source(g, 1.0), p, sp, d);
  for (const cplx& v : pos.values) CHECK(v.real() > -1e-8);
}

TEST_CASE("measurement norm bound holds on random sources") {
  const DomainSpec d = domain(32, 64, 32);
  auto g = make_grid(d);
  const SpeedField sp(g, SpeedModel::bump(0.15, 0.5));
  const OpticalParams p = OpticalParams::constant(*g, 1.0, {0.6, 0.2}, 0.1);
  const NormBoundReport r = norm_bound_check(p, sp, d, 4);
  CHECK(r.ratios.size() == 4);
  CHECK(r.max_ratio <= r.bound * (1 + 1e-3));
  CHECK(r.q_inf == doctest::Approx(1.6));
}

TEST_CASE("non-convergence is reported for a supercritical iteration") {
  const DomainSpec d = domain(24, 32, 16);
  auto g = make_grid(d);
  const SpeedField sp(g, SpeedModel::constant());
  const OpticalParams p = OpticalParams::constant(*g, 1.0, {0.5}, 0.6);
  CHECK_THROWS_AS(forward_solve(constant_source(g, 1.0), p, sp), InvalidArgument);
}

TEST_CASE("trace integrals on the flat disk against a one-dimensional oracle") {
  const DomainSpec d = domain(32);
  auto g = make_grid(d);
  const SpeedField sp(g, SpeedModel::constant());
  for (double eta : {-1.25, -0.5}) {
    const auto rows = trace_counterexample(eta, 2, sp, 8);
    for (const TraceRow& r : rows) {
      // tau = 2 sin u, |mu| = sin u; two glancing sides, boundary length 2 pi.
      const double u0 = std::asin(r.margin);
      auto F = [&](double p) {
        return [=](double logu) {
          const double u = std::exp(logu);
          return u * std::pow(2 * std::sin(u), p) * std::sin(u);
        };
      };
      const double tr = 2 * 2 * M_PI * simpson(F(2 * eta), std::log(u0), std::log(M_PI / 2), 1e-12);
      const double wi = 2 * 2 * M_PI * simpson(F(2 * eta + 1), std::log(u0), std::log(M_PI / 2), 1e-12);
      CHECK(r.trace_integral == doctest::Approx(tr).epsilon(1e-6));
      CHECK(r.w_integral == doctest::Approx(wi).epsilon(1e-6));
    }
  }
}

TEST_CASE("trace counterexample: divergence for eta = -1.25, convergence for eta = -0.5") {
  const DomainSpec d = domain(32);
  auto g = make_grid(d);
  const SpeedField sp(g, SpeedModel::constant());
  const auto bad = trace_counterexample(-1.25, 5, sp, 8);
  CHECK(bad.back().trace_integral / bad.front().trace_integral >= 10);
  CHECK(std::abs(bad.back().w_integral / bad.front().w_integral - 1) <= 0.05);
  const auto good = trace_counterexample(-0.5, 5, sp, 8);
  CHECK(std::abs(good.back().trace_integral / good.front().trace_integral - 1) <= 0.05);
  CHECK(std::abs(good.back().w_integral / good.front().w_integral - 1) <= 0.05);
}
