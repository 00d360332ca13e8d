#include <cmath>
#include <random>

#include "doctest.h"
#include "rts/elliptic.hpp"
#include "rts/profiles.hpp"

using namespace rts;

namespace {

SpeedField speed(int n, SpeedModel m = SpeedModel::constant()) {
  DomainSpec d;
  d.grid_n = n;
  return SpeedField(make_grid(d), m);
}

double max_err(const Grid& g, const ComplexGrid& a, const std::function<cplx(double, double)>& f) {
  double e = 0;
  for (int node : g.mask_nodes()) e = std::max(e, std::abs(a[node] - f(g.node_x(node), g.node_y(node))));
  return e;
}

ComplexGrid sample(const Grid& g, const std::function<cplx(double, double)>& f) {
  ComplexGrid out(g.size(), cplx(0));
  for (int node : g.mask_nodes()) out[node] = f(g.node_x(node), g.node_y(node));
  return out;
}

// p* = (1 - r^2) e^{x} cos(y) + i (1 - r^2) y and its flat Laplacian.
cplx pstar(double x, double y) { return (1 - x * x - y * y) * cplx(std::exp(x) * std::cos(y), y); }
cplx lap_pstar(double x, double y) {
  const double e = std::exp(x) * std::cos(y), ex = e, ey = -std::exp(x) * std::sin(y);
  // lap((1-r^2) e) = -4 e + 2 grad(1-r^2).grad e + (1-r^2) lap e, lap e = 0
  const double re = -4 * e + 2 * (-2 * x * ex - 2 * y * ey);
  const double im = -4 * y + 2 * (-2 * y);
  return {re, im};
}

}  // namespace

TEST_CASE("Dirichlet: rhs = 4 on the flat disk gives |z|^2 - 1") {
  const SpeedField sp = speed(41);
  const ComplexGrid p = solve_poisson_dirichlet(ComplexGrid(sp.grid().size(), 4.0), sp);
  CHECK(max_err(sp.grid(), p, [](double x, double y) { return cplx(x * x + y * y - 1); }) < 1e-10);
  const ComplexGrid z = solve_poisson_dirichlet(ComplexGrid(sp.grid().size(), 0.0), sp);
  CHECK(max_err(sp.grid(), z, [](double, double) { return cplx(0); }) == 0.0);
}

TEST_CASE("Dirichlet: manufactured solution converges at second order with a gaussian speed") {
  const SpeedModel m = SpeedModel::gaussian(0.4);
  double prev = 0;
  for (int n : {33, 65, 129}) {
    const SpeedField sp = speed(n, m);
    const Grid& g = sp.grid();
    ComplexGrid rhs = sample(g, [&](double x, double y) {
      const double c = m.eval(x, y).c;
      return c * c * lap_pstar(x, y);
    });
    const double err = max_err(g, solve_poisson_dirichlet(rhs, sp), pstar);
    if (prev > 0) CHECK(err < 0.35 * prev);
    prev = err;
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("Dirichlet: discrete maximum principle") {
  const SpeedField sp = speed(40, SpeedModel::bump(0.3, 0.5));
  std::mt19937_64 rng(4);
  ComplexGrid rhs = random_smooth(sp.grid(), rng, true);
  for (auto& v : rhs) v = -std::abs(v.real());
  const ComplexGrid p = solve_poisson_dirichlet(rhs, sp);
  for (int node : sp.grid().mask_nodes()) CHECK(p[node].real() >= -1e-14);
}

TEST_CASE("Neumann: manufactured solution up to the mean, second order") {
  const SpeedModel m = SpeedModel::bump(0.2, 0.6);
  auto F = [](double x, double y) { return cplx(std::sin(x) * std::exp(0.5 * y), x * y); };
  auto lapF = [](double x, double y) { return cplx(-0.75 * std::sin(x) * std::exp(0.5 * y), 0.0); };
  auto drF = [](double x, double y) {
    const double fx = std::cos(x) * std::exp(0.5 * y), fy = 0.5 * std::sin(x) * std::exp(0.5 * y);
    const double r = std::hypot(x, y);
    return cplx((x * fx + y * fy) / r, (x * y + y * x) / r);
  };
  double prev = 0;
  for (int n : {33, 65, 129}) {
    const SpeedField sp = speed(n, m);
    const Grid& g = sp.grid();
    const ComplexGrid rhs = sample(g, [&](double x, double y) { return std::pow(m.eval(x, y).c, 2) * lapF(x, y); });
    auto data = [&](double phi) {
      const double x = std::cos(phi), y = std::sin(phi);
      return m.eval(x, y).c * drF(x, y);
    };
    const NeumannResult r = solve_poisson_neumann(rhs, data, sp);
    CHECK(r.compatible);
    // Compare after removing the g-mean of the exact solution.
    ComplexGrid ex = sample(g, F);
    cplx mean = 0;
    double area = 0;
    for (int node : g.mask_nodes()) {
      mean += ex[node] * g.area_weight(node) * sp.area_density()[node];
      area += g.area_weight(node) * sp.area_density()[node];
    }
    mean /= area;
    double err = 0;
    for (int node : g.mask_nodes()) err = std::max(err, std::abs(r.u[node] - (ex[node] - mean)));
    if (prev > 0) CHECK(err < 0.4 * prev);
    prev = err;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("Neumann: zero data gives zero; incompatible data is flagged") {
  const SpeedField sp = speed(33);
  const Grid& g = sp.grid();
  const NeumannResult z = solve_poisson_neumann(ComplexGrid(g.size(), 0.0), [](double) { return cplx(0); }, sp);
  CHECK(max_err(g, z.u, [](double, double) { return cplx(0); }) < 1e-14);
  const NeumannResult bad = solve_poisson_neumann(ComplexGrid(g.size(), 1.0), [](double) { return cplx(0); }, sp);
  CHECK_FALSE(bad.compatible);
  CHECK(bad.multiplier > 0.1);
}

TEST_CASE("dbar examples on the flat disk") {
  const SpeedField sp = speed(65);
  const Grid& g = sp.grid();
  const DbarResult a = solve_dbar_dirichlet(0, sample(g, [](double x, double y) { return cplx(x, -y); }), sp, +1);
  CHECK(max_err(g, a.p, [](double x, double y) { return cplx(x * x + y * y - 1); }) < 1e-10);
  CHECK(a.residual < 1e-3);
  const DbarResult b = solve_dbar_dirichlet(0, sample(g, [](double x, double y) { return 2.0 * cplx(x, y); }), sp, +1);
  CHECK(max_err(g, b.p, [](double, double) { return cplx(0); }) < 1e-10);
  CHECK(b.residual == doctest::Approx(1.0).epsilon(1e-6));
  const DbarResult z = solve_dbar_dirichlet(2, ComplexGrid(g.size(), 0.0), sp, -1);
  CHECK(z.residual == 0.0);
}

TEST_CASE("dbar consistency on eta-generated data, both signs, second order") {
  const SpeedModel m = SpeedModel::gaussian(0.3);
  for (int sign : {+1, -1})
    for (int k : {1, 2}) {
      double prev = 0;
      for (int n : {64, 127}) {
        const SpeedField sp = speed(n, m);
        const Grid& g = sp.grid();
        const ComplexGrid p = sample(g, pstar);
        const ComplexGrid h = apply_eta(sign, sign * k, p, sp, Flavor::ZeroBoundary);
        const DbarResult r = solve_dbar_dirichlet(k, h, sp, sign);
        if (n == 64) CHECK(r.residual <= 5e-3);
        double e = 0, s = 0;
        for (int node : g.mask_nodes()) {
          e = std::max(e, std::abs(r.p[node] - p[node]));
          s = std::max(s, std::abs(p[node]));
        }
        if (prev > 0) CHECK(e / s < 0.35 * prev);
        prev = e / s;
      }
    }
}

TEST_CASE("Hodge decomposition recovers gradient and co-gradient parts") {
  auto F0 = [](double x, double y) { return (1 - x * x - y * y) * std::cos(x - y); };
  auto FP = [](double x, double y) { return (1 - x * x - y * y) * (x + 0.3); };
  double prev = 0;
  for (int n : {64, 128}) {
    const SpeedField s = speed(n, SpeedModel::bump(0.2, 0.5));
    const GridPtr& g = s.grid_ptr();
    FiberField f0(g, 0, true), fp(g, 0, true);
    f0.mode(0) = sample(*g, [&](double x, double y) { return cplx(F0(x, y)); });
    fp.mode(0) = sample(*g, [&](double x, double y) { return cplx(FP(x, y)); });
    const FiberField f1 = apply_X_modes(f0, s, Flavor::ZeroBoundary) + apply_X_perp_modes(fp, s, Flavor::ZeroBoundary);
    const HodgeResult h = hodge_decompose(f1.with_degree(1), s);
    const double e = std::max(max_err(*g, h.f0, F0), max_err(*g, h.fperp, FP));
    CHECK(e < 5e-3);
    CHECK(l2_norm(h.omega, s) < 1e-2 * l2_norm(f1, s));
    if (prev > 0) CHECK(e < 0.35 * prev);
    prev = e;
  }
  const SpeedField sp = speed(64, SpeedModel::bump(0.2, 0.5));
  const GridPtr& g = sp.grid_ptr();

  std::mt19937_64 rng(8);
  for (int t = 0; t < 3; ++t) {
    const FiberField r = random_fiber_field(g, 1, rng, true).band(1, 1);
    const HodgeResult hr = hodge_decompose(r, sp);
    CHECK(hr.recomposition <= 1e-3);
    for (int node : g->mask_nodes()) CHECK(std::abs(hr.f0[node].imag()) < 1e-10);
  }
  const HodgeResult zero = hodge_decompose(FiberField(g, 1, true), sp);
  CHECK(l2_norm(zero.omega, sp) == 0.0);
}

TEST_CASE("solenoidal projection: orthogonality, range recovery and kernel inputs") {
  const SpeedField sp = speed(64, SpeedModel::gaussian(0.3));
  const GridPtr& g = sp.grid_ptr();
  std::mt19937_64 rng(12);
  for (int k : {1, 2, 3}) {
    const FiberField u = random_fiber_field(g, k, rng, k != 2).band(k, k);
    const SolenoidalResult r = solenoidal_project(u, k, sp);
    CHECK(r.orthogonality <= 1e-6);
    CHECK(r.kernel_residual < 1.0);

    FiberField v = random_fiber_field(g, k - 1, rng, true, true).band(k - 1, k - 1);
    const FiberField Xv = apply_X_plus(v, sp, Flavor::ZeroBoundary).band(k, k);
    const SolenoidalResult rv = solenoidal_project(Xv, k, sp);
    CHECK(l2_norm(rv.g, sp) < 1e-2 * l2_norm(Xv, sp));
  }
  // Range recovery is limited by discretisation: second order under refinement.
  double prev = 0;
  for (int n : {64, 128}) {
    const SpeedField s = speed(n, SpeedModel::gaussian(0.3));
    std::mt19937_64 r2(5);
    const FiberField v = random_fiber_field(s.grid_ptr(), 1, r2, true, true).band(1, 1);
    const FiberField Xv = apply_X_plus(v, s, Flavor::ZeroBoundary).band(2, 2);
    const double e = l2_norm(solenoidal_project(Xv, 2, s).g, s) / l2_norm(Xv, s);
    if (prev > 0) CHECK(e < 0.35 * prev);
    prev = e;
  }
  // u_2 = c^2 z, u_-2 = c^2 zbar: X_- u = 0 already.
  FiberField u(g, 2, true);
  for (int node : g->mask_nodes()) {
    const double c = sp.c()[node];
    u.mode(2)[node] = c * c * cplx(g->node_x(node), g->node_y(node));
    u.mode(-2)[node] = std::conj(u.mode(2)[node]);
  }
  const SolenoidalResult r = solenoidal_project(u, 2, sp);
  FiberField Xv = u - r.g;
  CHECK(l2_norm(Xv, sp) < 5e-2 * l2_norm(u, sp));
}
