#include <cmath>
#include <random>

#include "doctest.h"
#include "rts/errors.hpp"
#include "rts/profiles.hpp"
#include "rts/reconstruction.hpp"

using namespace rts;

namespace {

struct Setup {
  DomainSpec domain;
  SpeedField speed;
  Setup(int n, SpeedModel m) : domain(spec(n)), speed(make_grid(domain), m) {}
  static DomainSpec spec(int n) {
    DomainSpec d;
    d.grid_n = n;
    d.boundary_n = 2 * n;
    d.dir_n = n;
    return d;
  }
  const Grid& grid() const { return speed.grid(); }
  const GridPtr& ptr() const { return speed.grid_ptr(); }
};

// Relative L2(M, dA_g) error, optionally after removing the g-means.
double rel_err(const SpeedField& sp, const ComplexGrid& got, const ComplexGrid& want, bool demean = false) {
  const Grid& g = sp.grid();
  cplx mg = 0, mw = 0;
  double area = 0;
  for (int node : g.mask_nodes()) {
    const double w = g.area_weight(node) * sp.area_density()[node];
    mg += w * got[node];
    mw += w * want[node];
    area += w;
  }
  if (!demean) mg = mw = 0;
  else {
    mg /= area;
    mw /= area;
  }
  double e = 0, t = 0;
  for (int node : g.mask_nodes()) {
    const double w = g.area_weight(node) * sp.area_density()[node];
    e += w * std::norm(got[node] - mg - want[node] + mw);
    t += w * std::norm(want[node] - mw);
  }
  return std::sqrt(e / t);
}

double grid_norm(const SpeedField& sp, const ComplexGrid& f) {
  const Grid& g = sp.grid();
  double t = 0;
  for (int node : g.mask_nodes()) t += g.area_weight(node) * sp.area_density()[node] * std::norm(f[node]);
  return std::sqrt(t);
}

ComplexGrid masked(const Grid& g, ComplexGrid f) {
  clear_outside(g, f);
  return f;
}

OpticalParams kernel2(const Grid& g, double a = 0.6) { return OpticalParams::constant(g, a, {0.2, 0.08, 0.04}, 0.1); }

// f0 + X_perp f_perp with smooth f0 and a f_perp that does not vanish on the circle.
struct Case1Source {
  FiberField f;
  ComplexGrid f0, fperp;
};

Case1Source case1_source(const Setup& s, double fperp_shift = 0.0) {
  const Grid& g = s.grid();
  Case1Source out;
  out.f0 = masked(g, gaussian_sum(g, {{0.2, -0.1, 0.45, 1.0}, {-0.3, 0.25, 0.35, 0.5}}));
  out.fperp = masked(g, gaussian_sum(g, {{-0.1, 0.2, 0.5, 0.8}}));
  for (int node : g.mask_nodes()) out.fperp[node] += fperp_shift;
  out.f = FiberField(s.ptr(), 1, true);
  out.f.mode(0) = out.f0;
  FiberField q(s.ptr(), 0, true);
  q.mode(0) = out.fperp;
  out.f += apply_X_perp(q, s.speed);
  return out;
}

FiberField vector_source(const Setup& s) {
  const Grid& g = s.grid();
  FiberField f1(s.ptr(), 1, true);
  f1.mode(1) = masked(g, gaussian_sum(g, {{0.1, 0.2, 0.5, cplx(0.7, 0.3)}}));
  for (std::size_t k = 0; k < g.size(); ++k) f1.mode(-1)[k] = std::conj(f1.mode(1)[k]);
  return f1;
}

// Representative of degree m: zero-boundary h0 / h_perp and h_k = c^k (a + b z).
GaugeRepresentative smooth_representative(const Setup& s, int m, std::mt19937_64& rng) {
  const Grid& g = s.grid();
  GaugeRepresentative h = GaugeRepresentative::zero(s.ptr(), m, true);
  h.h0 = random_smooth(g, rng, true, false);
  h.h_perp = random_smooth(g, rng, true, true);
  std::normal_distribution<double> nd(0.0, 0.3);
  for (int k = 1; k <= m; ++k) {
    const cplx a(nd(rng), nd(rng)), b(nd(rng), nd(rng));
    for (int node : g.mask_nodes()) {
      const cplx v = std::pow(s.speed.c()[node], k) * (a + b * cplx(g.node_x(node), g.node_y(node)));
      h.h_k[k - 1].mode(k)[node] = v;
      h.h_k[k - 1].mode(-k)[node] = std::conj(v);
    }
  }
  return h;
}

}  // namespace

TEST_CASE("harness: degenerate gauges and two-path consistency") {
  const Setup s(40, SpeedModel::gaussian(0.1));
  const OpticalParams P = kernel2(s.grid());
  std::mt19937_64 rng(4);
  TransportOptions opt;
  opt.max_degree = 10;

  const FiberField p = random_fiber_field(s.ptr(), 1, rng, true, true);
  const GaugeRepresentative h = smooth_representative(s, 2, rng);
  const HarnessResult H = synthetic_gauge_harness(p, h, P, s.speed, s.domain, opt);
  // Independent path: forward-solve the returned source and measure it.
  const BoundaryFan M = measure(H.f, P, s.speed, s.domain, opt);
  double diff = 0;
  for (std::size_t i = 0; i < M.size(); ++i) diff += std::norm(M.values[i] - H.data.values[i]) * M.entries[i].weight;
  CHECK(std::sqrt(diff) <= 1e-6 * H.data.l2_norm());

  // p = 0: data = I_a[h].
  const HarnessResult H0 = synthetic_gauge_harness(FiberField(s.ptr(), 1, true), h, P, s.speed, s.domain, opt);
  const BoundaryFan Ih = attenuated_ray_transform(h.synthesize(s.speed, true), P.a, s.speed, s.domain);
  double d0 = 0;
  for (std::size_t i = 0; i < Ih.size(); ++i) d0 += std::norm(Ih.values[i] - H0.data.values[i]) * Ih.entries[i].weight;
  CHECK(std::sqrt(d0) <= 1e-12 * Ih.l2_norm());

  // h = 0: pure gauge, the data nearly vanishes.
  const HarnessResult Hp = synthetic_gauge_harness(p, GaugeRepresentative::zero(s.ptr(), 2), P, s.speed, s.domain, opt);
  const FiberField F = apply_X_modes(p, s.speed, Flavor::ZeroBoundary) + multiply(P.a, p);
  CHECK(Hp.data.l2_norm() < 2e-3 * l2_norm(F, s.speed));
}

TEST_CASE("gauge split reproduces its input and lands in the representative classes") {
  const Setup s(48, SpeedModel::gaussian(0.2));
  std::mt19937_64 rng(9);
  const OpticalParams P = kernel2(s.grid());
  const FiberField F = random_fiber_field(s.ptr(), 2, rng, true);
  const GaugeSplit sp = gauge_split(F, P.a, s.speed, 2);
  const FiberField back = apply_X_modes(sp.p, s.speed, Flavor::ZeroBoundary) + multiply(P.a, sp.p) +
                          sp.h.synthesize(s.speed, true);
  CHECK(l2_norm(back.with_degree(2) - F, s.speed) < 1e-12 * l2_norm(F, s.speed));
  CHECK(sp.p.degree() == 1);
  CHECK(sp.h.degree() == 2);
  // h_2 is in the kernel of X_- up to discretisation.
  const ComplexGrid xm = apply_eta(-1, 2, sp.h.h_k[1].mode(2), s.speed);
  const ComplexGrid xf = apply_eta(-1, 2, F.mode(2), s.speed);
  CHECK(grid_norm(s.speed, xm) < 0.05 * grid_norm(s.speed, xf));
}

TEST_CASE("step 2: empty triangle, known p_1 and zero boundary values") {
  const Setup s(48, SpeedModel::gaussian(0.1));
  const OpticalParams P = kernel2(s.grid());
  std::mt19937_64 rng(21);

  const GaugeRepresentative h1 = smooth_representative(s, 1, rng);
  const PipelineState e = step2_triangular(h1, P, s.speed, 1);
  CHECK(e.dbar_residuals.empty());
  CHECK(e.p.degree() == 0);

  // Known p_1 from the gauge split of a degree-1 source (the triangle assumes f_k = 0 for k >= 2).
  const SourceFixture fx = make_fixture(case1_source(s).f, P, s.speed, s.domain);
  const FiberField& p = fx.split.p;
  const PipelineState st = step2_triangular(fx.split.h, P, s.speed, 2);
  CHECK(st.dbar_residuals.size() == 2);
  CHECK(rel_err(s.speed, st.p.mode(1), p.mode(1)) <= 1e-2);
  CHECK(rel_err(s.speed, st.p.mode(-1), p.mode(-1)) <= 1e-2);

  // Boundary values of the recovered p_1, by extension and interpolation onto the circle.
  const Grid& g = s.grid();
  const ComplexGrid ext = extend(g, st.p.mode(1));
  double peak = 0, edge = 0;
  for (int node : g.mask_nodes()) peak = std::max(peak, std::abs(st.p.mode(1)[node]));
  for (int j = 0; j < 64; ++j) {
    const double phi = 2 * M_PI * j / 64;
    edge = std::max(edge, std::abs(interpolate(g, ext, std::cos(phi), std::sin(phi))));
  }
  CHECK(edge <= 1e-2 * peak);

  // A representative that is not in the range of the triangle is rejected.
  GaugeRepresentative bad = fx.split.h;
  bad.h_k[1].mode(2) = random_smooth(g, rng, false, false, 6);
  for (std::size_t k = 0; k < g.size(); ++k) bad.h_k[1].mode(-2)[k] = std::conj(bad.h_k[1].mode(2)[k]);
  Step2Options strict;
  strict.consistency_tol = 1e-3;
  CHECK_THROWS_AS(step2_triangular(bad, P, s.speed, 2, strict), ConsistencyFailure);
}

TEST_CASE("case 1 with oracle step 1: recovery, refinement and constant gauge") {
  double prev0 = 0, prevp = 0;
  for (int n : {32, 64}) {
    const Setup s(n, SpeedModel::gaussian(0.1));
    const OpticalParams P = kernel2(s.grid());
    const Case1Source src = case1_source(s);
    const SourceFixture fx = make_fixture(src.f, P, s.speed, s.domain);
    PipelineState st = step2_triangular(fx.split.h, P, s.speed, 2);
    const Case1Result r = case1_finish(st, fx.split.h, P, s.speed);
    const double e0 = rel_err(s.speed, r.f0, src.f0), ep = rel_err(s.speed, r.f_perp, src.fperp, true);
    MESSAGE("case 1 n=" << n << " f0 " << e0 << " fperp " << ep);
    CHECK(e0 <= 2e-2);
    CHECK(ep <= 5e-2);
    CHECK(r.neumann.compatible);
    if (prev0 > 0) {
      CHECK(e0 < 0.5 * prev0);
      CHECK(ep < 0.5 * prevp);
    }
    prev0 = e0;
    prevp = ep;

    if (n == 32) {
      // X_perp annihilates constants: same data, same recovery.
      const Case1Source shifted = case1_source(s, 0.7);
      const SourceFixture fs = make_fixture(shifted.f, P, s.speed, s.domain);
      double dd = 0;
      for (std::size_t i = 0; i < fs.data.size(); ++i) dd = std::max(dd, std::abs(fs.data.values[i] - fx.data.values[i]));
      CHECK(dd <= 1e-12 * fx.data.l2_norm());
      PipelineState st2 = step2_triangular(fs.split.h, P, s.speed, 2);
      const Case1Result r2 = case1_finish(st2, fs.split.h, P, s.speed);
      CHECK(rel_err(s.speed, r2.f0, r.f0) < 1e-10);
      CHECK(rel_err(s.speed, r2.f_perp, r.f_perp) < 1e-10);
    }
  }
}

TEST_CASE("case 1: pure f0 source and zero source") {
  const Setup s(40, SpeedModel::gaussian(0.1));
  const OpticalParams P = kernel2(s.grid());
  const Case1Source src = case1_source(s);
  FiberField f(s.ptr(), 1, true);
  f.mode(0) = src.f0;
  const SourceFixture fx = make_fixture(f, P, s.speed, s.domain);
  PipelineState st = step2_triangular(fx.split.h, P, s.speed, 2);
  const Case1Result r = case1_finish(st, fx.split.h, P, s.speed);
  CHECK(rel_err(s.speed, r.f0, src.f0) <= 2e-2);
  CHECK(grid_norm(s.speed, r.f_perp) <= 1e-2 * grid_norm(s.speed, src.f0));

  const SourceFixture z = make_fixture(FiberField(s.ptr(), 1, true), P, s.speed, s.domain);
  PipelineState sz = step2_triangular(z.split.h, P, s.speed, 2);
  const Case1Result rz = case1_finish(sz, z.split.h, P, s.speed);
  CHECK(grid_norm(s.speed, rz.f0) == 0.0);
  CHECK(grid_norm(s.speed, rz.f_perp) == 0.0);
}

TEST_CASE("case 2 with oracle step 1: recovery, zero source and sigma_a rescaling") {
  const Setup s(48, SpeedModel::gaussian(0.1));
  const FiberField f1 = vector_source(s);
  FiberField prev;
  for (double a : {0.6, 0.9}) {
    const OpticalParams P = kernel2(s.grid(), a);
    const SourceFixture fx = make_fixture(f1, P, s.speed, s.domain);
    PipelineState st = step2_triangular(fx.split.h, P, s.speed, 2);
    const FiberField r = case2_finish(st, fx.split.h, P, s.speed);
    const double e = rel_err(s.speed, r.mode(1), f1.mode(1));
    MESSAGE("case 2 a=" << a << " f1 " << e);
    CHECK(e <= 2e-2);
    if (prev.degree() > 0) CHECK(rel_err(s.speed, r.mode(1), prev.mode(1)) <= 2e-2);
    prev = r;
  }
  const OpticalParams P = kernel2(s.grid());
  const SourceFixture z = make_fixture(FiberField(s.ptr(), 1, true), P, s.speed, s.domain);
  PipelineState sz = step2_triangular(z.split.h, P, s.speed, 2);
  CHECK(l2_norm(case2_finish(sz, z.split.h, P, s.speed), s.speed) == 0.0);
}

TEST_CASE("lsq step 1: harness roundtrip, zero data and input validation") {
  const Setup s(48, SpeedModel::constant());
  const OpticalParams P = OpticalParams::constant(s.grid(), 0.4, {0.1}, 0.1);
  std::mt19937_64 rng(33);
  const GaugeRepresentative h = smooth_representative(s, 1, rng);
  const HarnessResult H = synthetic_gauge_harness(FiberField(s.ptr(), 0, true), h, P, s.speed, s.domain);

  RecoverOptions o;
  o.backend = Backend::Lsq;
  o.degree = 1;
  RecoverReport rep;
  const GaugeRepresentative got = recover_representative(H.data, P, s.speed, o, &rep);
  const FiberField want = h.synthesize(s.speed, true);
  const double e = l2_norm(got.synthesize(s.speed, true) - want, s.speed) / l2_norm(want, s.speed);
  MESSAGE("lsq representative error " << e << " condition " << rep.condition);
  CHECK(e <= 5e-2);
  CHECK(rep.residual < 1e-2);
  CHECK(rep.unknowns > 0);

  BoundaryFan zero = H.data;
  for (auto& v : zero.values) v = 0;
  const GaugeRepresentative z = recover_representative(zero, P, s.speed, o);
  CHECK(l2_norm(z.synthesize(s.speed, true), s.speed) == 0.0);

  BoundaryFan cplx_data = H.data;
  cplx_data.values[3] += cplx(0, 1);
  CHECK_THROWS_AS(recover_representative(cplx_data, P, s.speed, o), InvalidArgument);
  RecoverOptions capped = o;
  capped.condition_cap = 10.0;
  CHECK_THROWS_AS(recover_representative(H.data, P, s.speed, capped), IllConditioned);
  RecoverOptions oracle;
  CHECK_THROWS_AS(recover_representative(H.data, P, s.speed, oracle), InvalidArgument);
  oracle.truth = &h;
  CHECK(rel_err(s.speed, recover_representative(H.data, P, s.speed, oracle).h0, h.h0) == 0.0);
}

TEST_CASE("lsq step 1 feeds the case 1 and case 2 finishers") {
  const Setup s(48, SpeedModel::gaussian(0.1));
  const OpticalParams P = kernel2(s.grid());
  RecoverOptions o;
  o.backend = Backend::Lsq;

  const Case1Source src = case1_source(s);
  const SourceFixture fx = make_fixture(src.f, P, s.speed, s.domain);
  const GaugeRepresentative h = recover_representative(fx.data, P, s.speed, o);
  PipelineState st = step2_triangular(h, P, s.speed, 2);
  const Case1Result r = case1_finish(st, h, P, s.speed);
  CHECK(rel_err(s.speed, r.f0, src.f0) <= 5e-2);
  CHECK(rel_err(s.speed, r.f_perp, src.fperp, true) <= 5e-2);

  const FiberField f1 = vector_source(s);
  const SourceFixture fx2 = make_fixture(f1, P, s.speed, s.domain);
  const GaugeRepresentative h2 = recover_representative(fx2.data, P, s.speed, o);
  PipelineState st2 = step2_triangular(h2, P, s.speed, 2);
  CHECK(rel_err(s.speed, case2_finish(st2, h2, P, s.speed).mode(1), f1.mode(1)) <= 5e-2);
}

TEST_CASE("isotropic case 1: oracle and lsq roundtrips, no scattering, zero source") {
  const Setup s(48, SpeedModel::gaussian(0.1));
  const Case1Source src = case1_source(s);
  for (double k0 : {0.0, 0.3}) {
    const OpticalParams P = OpticalParams::constant(s.grid(), 0.6, {k0}, 0.1);
    const SourceFixture fx = make_fixture(src.f, P, s.speed, s.domain);
    RecoverOptions oracle;
    oracle.truth = &fx.split.h;
    const Case1Result ro = isotropic_case1(fx.data, P, s.speed, oracle);
    CHECK(rel_err(s.speed, ro.f0, src.f0) <= 5e-2);
    CHECK(rel_err(s.speed, ro.f_perp, src.fperp, true) <= 5e-2);
    RecoverOptions lsq;
    lsq.backend = Backend::Lsq;
    const Case1Result rl = isotropic_case1(fx.data, P, s.speed, lsq);
    MESSAGE("iso1 k0=" << k0 << " oracle " << rel_err(s.speed, ro.f0, src.f0) << " lsq "
                       << rel_err(s.speed, rl.f0, src.f0) << " / " << rel_err(s.speed, rl.f_perp, src.fperp, true));
    CHECK(rel_err(s.speed, rl.f0, src.f0) <= 5e-2);
    CHECK(rel_err(s.speed, rl.f_perp, src.fperp, true) <= 5e-2);
  }
  const OpticalParams P = OpticalParams::constant(s.grid(), 0.6, {0.3}, 0.1);
  const SourceFixture z = make_fixture(FiberField(s.ptr(), 1, true), P, s.speed, s.domain);
  RecoverOptions lsq;
  lsq.backend = Backend::Lsq;
  const Case1Result rz = isotropic_case1(z.data, P, s.speed, lsq);
  CHECK(grid_norm(s.speed, rz.f0) == 0.0);
  CHECK(grid_norm(s.speed, rz.f_perp) == 0.0);
  CHECK_THROWS_AS(isotropic_case1(z.data, kernel2(s.grid()), s.speed, lsq), InvalidArgument);
}

TEST_CASE("isotropic case 2: elimination identity and roundtrips") {
  // Dyadic values keep every product exact, so the identity must hold bit for bit.
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> q(-64, 64);
  for (int t = 0; t < 200; ++t) {
    const cplx f0(q(rng) / 16.0, q(rng) / 16.0), u0(q(rng) / 16.0, q(rng) / 16.0);
    const double k0 = (q(rng) + 65) / 256.0, a = k0 + (q(rng) + 65) / 128.0;
    const cplx lhs = (k0 * u0 - a * f0) - k0 * (u0 - f0);
    CHECK(lhs == (k0 - a) * f0);
    CHECK(iso2_eliminate(k0 * u0 - a * f0, u0 - f0, k0, a) == f0);
  }

  const Setup s(48, SpeedModel::gaussian(0.1));
  const OpticalParams P = OpticalParams::constant(s.grid(), 0.6, {0.3}, 0.1);
  const FiberField f1 = vector_source(s);
  const SourceFixture fx = make_fixture(f1, P, s.speed, s.domain, {}, 1);
  RecoverOptions oracle;
  oracle.truth = &fx.split.h;
  const Iso2Result ro = isotropic_case2(fx.data, P, s.speed, oracle);
  RecoverOptions lsq;
  lsq.backend = Backend::Lsq;
  const Iso2Result rl = isotropic_case2(fx.data, P, s.speed, lsq);
  const double eo = rel_err(s.speed, ro.f1.mode(1), f1.mode(1)), el = rel_err(s.speed, rl.f1.mode(1), f1.mode(1));
  MESSAGE("iso2 oracle " << eo << " lsq " << el);
  CHECK(eo <= 5e-2);
  CHECK(el <= 5e-2);
  // The oracle's f0~ is the Hodge potential of the source.
  CHECK(rel_err(s.speed, ro.f0_tilde, fx.split.p.mode(0)) <= 5e-2);

  const SourceFixture z = make_fixture(FiberField(s.ptr(), 1, true), P, s.speed, s.domain, {}, 1);
  CHECK(l2_norm(isotropic_case2(z.data, P, s.speed, lsq).f1, s.speed) == 0.0);
}

TEST_CASE("gauge generation and verification") {
  const Setup s(64, SpeedModel::gaussian(0.1));
  const Grid& g = s.grid();
  std::mt19937_64 rng(8);

  const OpticalParams iso = OpticalParams::constant(g, 0.6, {0.25}, 0.1);
  CHECK(l2_norm(gauge_generate(FiberField(s.ptr(), 0, true), iso, s.speed), s.speed) == 0.0);
  // p of degree 0 with an isotropic kernel: f = (X + sigma_a) p.
  const FiberField p0 = random_fiber_field(s.ptr(), 0, rng, true, true);
  const FiberField want = apply_X_modes(p0, s.speed, Flavor::ZeroBoundary) + multiply(iso.sigma_a(g), p0);
  CHECK(l2_norm(gauge_generate(p0, iso, s.speed) - want, s.speed) < 1e-12 * l2_norm(want, s.speed));

  const std::vector<std::vector<cplx>> kernels = {{0.2}, {0.2, 0.06, 0.03}, {0.2, 0.06, 0.03, 0.015}};
  for (int t = 0; t < 3; ++t) {
    const OpticalParams P = OpticalParams::constant(g, 0.6, kernels[t], 0.1);
    const FiberField p = random_fiber_field(s.ptr(), t, rng, true, true);
    const FiberField f = gauge_generate(p, P, s.speed);
    CHECK(f.numerical_degree(1e-12) <= std::max(p.degree() + 1, P.m_k()));
    const double ratio = gauge_verify(f, P, s.speed, s.domain);
    MESSAGE("gauge ratio m_k=" << P.m_k() << " deg p=" << t << ": " << ratio);
    CHECK(ratio <= 1e-3);
  }
  // Injective case: a nonzero isotropic source is seen.
  FiberField f0(s.ptr(), 0, true);
  f0.mode(0) = masked(g, gaussian_sum(g, {{0.1, 0.0, 0.4, 1.0}}));
  CHECK(gauge_verify(f0, iso, s.speed, s.domain) > 0.1);
  CHECK(gauge_verify(FiberField(s.ptr(), 1, true), iso, s.speed, s.domain) == 0.0);
}

TEST_CASE("degree descent probe") {
  const Setup s(40, SpeedModel::gaussian(0.1));
  const Grid& g = s.grid();
  const OpticalParams k3 = OpticalParams::constant(g, 0.6, {0.2, 0.06, 0.03, 0.015}, 0.1);
  const OpticalParams k0 = OpticalParams::constant(g, 0.6, {0.0}, 0.1);

  const DescentReport inj = degree_descent_probe(k3, s.speed, s.domain, 0);
  CHECK(inj.injective);
  CHECK(inj.stages.empty());

  for (int m : {1, 2}) {
    const DescentReport r = degree_descent_probe(k3, s.speed, s.domain, m);
    REQUIRE(!r.stages.empty());
    CHECK(r.stages.size() == static_cast<std::size_t>(3 - m + 1));
    for (std::size_t i = 1; i < r.stages.size(); ++i) {
      CHECK(r.stages[i].numerical_degree <= r.stages[i - 1].numerical_degree);
      CHECK(r.stages[i].bound < r.stages[i - 1].bound);
    }
    CHECK(r.stages.back().bound == m - 1);
    CHECK(r.stages.back().numerical_degree <= m - 1);
    for (const auto& st : r.stages) CHECK(st.boundary_norm < 2e-3);
  }
  // No scattering: one stage, already at degree m - 1.
  const DescentReport r0 = degree_descent_probe(k0, s.speed, s.domain, 2);
  REQUIRE(r0.stages.size() == 1);
  CHECK(r0.stages[0].numerical_degree <= 1);
}
