#include "rts/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "rts/errors.hpp"
#include "rts/io.hpp"
#include "rts/profiles.hpp"
#include "rts/reconstruction.hpp"

namespace rts {

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Record a named measurement against its bound.
  void le(const std::string& what, double value, double bound) {
    if (!(value <= bound)) pass = false;
    note(what, value, bound, "<=");
  }
  void ge(const std::string& what, double value, double bound) {
    if (!(value >= bound)) pass = false;
    note(what, value, bound, ">=");
  }
  void truth(const std::string& what, bool ok) {
    if (!ok) pass = false;
    sep();
    detail << what << (ok ? " ok" : " FAILED");
  }
  void note(const std::string& what, double value, double bound, const char* op) {
    sep();
    detail << what << " " << std::setprecision(3) << value << " (" << op << " " << bound << ")";
  }
  void sep() {
    if (detail.tellp() > 0) detail << "; ";
  }
};

DomainSpec domain(int n, int boundary_n, int dir_n, double radius = 1.0) {
  DomainSpec d;
  d.radius = radius;
  d.grid_n = n;
  d.boundary_n = boundary_n;
  d.dir_n = dir_n;
  return d;
}

FiberField constant_source(const GridPtr& g, double v) {
  FiberField f(g, 0, true);
  for (int node : g->mask_nodes()) f.mode(0)[node] = v;
  return f;
}

// Largest |.| over nodes with r < rmax, across all modes.
double interior_max(const FiberField& u, double rmax = 0.8) {
  const Grid& g = u.grid();
  double m = 0;
  for (int n = -u.degree(); n <= u.degree(); ++n)
    for (int node : g.mask_nodes())
      if (std::hypot(g.node_x(node), g.node_y(node)) < rmax) m = std::max(m, std::abs(u.mode(n)[node]));
  return m;
}

FiberField smooth_field(const GridPtr& g, int degree) {
  FiberField u(g, degree);
  for (int n = -degree; n <= degree; ++n)
    for (int node : g->mask_nodes()) {
      const double x = g->node_x(node), y = g->node_y(node);
      u.mode(n)[node] = cplx(std::sin(1.3 * x + n) * std::exp(0.4 * y), std::cos(0.7 * y - n * x));
    }
  return u;
}

// Random admissible, subcritical parameters with a kernel of degree m_k and a variable a.
OpticalParams random_params(const Grid& g, std::mt19937_64& rng, int m_k) {
  std::uniform_real_distribution<double> U(0, 1);
  const double k0 = 0.2 + U(rng);
  std::vector<cplx> k{k0};
  double budget = k0 * 0.999;
  for (int n = 1; n <= m_k; ++n) {
    const double r = budget / 2 * U(rng) / (m_k + 1 - n);
    budget -= 2 * r;
    k.push_back(std::polar(r, 2 * M_PI * U(rng)));
  }
  OpticalParams p = OpticalParams::constant(g, k0 + 0.1 + U(rng), k, 0.1);
  for (int node : g.mask_nodes()) p.a[node] += 0.3 * U(rng) * (1 + g.node_x(node));
  return p;
}

// ---- criteria ------------------------------------------------------------------

void santalo(Outcome& o, Profile) {
  const DomainSpec d = domain(128, 256, 128);
  const SpeedField sp(make_grid(d), SpeedModel::constant());
  const auto t0 = std::chrono::steady_clock::now();
  const double v = santalo_integrate([](const PhasePoint&) { return 1.0; }, sp, d);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.le("|I / 2 pi^2 - 1|", std::abs(v / (2 * M_PI * M_PI) - 1), 5e-3);
  o.le("seconds", secs, 30);
}

void exit_times(Outcome& o, Profile) {
  const SpeedField sp(make_grid(domain(64, 128, 64)), SpeedModel::constant());
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> S(0, 2 * M_PI), B(-M_PI / 2 + 1e-3, M_PI / 2 - 1e-3);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const double s = S(rng), beta = B(rng);
    const PhasePoint p = boundary_point(s, s + M_PI + beta, 1.0);  // beta from the inner normal
    worst = std::max(worst, std::abs(exit_time(p, sp).forward - 2 * std::cos(beta)));
  }
  o.le("max |tau - 2 cos beta| over 1000 entries", worst, 1e-6);
}

void convexity(Outcome& o, Profile) {
  DomainSpec d;
  const SpeedField sp(make_grid(d), SpeedModel::constant());
  const double c0 = convexity_constant(sp, d);
  o.ge("C0(R=1)", c0, 1.98);
  o.le("C0(R=1)", c0, 2.02);
  d.radius = 2.5;
  const SpeedField sp2(make_grid(d), SpeedModel::constant());
  o.le("|C0(R=2.5) / 5 - 1|", std::abs(convexity_constant(sp2, d) / 5.0 - 1), 1e-2);
}

void closed_form(Outcome& o, Profile) {
  const DomainSpec d = domain(64, 96, 48);
  const GridPtr g = make_grid(d);
  const SpeedField sp(g, SpeedModel::constant());
  const double a0 = 0.7;
  const OpticalParams p = OpticalParams::constant(*g, a0, {0.0}, 0.1);
  const FiberField u = forward_solve(constant_source(g, 1.0), p, sp).u;
  // The closed form pushed through the same angular truncation.
  // Converged modes of the exact solution; a 2 N + 2 reference aliases like the solver does.
  const int J = 512;
  PhaseSamples s{g, J, std::vector<cplx>(g->size() * J, 0.0)};
  for (int node : g->mask_nodes())
    for (int j = 0; j < J; ++j) {
      const PhasePoint q{g->node_x(node), g->node_y(node), 2 * M_PI * j / J};
      s.at(node, j) = (1 - std::exp(-a0 * exit_time(q, sp).backward)) / a0;
    }
  const FiberField ref = decompose(s, u.degree(), true);
  o.le("relative L2 error", l2_norm(u - ref, sp) / l2_norm(ref, sp), 1e-3);
}

void contraction(Outcome& o, Profile) {
  const GridPtr g = make_grid(domain(40, 96, 48));
  const SpeedField sp(g, SpeedModel::bump(0.2, 0.5));
  for (const std::vector<cplx>& k : {std::vector<cplx>{0.8}, std::vector<cplx>{0.8, 0.25, 0.1}}) {
    const OpticalParams p = OpticalParams::constant(*g, 0.9, k, 0.1);
    const ForwardResult fr = forward_solve(constant_source(g, 1.0), p, sp);
    double worst = 0;
    for (std::size_t i = 1; i < fr.residuals.size(); ++i)
      worst = std::max(worst, fr.residuals[i] / fr.residuals[i - 1]);
    const std::string tag = "m_k=" + std::to_string(k.size() - 1);
    o.le(tag + " max residual ratio", worst, 1 - 1e-12);
    o.le(tag + " iterations", fr.iterations, 200);
    o.le(tag + " final residual", fr.residuals.back(), 1e-10);
  }
}

void accretivity(Outcome& o, Profile) {
  const GridPtr g = make_grid(domain(24, 96, 48));
  const SpeedField sp(g, SpeedModel::bump(0.2, 0.5));
  std::mt19937_64 rng(3);
  double worst = 1e300;
  for (int t = 0; t < 100; ++t) {
    const OpticalParams p = random_params(*g, rng, t % 3);
    check_admissible(*g, p);
    const FiberField u = random_fiber_field(g, 3, rng, t % 2 == 0);
    const double nu = l2_norm(u, sp);
    worst = std::min(worst, accretivity_gap(p, u, sp) / (nu * nu));
  }
  o.ge("min gap / |u|^2 over 100 pairs", worst, -1e-10);
}

void norm_bound(Outcome& o, Profile profile) {
  const int trials = profile == Profile::Full ? 50 : 10;
  const DomainSpec d = domain(32, 64, 32);
  const SpeedField sp(make_grid(d), SpeedModel::bump(0.15, 0.5));
  const OpticalParams p = OpticalParams::constant(sp.grid(), 1.0, {0.6, 0.2}, 0.1);
  const NormBoundReport r = norm_bound_check(p, sp, d, trials);
  o.truth(std::to_string(trials) + " trials", r.ratios.size() == static_cast<std::size_t>(trials));
  o.le("max |Mf| / |f| / bound", r.max_ratio / r.bound, 1 + 1e-3);
}

void gauge_null_space(Outcome& o, Profile profile) {
  const int n = 64, trials = profile == Profile::Full ? 20 : 4;
  const DomainSpec d = domain(n, 2 * n, n);
  const SpeedField sp(make_grid(d), SpeedModel::gaussian(0.1));
  const std::vector<std::vector<cplx>> kernels = {
      {0.2}, {0.2, 0.06}, {0.2, 0.06, 0.03}, {0.2, 0.06, 0.03, 0.015}};
  std::mt19937_64 rng(8);
  double worst = 0;
  for (int t = 0; t < trials; ++t) {
    const OpticalParams P = OpticalParams::constant(sp.grid(), 0.6, kernels[t % 4], 0.1);
    const FiberField p = random_fiber_field(sp.grid_ptr(), t % 3, rng, true, true);
    worst = std::max(worst, gauge_verify(gauge_generate(p, P, sp), P, sp, d));
  }
  o.le("max |M f| / |f| over " + std::to_string(trials) + " gauge sources", worst, 1e-3);
}

void roundtrips(Outcome& o, Profile profile) {
  const std::vector<int> sizes = profile == Profile::Full ? std::vector<int>{128, 256} : std::vector<int>{48, 96};
  const RunConfig cfg;
  double prev[3] = {0, 0, 0};
  for (int n : sizes) {
    const DomainSpec d = domain(n, 2 * n, n);
    const SpeedField sp(make_grid(d), SpeedModel::constant());
    const Grid& g = sp.grid();
    const OpticalParams P = OpticalParams::constant(g, 0.6, {0.2, 0.08, 0.04}, 0.1);
    const ComplexGrid f0 = source_profile(cfg, g, "f0"), fperp = source_profile(cfg, g, "fperp");
    const ComplexGrid f1 = source_profile(cfg, g, "f1");
    const std::string tag = "n=" + std::to_string(n) + " ";
    RecoverOptions lsq;
    lsq.backend = Backend::Lsq;

    const SourceFixture fx1 = make_fixture(make_source(cfg, sp, "1"), P, sp, d);
    PipelineState s1 = step2_triangular(fx1.split.h, P, sp, 2);
    const Case1Result r1 = case1_finish(s1, fx1.split.h, P, sp);
    const double e0 = relative_error(sp, r1.f0, f0), ep = relative_error(sp, r1.f_perp, fperp, true);
    const GaugeRepresentative h1 = recover_representative(fx1.data, P, sp, lsq);
    PipelineState l1 = step2_triangular(h1, P, sp, 2);
    const Case1Result q1 = case1_finish(l1, h1, P, sp);

    const SourceFixture fx2 = make_fixture(make_source(cfg, sp, "2"), P, sp, d);
    PipelineState s2 = step2_triangular(fx2.split.h, P, sp, 2);
    const double e1 = relative_error(sp, case2_finish(s2, fx2.split.h, P, sp).mode(1), f1);
    const GaugeRepresentative h2 = recover_representative(fx2.data, P, sp, lsq);
    PipelineState l2 = step2_triangular(h2, P, sp, 2);
    const double q2 = relative_error(sp, case2_finish(l2, h2, P, sp).mode(1), f1);

    o.le(tag + "oracle f0", e0, 2e-2);
    o.le(tag + "oracle fperp", ep, 2e-2);
    o.le(tag + "oracle f1", e1, 2e-2);
    const double errs[3] = {e0, ep, e1};
    const char* names[3] = {"f0", "fperp", "f1"};
    if (n != sizes.front())
      for (int i = 0; i < 3; ++i) o.le(tag + names[i] + " refinement ratio", errs[i] / prev[i], 0.5);
    std::copy(errs, errs + 3, prev);
    o.le(tag + "lsq f0", relative_error(sp, q1.f0, f0), 5e-2);
    o.le(tag + "lsq fperp", relative_error(sp, q1.f_perp, fperp, true), 5e-2);
    o.le(tag + "lsq f1", q2, 5e-2);
  }
}

void isotropic(Outcome& o, Profile) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> q(-64, 64);
  bool exact = true;
  for (int t = 0; t < 200; ++t) {
    const cplx f0(q(rng) / 16.0, q(rng) / 16.0), u0(q(rng) / 16.0, q(rng) / 16.0);
    const double k0 = (q(rng) + 65) / 256.0, a = k0 + (q(rng) + 65) / 128.0;
    exact = exact && iso2_eliminate(k0 * u0 - a * f0, u0 - f0, k0, a) == f0;
  }
  o.truth("elimination identity exact on 200 dyadic inputs", exact);

  const int n = 48;
  const DomainSpec d = domain(n, 2 * n, n);
  const SpeedField sp(make_grid(d), SpeedModel::gaussian(0.1));
  const Grid& g = sp.grid();
  const RunConfig cfg;
  const OpticalParams P = OpticalParams::constant(g, 0.6, {0.3}, 0.1);
  RecoverOptions lsq;
  lsq.backend = Backend::Lsq;

  const SourceFixture fx1 = make_fixture(make_source(cfg, sp, "iso1"), P, sp, d);
  RecoverOptions oracle;
  oracle.truth = &fx1.split.h;
  const ComplexGrid f0 = source_profile(cfg, g, "f0"), fperp = source_profile(cfg, g, "fperp");
  for (const auto& [name, opt] : {std::pair<const char*, const RecoverOptions*>{"oracle", &oracle}, {"lsq", &lsq}}) {
    const Case1Result r = isotropic_case1(fx1.data, P, sp, *opt);
    o.le(std::string("iso1 ") + name + " f0", relative_error(sp, r.f0, f0), 5e-2);
    o.le(std::string("iso1 ") + name + " fperp", relative_error(sp, r.f_perp, fperp, true), 5e-2);
  }
  const SourceFixture fx2 = make_fixture(make_source(cfg, sp, "iso2"), P, sp, d, {}, 1);
  oracle.truth = &fx2.split.h;
  const ComplexGrid f1 = source_profile(cfg, g, "f1");
  for (const auto& [name, opt] : {std::pair<const char*, const RecoverOptions*>{"oracle", &oracle}, {"lsq", &lsq}}) {
    const Iso2Result r = isotropic_case2(fx2.data, P, sp, *opt);
    o.le(std::string("iso2 ") + name + " f1", relative_error(sp, r.f1.mode(1), f1), 5e-2);
  }
}

void trace(Outcome& o, Profile) {
  const SpeedField sp(make_grid(domain(32, 96, 48)), SpeedModel::constant());
  const auto bad = trace_counterexample(-1.25, 5, sp, 8);
  o.ge("eta=-1.25 trace growth", bad.back().trace_integral / bad.front().trace_integral, 10);
  o.le("eta=-1.25 |W change|", std::abs(bad.back().w_integral / bad.front().w_integral - 1), 5e-2);
  const auto good = trace_counterexample(-0.5, 5, sp, 8);
  o.le("eta=-0.5 |trace change|", std::abs(good.back().trace_integral / good.front().trace_integral - 1), 5e-2);
  o.le("eta=-0.5 |W change|", std::abs(good.back().w_integral / good.front().w_integral - 1), 5e-2);
}

void structure(Outcome& o, Profile) {
  double prev = 0;
  for (int n : {41, 81}) {
    const GridPtr g = make_grid(domain(n, 96, 48));
    const SpeedField sp(g, SpeedModel::gaussian(0.5));
    const FiberField u = smooth_field(g, 2);
    const std::string tag = "n=" + std::to_string(n) + " ";
    o.le(tag + "[X,V] - X_perp", interior_max(apply_X_modes(apply_V(u), sp) - apply_V(apply_X_modes(u, sp)) -
                                              apply_X_perp_modes(u, sp)),
         1e-9);
    o.le(tag + "[X_perp,V] + X", interior_max(apply_X_perp_modes(apply_V(u), sp) -
                                              apply_V(apply_X_perp_modes(u, sp)) + apply_X_modes(u, sp)),
         1e-9);
    FiberField c3 = apply_X_modes(apply_X_perp_modes(u, sp), sp) - apply_X_perp_modes(apply_X_modes(u, sp), sp);
    c3 += multiply(sp.kappa(), apply_V(u)).with_degree(c3.degree());
    const double err = interior_max(c3) / interior_max(u);
    o.le(tag + "[X,X_perp] + kappa V (relative)", err, 5e-2);
    if (prev > 0) o.le("[X,X_perp] refinement ratio (O(h))", err / prev, 0.6);
    prev = err;
    o.le(tag + "X - X_+ - X_-",
         interior_max(apply_X(u, sp) - apply_X_plus(u, sp) - apply_X_minus(u, sp).with_degree(3), 2.0), 1e-10);
  }
  const SpeedModel m = SpeedModel::gaussian(0.5);
  prev = 0;
  for (int n : {33, 65, 129}) {
    const GridPtr g = make_grid(domain(n, 96, 48));
    const SpeedField sp(g, m);
    ComplexGrid u(g->size());
    for (int node : g->mask_nodes()) {
      const double x = g->node_x(node), y = g->node_y(node);
      u[node] = std::sin(x) * std::exp(y) + x * x;  // Delta u = 2
    }
    const ComplexGrid lap = apply_eta(-1, 1, apply_eta(+1, 0, u, sp, Flavor::Free), sp, Flavor::Free);
    double err = 0;
    for (int node : g->mask_nodes()) {
      const double x = g->node_x(node), y = g->node_y(node);
      if (x * x + y * y > 0.64) continue;
      const double c = m.eval(x, y).c;
      err = std::max(err, std::abs(4.0 * lap[node] - c * c * 2.0));
    }
    if (prev > 0) o.le("4 eta_- eta_+ - Delta_g refinement ratio n=" + std::to_string(n) + " (O(h^2))", err / prev, 0.3);
    prev = err;
  }
  o.le("4 eta_- eta_+ - Delta_g at n=129", prev, 1e-3);
}

void descent(Outcome& o, Profile) {
  const int n = 40;
  const DomainSpec d = domain(n, 2 * n, n);
  const SpeedField sp(make_grid(d), SpeedModel::gaussian(0.1));
  const OpticalParams k3 = OpticalParams::constant(sp.grid(), 0.6, {0.2, 0.06, 0.03, 0.015}, 0.1);
  for (int m : {1, 2, 3}) {
    const DescentReport r = degree_descent_probe(k3, sp, d, m);
    bool monotone = !r.stages.empty();
    std::ostringstream seq;
    for (std::size_t i = 0; i < r.stages.size(); ++i) {
      seq << (i ? "," : "") << r.stages[i].numerical_degree;
      if (i > 0 && r.stages[i].numerical_degree > r.stages[i - 1].numerical_degree) monotone = false;
    }
    const std::string tag = "m=" + std::to_string(m) + " degrees [" + seq.str() + "]";
    o.truth(tag + " non-increasing", monotone);
    o.truth(tag + " ends at m-1",
            !r.stages.empty() && r.stages.back().bound == m - 1 && r.stages.back().numerical_degree <= m - 1);
  }
}

struct Criterion {
  int id;
  const char* name;
  void (*run)(Outcome&, Profile);
};

const Criterion kCriteria[] = {
    {1, "Santalo identity", santalo},
    {2, "exit-time oracle", exit_times},
    {3, "convexity constant", convexity},
    {4, "forward solver vs closed form", closed_form},
    {5, "source-iteration contraction", contraction},
    {6, "accretivity", accretivity},
    {7, "measurement norm bound", norm_bound},
    {8, "gauge null space", gauge_null_space},
    {9, "synthetic-gauge roundtrips", roundtrips},
    {10, "isotropic specializations", isotropic},
    {11, "trace counterexample", trace},
    {12, "structure equations", structure},
    {13, "degree descent", descent},
};

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt) {
  std::vector<CriterionResult> out;
  for (const Criterion& c : kCriteria) {
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), c.id) == opt.only.end()) continue;
    CriterionResult r;
    r.id = c.id;
    r.name = c.name;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      c.run(o, opt.profile);
      r.pass = o.pass;
      r.detail = o.detail.str();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = o.detail.str() + (o.detail.tellp() > 0 ? "; " : "") + "exception: " + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (opt.on_result) opt.on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream s;
  s << (r.pass ? "PASS " : "FAIL ") << std::setw(2) << r.id << " " << r.name << ": " << r.detail << " ["
    << std::fixed << std::setprecision(1) << r.seconds << " s]";
  return s.str();
}

}  // namespace rts
