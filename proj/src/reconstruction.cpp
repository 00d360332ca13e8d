#include "rts/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rts/errors.hpp"
#include "rts/profiles.hpp"

namespace rts {

GaugeRepresentative recover_lsq(const BoundaryFan& data, const OpticalParams& params, const SpeedField& speed,
                                const RecoverOptions& opt, int m, RecoverReport* report);

namespace {

// Free transport with the angular truncation a forward solve with this kernel
// would use. The source-only default samples fewer directions, and aliasing
// from the unresolved tail then floors the reconstruction error.
TransportOptions kernel_resolved(TransportOptions o, const FiberField& q, int m_k) {
  if (o.max_degree <= 0) o.max_degree = m_k + q.degree() + 8;
  return o;
}

// X_perp of a zero-boundary mode-0 grid: mode +1 = -i eta_+ h, mode -1 = i eta_- h.
FiberField x_perp_of(const ComplexGrid& h, const SpeedField& speed, bool real) {
  FiberField out(speed.grid_ptr(), 1, real);
  const ComplexGrid up = apply_eta(+1, 0, h, speed, Flavor::ZeroBoundary);
  const ComplexGrid dn = apply_eta(-1, 0, h, speed, Flavor::ZeroBoundary);
  for (std::size_t k = 0; k < up.size(); ++k) {
    out.mode(1)[k] = cplx(0, -1) * up[k];
    out.mode(-1)[k] = cplx(0, 1) * dn[k];
  }
  return out;
}

// p carried only on modes +-n.
FiberField only_modes(const FiberField& p, int n) {
  FiberField out(p.grid_ptr(), n, p.real());
  out.mode(n) = p.mode_or_zero(n);
  out.mode(-n) = p.mode_or_zero(-n);
  return out;
}

bool grid_is_real(const Grid& g, const ComplexGrid& f) {
  for (int node : g.mask_nodes())
    if (f[node].imag() != 0.0) return false;
  return true;
}

bool representative_is_real(const Grid& g, const GaugeRepresentative& h) {
  if (!grid_is_real(g, h.h0) || !grid_is_real(g, h.h_perp)) return false;
  for (const auto& hk : h.h_k)
    if (!hk.real()) return false;
  return true;
}

ComplexGrid combine(const ComplexGrid& a, cplx sa, const ComplexGrid& b, cplx sb) {
  ComplexGrid out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = sa * a[k] + sb * b[k];
  return out;
}

void axpy(ComplexGrid& y, cplx s, const ComplexGrid& x) {
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += s * x[k];
}

// (X_- p)_n for n = +-(k+1), from p_{+-(k+2)}.
ComplexGrid x_minus_at(const FiberField& p, int n, const SpeedField& speed) {
  const int src = n > 0 ? n + 1 : n - 1;
  if (!p.has_mode(src)) return ComplexGrid(speed.grid().size(), cplx(0));
  return apply_eta(n > 0 ? -1 : +1, src, p.mode(src), speed, Flavor::ZeroBoundary);
}

// (a p - S p)_n.
ComplexGrid absorption_at(const FiberField& p, int n, const OpticalParams& params, const Grid& g) {
  ComplexGrid out(g.size(), cplx(0));
  if (!p.has_mode(n)) return out;
  const bool scatter = std::abs(n) <= params.m_k();
  for (int node : g.mask_nodes()) {
    const cplx k = scatter ? params.k(n)[node] : cplx(0);
    out[node] = (params.a[node] - k) * p.mode(n)[node];
  }
  return out;
}

}  // namespace

FiberField GaugeRepresentative::synthesize(const SpeedField& speed, bool real) const {
  const int D = std::max(1, degree());
  FiberField out(speed.grid_ptr(), D, real);
  out.mode(0) = h0;
  out += x_perp_of(h_perp, speed, real);
  for (const FiberField& hk : h_k) out += hk;
  out.set_real(real);
  return out;
}

GaugeRepresentative GaugeRepresentative::zero(const GridPtr& g, int m, bool real) {
  GaugeRepresentative h;
  h.h0.assign(g->size(), cplx(0));
  h.h_perp.assign(g->size(), cplx(0));
  for (int k = 1; k <= m; ++k) h.h_k.emplace_back(g, k, real);
  return h;
}

GaugeSplit gauge_split(const FiberField& F, const RealGrid& a, const SpeedField& speed, int m) {
  const GridPtr& g = speed.grid_ptr();
  const bool real = F.real();
  FiberField r = F.with_degree(std::max(1, std::max(m, F.degree())));
  GaugeSplit out;
  out.p = FiberField(g, std::max(m - 1, 0), real);
  std::vector<FiberField> hk(std::max(m, 1));
  for (int k = m; k >= 2; --k) {
    FiberField uk(g, k, real);
    uk.mode(k) = r.mode(k);
    uk.mode(-k) = r.mode(-k);
    const SolenoidalResult sol = solenoidal_project(uk, k, speed);
    const FiberField v = only_modes(sol.v, k - 1);
    out.p.mode(k - 1) = v.mode(k - 1);
    out.p.mode(-(k - 1)) = v.mode(-(k - 1));
    r -= apply_X_modes(v, speed, Flavor::ZeroBoundary);
    r -= multiply(a, v);
    hk[k - 1] = only_modes(r, k);
  }
  FiberField r1 = only_modes(r, 1);
  const HodgeResult hodge = hodge_decompose(r1, speed);
  out.h.h_perp = hodge.fperp;
  if (m >= 1) {
    FiberField p0(g, 0, real);
    p0.mode(0) = hodge.f0;
    out.p.mode(0) = hodge.f0;
    r -= apply_X_modes(p0, speed, Flavor::ZeroBoundary);
    r -= multiply(a, p0);
  }
  hk[0] = only_modes(r, 1) - x_perp_of(out.h.h_perp, speed, real);
  hk[0].set_real(real);
  out.h.h0 = r.mode(0);
  // Without a gauge (m = 0) the degree-1 remainder is kept so that h reproduces F.
  out.h.h_k = std::move(hk);
  return out;
}

HarnessResult synthetic_gauge_harness(const FiberField& p, const GaugeRepresentative& h, const OpticalParams& params,
                                      const SpeedField& speed, const DomainSpec& domain, const TransportOptions& opt) {
  const bool real = p.real() && representative_is_real(speed.grid(), h);
  FiberField F = apply_X_modes(p, speed, Flavor::ZeroBoundary) + multiply(params.a, p);
  F += h.synthesize(speed, real);
  F.set_real(real && F.real());
  HarnessResult out;
  out.u = solve_free_transport(F, params.a, speed, kernel_resolved(opt, F, params.m_k()));
  out.f = F.with_degree(std::max(F.degree(), params.m_k())) - apply_S(params, out.u);
  out.data = attenuated_ray_transform(F, params.a, speed, domain, opt.flow);
  out.truth = h;
  return out;
}

SourceFixture make_fixture(const FiberField& f, const OpticalParams& params, const SpeedField& speed,
                           const DomainSpec& domain, const TransportOptions& opt, int degree) {
  SourceFixture out;
  out.f = f;
  out.data = measure(f, params, speed, domain, opt, &out.forward);
  const int m = degree >= 0 ? degree : params.m_k();
  FiberField F = f.with_degree(std::max({1, m, f.degree()})) + apply_S(params, out.forward.u);
  out.split = gauge_split(F, params.a, speed, m);
  return out;
}

GaugeRepresentative recover_representative(const BoundaryFan& data, const OpticalParams& params,
                                           const SpeedField& speed, const RecoverOptions& opt,
                                           RecoverReport* report) {
  const int m = opt.degree >= 0 ? opt.degree : params.m_k();
  if (opt.backend == Backend::Oracle) {
    if (!opt.truth) throw InvalidArgument("oracle backend needs the ground-truth representative");
    if (report) *report = RecoverReport{};
    return *opt.truth;
  }
  return recover_lsq(data, params, speed, opt, m, report);
}

PipelineState step2_triangular(const GaugeRepresentative& f_tilde, const OpticalParams& params,
                               const SpeedField& speed, int m, const Step2Options& opt) {
  const Grid& g = speed.grid();
  const bool real = representative_is_real(g, f_tilde) && params.real_kernel(g);
  const FiberField ft = f_tilde.synthesize(speed, real);
  PipelineState st;
  st.w = solve_free_transport(ft, params.a, speed, kernel_resolved(opt.transport, ft, params.m_k()));
  st.Sw = apply_S(params, st.w);
  st.p = FiberField(speed.grid_ptr(), std::max(m - 1, 0), real);
  // H_{k+1}: X_+ p_k = (S w)_{k+1} - f~_{k+1} - X_- p_{k+2} - (a - S) p_{k+1}.
  for (int k = m - 1; k >= 1; --k) {
    for (int sign : {+1, -1}) {
      const int n = sign * (k + 1);
      ComplexGrid h = combine(st.Sw.mode_or_zero(n), 1.0, ft.mode_or_zero(n), -1.0);
      axpy(h, -1.0, x_minus_at(st.p, n, speed));
      axpy(h, -1.0, absorption_at(st.p, n, params, g));
      const DbarResult d = solve_dbar_dirichlet(k, h, speed, sign);
      st.p.mode(sign * k) = d.p;
      st.dbar_residuals.push_back(d.residual);
      if (d.residual > opt.consistency_tol)
        throw ConsistencyFailure("step 2: d-bar residual " + std::to_string(d.residual) + " on mode " +
                                 std::to_string(sign * k) + " exceeds the consistency tolerance");
    }
  }
  return st;
}

Case1Result case1_finish(PipelineState& state, const GaugeRepresentative& f_tilde, const OpticalParams& params,
                         const SpeedField& speed) {
  const Grid& g = speed.grid();
  const bool real = state.p.real();
  const FiberField ft = f_tilde.synthesize(speed, real);
  // s_{1,+-} = (S w)_{+-1} - f~_{+-1} - X_- p_2 - (a - S) p_{+-1}.
  for (int sign : {+1, -1}) {
    ComplexGrid s = combine(state.Sw.mode_or_zero(sign), 1.0, ft.mode(sign), -1.0);
    axpy(s, -1.0, x_minus_at(state.p, sign, speed));
    axpy(s, -1.0, absorption_at(state.p, sign, params, g));
    (sign > 0 ? state.s1_plus : state.s1_minus) = std::move(s);
  }
  const ComplexGrid a = apply_eta(-1, 1, state.s1_plus, speed);
  const ComplexGrid b = apply_eta(+1, -1, state.s1_minus, speed);
  Case1Result out;
  out.p0 = solve_poisson_dirichlet(combine(a, 2.0, b, 2.0), speed);
  const ComplexGrid sp = extend(g, state.s1_plus), sm = extend(g, state.s1_minus);
  const double R = g.radius();
  BoundaryData data = [&](double phi) {
    const double x = R * std::cos(phi), y = R * std::sin(phi);
    const cplx e = std::polar(1.0, phi);
    return cplx(0, -1) * (interpolate(g, sp, x, y) * e - interpolate(g, sm, x, y) / e);
  };
  out.neumann = solve_poisson_neumann(combine(a, cplx(0, -2), b, cplx(0, 2)), data, speed);
  out.f_perp = out.neumann.u;
  state.p.mode(0) = out.p0;

  // H_0: f0 = X_- p_1 + sigma_a p0 - (S w)_0 + f~_0.
  const RealGrid sigma = params.sigma_a(g);
  out.f0.assign(g.size(), cplx(0));
  const ComplexGrid xm = state.p.degree() >= 1
                             ? combine(apply_eta(-1, 1, state.p.mode(1), speed, Flavor::ZeroBoundary), 1.0,
                                       apply_eta(+1, -1, state.p.mode(-1), speed, Flavor::ZeroBoundary), 1.0)
                             : ComplexGrid(g.size(), cplx(0));
  for (int node : g.mask_nodes())
    out.f0[node] = xm[node] + sigma[node] * out.p0[node] - state.Sw.mode_or_zero(0)[node] + ft.mode(0)[node];
  return out;
}

FiberField case2_finish(PipelineState& state, const GaugeRepresentative& f_tilde, const OpticalParams& params,
                        const SpeedField& speed) {
  const Grid& g = speed.grid();
  const bool real = state.p.real();
  const FiberField ft = f_tilde.synthesize(speed, real);
  const RealGrid sigma = params.sigma_a(g);
  // H_0: p0 = [(S w)_0 - f~_0 - X_- p_1] / sigma_a.
  const ComplexGrid xm = state.p.degree() >= 1
                             ? combine(apply_eta(-1, 1, state.p.mode(1), speed, Flavor::ZeroBoundary), 1.0,
                                       apply_eta(+1, -1, state.p.mode(-1), speed, Flavor::ZeroBoundary), 1.0)
                             : ComplexGrid(g.size(), cplx(0));
  ComplexGrid p0(g.size(), cplx(0));
  for (int node : g.mask_nodes())
    p0[node] = (state.Sw.mode_or_zero(0)[node] - ft.mode(0)[node] - xm[node]) / sigma[node];
  state.p.mode(0) = p0;

  // H_1: f1 = X_+ p0 + X_- p2 + (a - S) p1 - (S w)_1 + f~_1.
  FiberField f1(speed.grid_ptr(), 1, real);
  for (int sign : {+1, -1}) {
    ComplexGrid v = apply_eta(sign, 0, p0, speed);
    axpy(v, 1.0, x_minus_at(state.p, sign, speed));
    axpy(v, 1.0, absorption_at(state.p, sign, params, g));
    axpy(v, -1.0, state.Sw.mode_or_zero(sign));
    axpy(v, 1.0, ft.mode(sign));
    clear_outside(g, v);
    f1.mode(sign) = std::move(v);
  }
  return f1;
}

Case1Result isotropic_case1(const BoundaryFan& data, const OpticalParams& params, const SpeedField& speed,
                            const RecoverOptions& opt, const TransportOptions& topt) {
  if (params.m_k() != 0) throw InvalidArgument("isotropic_case1 needs an isotropic kernel");
  RecoverOptions o = opt;
  o.degree = 1;
  const GaugeRepresentative rep = recover_representative(data, params, speed, o);
  Step2Options s2;
  s2.transport = topt;
  PipelineState st = step2_triangular(rep, params, speed, 0, s2);
  return case1_finish(st, rep, params, speed);
}

cplx iso2_eliminate(cplx k0u0_minus_af0, cplx u0_minus_f0, double k0, double a) {
  return (k0u0_minus_af0 - k0 * u0_minus_f0) / (k0 - a);
}

Iso2Result isotropic_case2(const BoundaryFan& data, const OpticalParams& params, const SpeedField& speed,
                           const RecoverOptions& opt, const TransportOptions& topt) {
  if (params.m_k() != 0) throw InvalidArgument("isotropic_case2 needs an isotropic kernel");
  const Grid& g = speed.grid();
  RecoverOptions o = opt;
  o.degree = 1;
  const GaugeRepresentative rep = recover_representative(data, params, speed, o);
  const bool real = representative_is_real(g, rep) && params.real_kernel(g);
  // (X + a)(u - f0~) = (k0 u0 - a f0~) + X_perp f_perp~ + omega_1.
  const FiberField w = solve_free_transport(rep.synthesize(speed, real), params.a, speed, topt);
  Iso2Result out;
  out.f0_tilde.assign(g.size(), cplx(0));
  for (int node : g.mask_nodes())
    out.f0_tilde[node] = iso2_eliminate(rep.h0[node], w.mode(0)[node], params.k(0)[node].real(), params.a[node]);
  out.fperp_tilde = rep.h_perp;
  out.omega = rep.h_k.empty() ? FiberField(speed.grid_ptr(), 1, real) : rep.h_k[0];
  FiberField f0(speed.grid_ptr(), 0, real);
  f0.mode(0) = out.f0_tilde;
  out.f1 = (apply_X_modes(f0, speed) + x_perp_of(rep.h_perp, speed, real)).with_degree(1);
  out.f1 += out.omega.with_degree(1);
  out.f1.set_real(real);
  return out;
}

FiberField gauge_generate(const FiberField& p, const OpticalParams& params, const SpeedField& speed) {
  FiberField f = apply_X_modes(p, speed, Flavor::ZeroBoundary);
  f += multiply(params.a, p);
  f -= apply_S(params, p);
  return f;
}

double gauge_verify(const FiberField& f, const OpticalParams& params, const SpeedField& speed,
                    const DomainSpec& domain, const TransportOptions& opt) {
  const double nf = l2_norm(f, speed);
  if (nf == 0.0) return 0.0;
  return measure(f, params, speed, domain, opt).l2_norm() / nf;
}

DescentReport degree_descent_probe(const OpticalParams& params, const SpeedField& speed, const DomainSpec& domain,
                                   int m, std::uint64_t seed, double degree_tol, const TransportOptions& opt) {
  DescentReport rep;
  rep.source_degree = m;
  rep.kernel_degree = params.m_k();
  if (m <= 0) {
    rep.injective = true;
    return rep;
  }
  std::mt19937_64 rng(seed);
  const bool real = params.real_kernel(speed.grid());
  const FiberField p = random_fiber_field(speed.grid_ptr(), m - 1, rng, real, true);
  const FiberField f = gauge_generate(p, params, speed);
  const double nf = l2_norm(f, speed);

  auto stage = [&](const FiberField& u, const FiberField& F, int bound) {
    DescentStage s;
    s.bound = bound;
    s.numerical_degree = u.numerical_degree(degree_tol);
    s.boundary_norm = attenuated_ray_transform(F, params.a, speed, domain, opt.flow).l2_norm() / nf;
    rep.stages.push_back(s);
  };

  // Stage 0: (X + a) u = f + S u with deg(f + S u) <= max(m, m_k), so deg u <= max(m, m_k) - 1.
  const ForwardResult fw = forward_solve(f, params, speed, opt);
  int bound = std::max(m, params.m_k()) - 1;
  stage(fw.u, f + apply_S(params, fw.u), bound);
  FiberField u = fw.u;
  for (;;) {
    const int next = std::max(m, std::min(params.m_k(), bound)) - 1;
    if (next == bound) break;
    const FiberField F = f + apply_S(params, u.with_degree(bound));
    u = solve_free_transport(F, params.a, speed, kernel_resolved(opt, F, params.m_k()));
    bound = next;
    stage(u, F, bound);
  }
  return rep;
}

double relative_error(const SpeedField& speed, const ComplexGrid& got, const ComplexGrid& want, bool demean) {
  const Grid& g = speed.grid();
  cplx mg = 0, mw = 0;
  if (demean) {
    double area = 0;
    for (int node : g.mask_nodes()) {
      const double w = g.area_weight(node) * speed.area_density()[node];
      mg += w * got[node];
      mw += w * want[node];
      area += w;
    }
    mg /= area;
    mw /= area;
  }
  double e = 0, t = 0;
  for (int node : g.mask_nodes()) {
    const double w = g.area_weight(node) * speed.area_density()[node];
    e += w * std::norm(got[node] - mg - want[node] + mw);
    t += w * std::norm(want[node] - mw);
  }
  if (t == 0) return e == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(e / t);
}

}  // namespace rts
