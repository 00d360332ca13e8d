#include "rts/transport.hpp"

#include <algorithm>
#include <cmath>

#include "rts/profiles.hpp"

namespace rts {

namespace {

// Bilinear evaluation of a fiber field and an attenuation along rays. Modes
// are extended past the circle first so the last (exit) sample is sensible.
class PhaseEvaluator {
 public:
  PhaseEvaluator(const FiberField& q, const RealGrid& a)
      : g_(q.grid()), N_(q.degree()), real_(q.real()), K_(real_ ? N_ + 1 : 2 * N_ + 1), a_(extend(g_, a)) {
    // Node-major storage: the K modes of a node are contiguous, so a bilinear
    // lookup touches four short runs instead of 4 K scattered values.
    const int lo = real_ ? 0 : -N_;
    modes_.assign(g_.size() * K_, cplx(0));
    for (int k = 0; k < K_; ++k) {
      const ComplexGrid e = extend(g_, q.mode(lo + k));
      for (std::size_t node = 0; node < e.size(); ++node) modes_[node * K_ + k] = e[node];
    }
    has_a_ = std::any_of(a.begin(), a.end(), [](double v) { return v != 0.0; });
  }

  struct Cell {
    int base;
    double fx, fy;
  };

  Cell cell(double x, double y) const {
    const double h = g_.h(), R = g_.radius();
    const double u = (x + R) / h, v = (y + R) / h;
    const int i = std::clamp(static_cast<int>(std::floor(u)), 0, g_.n() - 2);
    const int j = std::clamp(static_cast<int>(std::floor(v)), 0, g_.n() - 2);
    return {g_.flat(i, j), u - i, v - j};
  }

  template <class T>
  T lerp(const std::vector<T>& f, const Cell& c) const {
    const int n = g_.n();
    return (1 - c.fy) * ((1 - c.fx) * f[c.base] + c.fx * f[c.base + 1]) +
           c.fy * ((1 - c.fx) * f[c.base + n] + c.fx * f[c.base + n + 1]);
  }

  double atten(const Cell& c) const { return has_a_ ? lerp(a_, c) : 0.0; }

  cplx value(const Cell& c, double ct, double st) const {
    const int n = g_.n();
    const double w00 = (1 - c.fx) * (1 - c.fy), w10 = c.fx * (1 - c.fy), w01 = (1 - c.fx) * c.fy, w11 = c.fx * c.fy;
    const cplx* p00 = &modes_[static_cast<std::size_t>(c.base) * K_];
    const cplx* p10 = p00 + K_;
    const cplx* p01 = p00 + static_cast<std::size_t>(n) * K_;
    const cplx* p11 = p01 + K_;
    auto at = [&](int k) { return w00 * p00[k] + w10 * p10[k] + w01 * p01[k] + w11 * p11[k]; };
    const cplx step(ct, st);
    if (real_) {
      double acc = at(0).real();
      cplx e = step;
      for (int k = 1; k <= N_; ++k, e *= step) acc += 2 * (at(k) * e).real();
      return acc;
    }
    cplx e = std::pow(step, -N_);
    cplx acc = 0;
    for (int k = 0; k < K_; ++k, e *= step) acc += at(k) * e;
    return acc;
  }

 private:
  const Grid& g_;
  int N_;
  bool real_;
  int K_;
  RealGrid a_;
  bool has_a_ = false;
  std::vector<cplx> modes_;
};

struct RayIntegral {
  cplx value;
  double tau;
};

// int_0^tau q(phi_{-s}) exp(-int_0^s a(phi_{-s'}) ds') ds, trapezoidal in s.
RayIntegral integrate_backward(const PhaseEvaluator& ev, const SpeedField& speed, const PhasePoint& start,
                               double step, double cap) {
  cplx acc = 0, prev_g = 0;
  double prev_t = 0, prev_a = 0, A = 0;
  bool first = true;
  const double tau = trace_ray_vec(speed.model(), speed.grid().radius(), start, FlowDirection::Backward, step, cap,
                                   [&](double t, const RayPoint& p) {
                                 const auto c = ev.cell(p.x, p.y);
                                 const double av = ev.atten(c);
                                 if (!first) A += 0.5 * (prev_a + av) * (t - prev_t);
                                 const cplx gv = ev.value(c, p.ct, p.st) * std::exp(-A);
                                 if (!first) acc += 0.5 * (prev_g + gv) * (t - prev_t);
                                 first = false;
                                 prev_t = t;
                                 prev_a = av;
                                 prev_g = gv;
                               });
  return {acc, tau};
}

// Default direction count shared by every solve up to N = 15: data and
// reconstruction then trace the same direction set, while 2 N + 2 per solve
// mixed 24 and 26 directions and left an h-independent error floor.
constexpr int kMinThetaSamples = 32;

int default_degree(const FiberField& q, int m_k, const TransportOptions& opt) {
  return opt.max_degree > 0 ? opt.max_degree : m_k + q.degree() + 8;
}

void check_tail(const FiberField& u, double tol) {
  const int N = u.degree();
  if (N == 0) return;
  const double total = u.grid_energy();
  if (total <= 0) return;
  const double top = std::pow(norm2(u.grid(), u.mode(N)), 2) + std::pow(norm2(u.grid(), u.mode(-N)), 2);
  if (top / total > tol)
    throw DegreeOverflow("transport solution has significant energy in the top retained mode");
}

bool is_zero(const FiberField& f) {
  for (int n = -f.degree(); n <= f.degree(); ++n)
    for (const cplx& v : f.mode(n))
      if (v != cplx(0)) return false;
  return true;
}

}  // namespace

double BoundaryFan::l2_norm() const {
  double acc = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) acc += std::norm(values[i]) * entries[i].weight;
  return std::sqrt(acc);
}

double BoundaryFan::l2_mu_norm() const {
  double acc = 0;
  for (std::size_t i = 0; i < entries.size(); ++i)
    acc += std::norm(values[i]) * entries[i].weight * std::abs(entries[i].mu);
  return std::sqrt(acc);
}

BoundaryFan make_fan(const SpeedField& speed, const DomainSpec& domain) {
  BoundaryFan fan;
  fan.boundary_n = domain.boundary_n;
  fan.dir_n = domain.dir_n;
  fan.outgoing = true;
  fan.entries = fan_entries(speed, domain.boundary_n, domain.dir_n, true);
  fan.tau.assign(fan.entries.size(), 0.0);
  fan.values.assign(fan.entries.size(), 0.0);
  return fan;
}

void attenuated_ray_transform(const FiberField& f, const RealGrid& a, const SpeedField& speed, BoundaryFan& fan,
                              const FlowOptions& flow) {
  const PhaseEvaluator ev(f, a);
  const double step = resolve_step(speed, flow), cap = resolve_max_length(speed, flow);
  const double R = speed.grid().radius();
  fan.values.assign(fan.entries.size(), 0.0);
  fan.tau.assign(fan.entries.size(), 0.0);
  const int count = static_cast<int>(fan.entries.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < count; ++i) {
    const FanEntry& e = fan.entries[i];
    const RayIntegral r = integrate_backward(ev, speed, boundary_point(e.s, e.theta, R), step, cap);
    fan.values[i] = r.value;
    fan.tau[i] = r.tau;
  }
}

BoundaryFan attenuated_ray_transform(const FiberField& f, const RealGrid& a, const SpeedField& speed,
                                     const DomainSpec& domain, const FlowOptions& flow) {
  BoundaryFan fan = make_fan(speed, domain);
  attenuated_ray_transform(f, a, speed, fan, flow);
  return fan;
}

PhaseSamples free_transport_samples(const FiberField& q, const RealGrid& a, const SpeedField& speed, int theta_samples,
                                    const FlowOptions& flow) {
  const Grid& g = q.grid();
  const PhaseEvaluator ev(q, a);
  const double step = resolve_step(speed, flow), cap = resolve_max_length(speed, flow);
  PhaseSamples out;
  out.grid = q.grid_ptr();
  out.theta_n = theta_samples;
  out.values.assign(g.size() * theta_samples, 0.0);
  const auto& nodes = g.mask_nodes();
  const int count = static_cast<int>(nodes.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (int s = 0; s < count; ++s) {
    const int node = nodes[s];
    for (int j = 0; j < theta_samples; ++j) {
      const PhasePoint p{g.node_x(node), g.node_y(node), 2 * M_PI * j / theta_samples};
      out.at(node, j) = integrate_backward(ev, speed, p, step, cap).value;
    }
  }
  return out;
}

FiberField solve_free_transport(const FiberField& q, const RealGrid& a, const SpeedField& speed,
                                const TransportOptions& opt) {
  const int N = default_degree(q, 0, opt);
  const int J = opt.theta_samples > 0 ? opt.theta_samples : std::max(2 * N + 2, kMinThetaSamples);
  if (J <= 2 * N) throw AliasError("direction sampling too coarse for the requested output degree");
  FiberField u = decompose(free_transport_samples(q, a, speed, J, opt.flow), N, q.real());
  check_tail(u, opt.tail_tol);
  return u;
}

ForwardResult forward_solve(const FiberField& f, const OpticalParams& p, const SpeedField& speed,
                            const TransportOptions& opt) {
  const Grid& g = f.grid();
  check_admissible(g, p);
  TransportOptions topt = opt;
  topt.max_degree = default_degree(f, p.m_k(), opt);
  const bool real = f.real() && p.real_kernel(g);

  ForwardResult res;
  FiberField base = solve_free_transport(f, p.a, speed, topt);
  base.set_real(real);
  res.u = base;
  res.iterations = 1;

  int rising = 0;
  double prev = 0;
  for (int it = 1; it < opt.max_iterations; ++it) {
    FiberField Su = apply_S(p, res.u).with_degree(p.m_k());
    Su.set_real(real);
    if (is_zero(Su)) break;
    FiberField next = base + solve_free_transport(Su, p.a, speed, topt);
    next.set_real(real);
    const double denom = l2_norm(next, speed);
    const double r = denom > 0 ? l2_norm(next - res.u, speed) / denom : 0.0;
    res.u = std::move(next);
    res.iterations = it + 1;
    res.residuals.push_back(r);
    if (r < opt.tol) return res;
    rising = (it > 1 && r >= prev) ? rising + 1 : 0;
    if (rising >= opt.divergence_window || !std::isfinite(r))
      throw NonConvergence("source iteration stopped contracting");
    prev = r;
  }
  if (!res.residuals.empty() && res.residuals.back() >= opt.tol)
    throw NonConvergence("source iteration hit the iteration cap");
  return res;
}

BoundaryFan measure(const FiberField& f, const OpticalParams& p, const SpeedField& speed, const DomainSpec& domain,
                    const TransportOptions& opt, ForwardResult* forward) {
  ForwardResult fr = forward_solve(f, p, speed, opt);
  FiberField src = f.with_degree(std::max(f.degree(), p.m_k()));
  src += apply_S(p, fr.u).with_degree(src.degree());
  src.set_real(f.real() && p.real_kernel(f.grid()));
  BoundaryFan fan = attenuated_ray_transform(src, p.a, speed, domain, opt.flow);
  if (forward) *forward = std::move(fr);
  return fan;
}

double measurement_ratio(const FiberField& f, const OpticalParams& p, const SpeedField& speed,
                         const DomainSpec& domain, const TransportOptions& opt) {
  const double nf = l2_norm(f, speed);
  if (nf == 0) return 0;
  return measure(f, p, speed, domain, opt).l2_norm() / nf;
}

NormBoundReport norm_bound_check(const OpticalParams& p, const SpeedField& speed, const DomainSpec& domain, int trials,
                                 std::uint64_t seed, const TransportOptions& opt) {
  const Grid& g = speed.grid();
  check_admissible(g, p);
  NormBoundReport rep;
  rep.c0 = convexity_constant(speed, domain, opt.flow);
  rep.q_inf = q_infty(g, p);
  rep.delta = p.delta;
  rep.bound = std::sqrt(rep.c0) * (rep.q_inf / rep.delta + 1);
  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    const FiberField f = random_fiber_field(speed.grid_ptr(), 2, rng, true);
    const double r = measurement_ratio(f, p, speed, domain, opt);
    rep.ratios.push_back(r);
    rep.max_ratio = std::max(rep.max_ratio, r);
  }
  return rep;
}

namespace {

struct GaussRule {
  std::vector<double> x, w;  // on [0, 1]
};

GaussRule gauss_legendre(int n) {
  GaussRule r;
  for (int i = 1; i <= n; ++i) {
    double z = std::cos(M_PI * (i - 0.25) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    r.x.push_back(0.5 * (1 - z));
    r.w.push_back(1.0 / ((1 - z * z) * dp * dp));
  }
  return r;
}

}  // namespace

std::vector<TraceRow> trace_counterexample(double eta, int levels, const SpeedField& speed, int boundary_n,
                                           double first_margin, double ratio, const FlowOptions& flow) {
  if (levels < 1 || boundary_n < 1 || !(first_margin > 0 && first_margin < 1) || !(ratio > 1))
    throw InvalidArgument("trace_counterexample: bad levels, boundary sampling, margin or ratio");
  const double R = speed.grid().radius();
  const double step = resolve_step(speed, flow), cap = resolve_max_length(speed, flow);
  const GaussRule gl = gauss_legendre(10);
  const double ds_e = 2 * M_PI * R / boundary_n;
  auto none = [](double, const PhasePoint&) {};

  std::vector<TraceRow> rows;
  for (int l = 0; l < levels; ++l) {
    const double margin = first_margin * std::pow(ratio, -l);
    // Graded panels in u = angular distance from glancing, |mu| = sin u.
    std::vector<double> edges{std::asin(margin)};
    while (edges.back() < M_PI / 2) edges.push_back(std::min(M_PI / 2, 2 * edges.back()));
    double trace = 0, wint = 0;
    for (int i = 0; i < boundary_n; ++i) {
      const double s = ds_e * i, phi = s / R;
      const double c = speed.model().eval(R * std::cos(phi), R * std::sin(phi)).c;
      const double ds_g = ds_e / c;
      for (int side = 0; side < 2; ++side)
        for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
          const double a = edges[e], b = edges[e + 1];
          for (std::size_t k = 0; k < gl.x.size(); ++k) {
            const double u = a + (b - a) * gl.x[k];
            const double beta = side == 0 ? M_PI / 2 + u : 3 * M_PI / 2 - u;
            const double tau =
                trace_ray(speed.model(), R, boundary_point(s, phi + beta, R), FlowDirection::Forward, step, cap, none);
            const double mu = std::sin(u);
            const double w = ds_g * (b - a) * gl.w[k];
            trace += w * std::pow(tau, 2 * eta) * mu;
            wint += w * std::pow(tau, 2 * eta + 1) * mu;
          }
        }
    }
    rows.push_back({margin, trace, wint});
  }
  return rows;
}

}  // namespace rts
