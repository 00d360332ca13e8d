#include "rts/geometry.hpp"

#include <limits>
#include <sstream>

namespace rts {

double SpeedModel::laplacian(double x, double y) const {
  const double r2 = x * x + y * y;
  switch (family) {
    case Family::Constant:
      return 0.0;
    case Family::Bump: {
      const double s2 = width * width;
      const double e = eps * std::exp(-r2 / s2);
      return e * (4 * r2 / (s2 * s2) - 4 / s2);
    }
    case Family::Gaussian: {
      const double c = c0 * std::exp(-alpha * r2);
      return c * (4 * alpha * alpha * r2 - 4 * alpha);
    }
  }
  return 0.0;
}

double SpeedModel::curvature(double x, double y) const {
  const SpeedSample s = eval(x, y);
  return s.c * laplacian(x, y) - (s.cx * s.cx + s.cy * s.cy);
}

std::string SpeedModel::describe() const {
  std::ostringstream os;
  switch (family) {
    case Family::Constant:
      os << "constant(c0=" << c0 << ")";
      break;
    case Family::Bump:
      os << "bump(c0=" << c0 << ",eps=" << eps << ",width=" << width << ")";
      break;
    case Family::Gaussian:
      os << "gaussian(c0=" << c0 << ",alpha=" << alpha << ")";
      break;
  }
  return os.str();
}

SpeedField::SpeedField(GridPtr grid, SpeedModel model) : grid_(std::move(grid)), model_(model) {
  const std::size_t N = grid_->size();
  c_.resize(N);
  dcx_.resize(N);
  dcy_.resize(N);
  kappa_.resize(N);
  inv_c2_.resize(N);
  cmin_ = std::numeric_limits<double>::infinity();
  cmax_ = 0;
  for (std::size_t k = 0; k < N; ++k) {
    const int node = static_cast<int>(k);
    const double x = grid_->node_x(node), y = grid_->node_y(node);
    const SpeedSample s = model_.eval(x, y);
    c_[k] = s.c;
    dcx_[k] = s.cx;
    dcy_[k] = s.cy;
    kappa_[k] = model_.curvature(x, y);
    inv_c2_[k] = 1.0 / (s.c * s.c);
    if (x * x + y * y <= grid_->radius() * grid_->radius() * (1 + 1e-12)) {
      cmin_ = std::min(cmin_, s.c);
      cmax_ = std::max(cmax_, s.c);
    }
  }
  // Include the boundary circle itself in the extrema.
  for (int k = 0; k < 720; ++k) {
    const double phi = 2 * M_PI * k / 720.0;
    const double c = model_.eval(grid_->radius() * std::cos(phi), grid_->radius() * std::sin(phi)).c;
    cmin_ = std::min(cmin_, c);
    cmax_ = std::max(cmax_, c);
  }
  if (!(cmin_ > 0)) throw InvalidArgument("speed must be positive on the domain");
}

RealGrid curvature(const SpeedField& speed) {
  const Grid& g = speed.grid();
  const double h = g.h();
  RealGrid logc(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) logc[k] = std::log(speed.c()[k]);
  RealGrid out(g.size(), 0.0);
  const int n = g.n();
  for (int node : g.mask_nodes()) {
    const int i = g.col(node), j = g.row(node);
    if (i == 0 || j == 0 || i == n - 1 || j == n - 1) continue;
    const double lap = (logc[node + 1] + logc[node - 1] + logc[node + n] + logc[node - n] - 4 * logc[node]) / (h * h);
    out[node] = speed.c()[node] * speed.c()[node] * lap;
  }
  return out;
}

double resolve_step(const SpeedField& speed, const FlowOptions& opt) {
  return opt.step > 0 ? opt.step : speed.default_step();
}

double resolve_max_length(const SpeedField& speed, const FlowOptions& opt) {
  return opt.max_length > 0 ? opt.max_length : 50.0 * speed.grid().radius() / speed.c_min();
}

GeodesicPath flow(const PhasePoint& p, const SpeedField& speed, FlowDirection dir, const FlowOptions& opt,
                  const RealGrid* attenuation) {
  const Grid& g = speed.grid();
  const double R = g.radius();
  if (p.x * p.x + p.y * p.y > R * R * (1 + 1e-12)) throw InvalidArgument("flow start point lies outside the domain");
  GeodesicPath path;
  path.step = resolve_step(speed, opt);
  const double cap = resolve_max_length(speed, opt);
  RealGrid ext;
  if (attenuation) ext = extend(g, *attenuation);
  const double sgn = dir == FlowDirection::Forward ? 1.0 : -1.0;
  double acc = 0, prev_a = 0, prev_t = 0;
  const double tau = trace_ray(speed.model(), R, p, dir, path.step, cap, [&](double t, const PhasePoint& q) {
    double av = 0;
    if (attenuation) av = interpolate(g, std::span<const double>(ext), q.x, q.y);
    if (!path.points.empty()) acc += 0.5 * (av + prev_a) * (t - prev_t);
    prev_a = av;
    prev_t = t;
    path.points.push_back(q);
    path.times.push_back(sgn * t);
    path.attenuation.push_back(acc);
  });
  const ExitTimes both = exit_time(p, speed, opt);
  path.tau_forward = both.forward;
  path.tau_backward = both.backward;
  if (dir == FlowDirection::Forward) path.tau_forward = tau;
  else path.tau_backward = tau;
  return path;
}

ExitTimes exit_time(const PhasePoint& p, const SpeedField& speed, const FlowOptions& opt) {
  const double R = speed.grid().radius();
  if (p.x * p.x + p.y * p.y > R * R * (1 + 1e-12)) throw InvalidArgument("exit_time point lies outside the domain");
  const double step = resolve_step(speed, opt);
  const double cap = resolve_max_length(speed, opt);
  auto none = [](double, const PhasePoint&) {};
  ExitTimes e;
  e.forward = trace_ray(speed.model(), R, p, FlowDirection::Forward, step, cap, none);
  e.backward = trace_ray(speed.model(), R, p, FlowDirection::Backward, step, cap, none);
  return e;
}

double boundary_mu(double s, double theta, const SpeedField& speed) {
  // nu = c (cos phi, sin phi) and v = c (cos theta, sin theta) with g = c^-2 id.
  const double phi = s / speed.grid().radius();
  return std::cos(theta - phi);
}

PhasePoint boundary_point(double s, double theta, double radius) {
  const double phi = s / radius;
  return {radius * std::cos(phi), radius * std::sin(phi), theta};
}

std::vector<FanEntry> fan_entries(const SpeedField& speed, int boundary_n, int dir_n, bool outgoing, double margin) {
  const double R = speed.grid().radius();
  const double ds_e = 2 * M_PI * R / boundary_n;
  const double dth = 2 * M_PI / dir_n;
  std::vector<FanEntry> out;
  out.reserve(static_cast<std::size_t>(boundary_n) * dir_n / 2);
  for (int i = 0; i < boundary_n; ++i) {
    const double s = ds_e * i;
    const double phi = s / R;
    const double c = speed.model().eval(R * std::cos(phi), R * std::sin(phi)).c;
    for (int j = 0; j < dir_n; ++j) {
      const double beta = -M_PI + (j + 0.5) * dth;
      const double mu = std::cos(beta);
      if (std::abs(mu) < margin) continue;
      if (outgoing != (mu > 0)) continue;
      double theta = phi + beta;
      theta = std::fmod(theta, 2 * M_PI);
      if (theta < 0) theta += 2 * M_PI;
      // dSigma^2 = ds dtheta with ds the g-arclength.
      out.push_back({i, j, s, theta, mu, ds_e / c * dth});
    }
  }
  return out;
}

namespace {

double fan_ratio_sup(const SpeedField& speed, int boundary_n, int dir_n, const FlowOptions& opt) {
  const double R = speed.grid().radius();
  const double step = resolve_step(speed, opt);
  const double cap = resolve_max_length(speed, opt);
  double sup = 0;
  auto none = [](double, const PhasePoint&) {};
  for (const FanEntry& e : fan_entries(speed, boundary_n, dir_n, false)) {
    const double tau = trace_ray(speed.model(), R, boundary_point(e.s, e.theta, R), FlowDirection::Forward, step, cap, none);
    sup = std::max(sup, tau / std::abs(e.mu));
  }
  return sup;
}

}  // namespace

double convexity_constant(const SpeedField& speed, const DomainSpec& domain, const FlowOptions& opt) {
  const double coarse = fan_ratio_sup(speed, domain.boundary_n, domain.dir_n, opt);
  const double fine = fan_ratio_sup(speed, domain.boundary_n, 4 * domain.dir_n, opt);
  if (!std::isfinite(fine) || fine > 1.5 * coarse)
    throw Unbounded("tau/|mu| grows under direction refinement: boundary is not strictly convex");
  return std::max(coarse, fine);
}

double santalo_integrate(const std::function<double(const PhasePoint&)>& F, const SpeedField& speed,
                         const DomainSpec& domain, const FlowOptions& opt) {
  const double R = speed.grid().radius();
  const double step = resolve_step(speed, opt);
  const double cap = resolve_max_length(speed, opt);
  double total = 0;
  for (const FanEntry& e : fan_entries(speed, domain.boundary_n, domain.dir_n, true)) {
    double acc = 0, prev_t = 0, prev_f = 0;
    bool first = true;
    trace_ray(speed.model(), R, boundary_point(e.s, e.theta, R), FlowDirection::Backward, step, cap,
              [&](double t, const PhasePoint& q) {
                const double fv = F(q);
                if (!first) acc += 0.5 * (fv + prev_f) * (t - prev_t);
                first = false;
                prev_f = fv;
                prev_t = t;
              });
    total += acc * e.mu * e.weight;
  }
  return total;
}

double grid_phase_integral(const std::function<double(const PhasePoint&)>& F, const SpeedField& speed,
                           int theta_samples) {
  const Grid& g = speed.grid();
  double total = 0;
  for (int node : g.mask_nodes()) {
    double acc = 0;
    for (int j = 0; j < theta_samples; ++j)
      acc += F({g.node_x(node), g.node_y(node), 2 * M_PI * j / theta_samples});
    total += acc * (2 * M_PI / theta_samples) * g.area_weight(node) * speed.area_density()[node];
  }
  return total;
}

namespace {

struct JacobiState {
  double x, y, th, J, dJ;
};

JacobiState jacobi_rhs(const SpeedModel& m, const JacobiState& s) {
  const SpeedSample v = m.eval(s.x, s.y);
  const double ct = std::cos(s.th), st = std::sin(s.th);
  return {v.c * ct, v.c * st, -v.cy * ct + v.cx * st, s.dJ, -m.curvature(s.x, s.y) * s.J};
}

JacobiState axpy(const JacobiState& a, double h, const JacobiState& k) {
  return {a.x + h * k.x, a.y + h * k.y, a.th + h * k.th, a.J + h * k.J, a.dJ + h * k.dJ};
}

/// RK4 for the geodesic with its Jacobi field. Calls visit(t, state) per step;
/// returns the final time (t_end or boundary exit).
template <class Visit>
double integrate_jacobi(const SpeedModel& m, double R, const PhasePoint& p, double step, double t_end, Visit&& visit) {
  JacobiState s{p.x, p.y, p.theta, 0.0, 1.0};
  double t = 0;
  while (t < t_end) {
    const double h = std::min(step, t_end - t);
    const JacobiState k1 = jacobi_rhs(m, s);
    const JacobiState k2 = jacobi_rhs(m, axpy(s, 0.5 * h, k1));
    const JacobiState k3 = jacobi_rhs(m, axpy(s, 0.5 * h, k2));
    const JacobiState k4 = jacobi_rhs(m, axpy(s, h, k3));
    JacobiState q{s.x + h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x), s.y + h / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y),
                  s.th + h / 6 * (k1.th + 2 * k2.th + 2 * k3.th + k4.th),
                  s.J + h / 6 * (k1.J + 2 * k2.J + 2 * k3.J + k4.J),
                  s.dJ + h / 6 * (k1.dJ + 2 * k2.dJ + 2 * k3.dJ + k4.dJ)};
    if (q.x * q.x + q.y * q.y >= R * R && t > 0) {
      visit(t + h, q, s, t);
      return t + h;
    }
    visit(t + h, q, s, t);
    s = q;
    t += h;
  }
  return t;
}

}  // namespace

double jacobi_field(const PhasePoint& p, const SpeedField& speed, double t_end, const FlowOptions& opt) {
  double J = 0;
  integrate_jacobi(speed.model(), 1e300, p, resolve_step(speed, opt), t_end,
                   [&](double, const JacobiState& q, const JacobiState&, double) { J = q.J; });
  return J;
}

SimplicityReport simplicity_check(const SpeedField& speed, const DomainSpec& domain, const FlowOptions& opt) {
  SimplicityReport rep;
  const double R = speed.grid().radius();
  const double step = resolve_step(speed, opt);
  const double cap = resolve_max_length(speed, opt);

  rep.min_boundary_curvature = std::numeric_limits<double>::infinity();
  for (int i = 0; i < domain.boundary_n; ++i) {
    const double phi = 2 * M_PI * i / domain.boundary_n;
    const double x = R * std::cos(phi), y = R * std::sin(phi);
    const SpeedSample s = speed.model().eval(x, y);
    const double dr = s.cx * std::cos(phi) + s.cy * std::sin(phi);
    // Geodesic curvature of the circle in g = c^-2 id.
    rep.min_boundary_curvature = std::min(rep.min_boundary_curvature, s.c / R - dr);
  }
  rep.strictly_convex = rep.min_boundary_curvature > 0;

  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.first_conjugate_time = std::numeric_limits<double>::infinity();
  for (const FanEntry& e : fan_entries(speed, domain.boundary_n, domain.dir_n, false)) {
    ++rep.rays;
    const PhasePoint p = boundary_point(e.s, e.theta, R);
    double tau = 0;
    try {
      tau = trace_ray(speed.model(), R, p, FlowDirection::Forward, step, cap, [](double, const PhasePoint&) {});
    } catch (const NonTrapping&) {
      rep.non_trapping = false;
      rep.max_tau = std::numeric_limits<double>::infinity();
      continue;
    }
    rep.max_tau = std::max(rep.max_tau, tau);
    const double ratio = tau / std::abs(e.mu);
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    integrate_jacobi(speed.model(), 1e300, p, step, tau,
                     [&](double t, const JacobiState& q, const JacobiState& prev, double tprev) {
                       if (prev.J > 0 && q.J <= 0) {
                         const double tz = tprev + (t - tprev) * prev.J / (prev.J - q.J);
                         rep.conjugate_points = true;
                         rep.first_conjugate_time = std::min(rep.first_conjugate_time, tz);
                       }
                     });
  }
  if (!rep.conjugate_points) rep.first_conjugate_time = 0;
  return rep;
}

}  // namespace rts
