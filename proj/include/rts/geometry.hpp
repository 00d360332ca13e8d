// Isothermal geometry g = c^-2 id on a disk: speed families, geodesic flow,
// exit times, boundary fans and the convexity / Santalo / simplicity tools.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "rts/errors.hpp"
#include "rts/grid.hpp"

namespace rts {

/// Value and gradient of the speed at one point.
struct SpeedSample {
  double c, cx, cy;
};

/// Analytic speed families: constant c0; radial bump c0 + eps exp(-|x|^2/s^2);
/// gaussian c0 exp(-alpha |x|^2).
struct SpeedModel {
  enum class Family { Constant, Bump, Gaussian };
  Family family = Family::Constant;
  double c0 = 1.0;
  double eps = 0.0;
  double width = 1.0;
  double alpha = 0.0;

  static SpeedModel constant(double c0 = 1.0) { return {Family::Constant, c0, 0, 1, 0}; }
  static SpeedModel bump(double eps, double width, double c0 = 1.0) {
    return {Family::Bump, c0, eps, width, 0};
  }
  static SpeedModel gaussian(double alpha, double c0 = 1.0) { return {Family::Gaussian, c0, 0, 1, alpha}; }

  SpeedSample eval(double x, double y) const {
    switch (family) {
      case Family::Constant:
        return {c0, 0, 0};
      case Family::Bump: {
        const double s2 = width * width;
        const double e = eps * std::exp(-(x * x + y * y) / s2);
        return {c0 + e, -2 * x / s2 * e, -2 * y / s2 * e};
      }
      case Family::Gaussian: {
        const double c = c0 * std::exp(-alpha * (x * x + y * y));
        return {c, -2 * alpha * x * c, -2 * alpha * y * c};
      }
    }
    return {c0, 0, 0};
  }
  /// Flat Laplacian of c.
  double laplacian(double x, double y) const;
  /// Gaussian curvature c * lap(c) - |grad c|^2 (= c^2 lap log c).
  double curvature(double x, double y) const;
  std::string describe() const;
  bool is_constant() const { return family == Family::Constant; }
};

/// Speed on a grid: the analytic model plus node caches of c, grad c and kappa.
class SpeedField {
 public:
  SpeedField(GridPtr grid, SpeedModel model);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const SpeedModel& model() const { return model_; }
  const RealGrid& c() const { return c_; }
  const RealGrid& dcx() const { return dcx_; }
  const RealGrid& dcy() const { return dcy_; }
  const RealGrid& kappa() const { return kappa_; }
  /// c^-2, the density of the Riemannian area against dx.
  const RealGrid& area_density() const { return inv_c2_; }
  double c_min() const { return cmin_; }
  double c_max() const { return cmax_; }
  /// Geodesic integration step: 0.4 h / max c.
  double default_step() const { return 0.4 * grid_->h() / cmax_; }

 private:
  GridPtr grid_;
  SpeedModel model_;
  RealGrid c_, dcx_, dcy_, kappa_, inv_c2_;
  double cmin_ = 0, cmax_ = 0;
};

/// (x, y, theta) with unit vector v = c(x) (cos theta, sin theta).
struct PhasePoint {
  double x = 0, y = 0, theta = 0;
};

enum class FlowDirection { Forward, Backward };

struct FlowOptions {
  double step = 0;        // 0 selects SpeedField::default_step()
  double max_length = 0;  // 0 selects 50 R / c_min
};

/// Discretised geodesic from a start point to the boundary.
struct GeodesicPath {
  std::vector<PhasePoint> points;
  std::vector<double> times;        // signed flow time of each point
  std::vector<double> attenuation;  // accumulated integral of a from the start
  double step = 0;
  double tau_forward = 0, tau_backward = 0;
};

namespace detail {

// State (x, y, cos theta, sin theta); the direction is kept as a unit vector so
// the stages need no trigonometry.
inline void flow_rhs(const SpeedModel& m, const double s[4], double sign, double out[4]) {
  const SpeedSample v = m.eval(s[0], s[1]);
  const double w = sign * (-v.cy * s[2] + v.cx * s[3]);
  out[0] = sign * v.c * s[2];
  out[1] = sign * v.c * s[3];
  out[2] = -w * s[3];
  out[3] = w * s[2];
}

}  // namespace detail

/// Position and unit direction of a ray sample.
struct RayPoint {
  double x, y, ct, st;
};

/// Integrate the geodesic flow from `p` with RK4 until the boundary circle.
/// `visit(t, ray_point)` is called at t = 0, after every step, and at the exit
/// point interpolated linearly onto the circle; t is the non-negative elapsed
/// time. Returns the exit time. Throws NonTrapping past max_length.
template <class Visitor>
double trace_ray_vec(const SpeedModel& model, double radius, const PhasePoint& p0, FlowDirection dir, double step,
                     double max_length, Visitor&& visit) {
  const double sign = dir == FlowDirection::Forward ? 1.0 : -1.0;
  const double R2 = radius * radius;
  double s[4] = {p0.x, p0.y, std::cos(p0.theta), std::sin(p0.theta)};
  visit(0.0, RayPoint{s[0], s[1], s[2], s[3]});
  {
    const double r2 = s[0] * s[0] + s[1] * s[1];
    const double out = sign * (s[0] * s[2] + s[1] * s[3]);
    if (r2 >= R2 * (1.0 - 1e-12) && out >= 0) return 0.0;
  }
  const bool straight = model.is_constant();
  double t = 0;
  double k1[4], k2[4], k3[4], k4[4], tmp[4], q[4];
  while (true) {
    if (t > max_length) throw NonTrapping("geodesic exceeded the path-length cap");
    const double h = step;
    if (straight) {
      q[0] = s[0] + h * sign * model.c0 * s[2];
      q[1] = s[1] + h * sign * model.c0 * s[3];
      q[2] = s[2];
      q[3] = s[3];
    } else {
      detail::flow_rhs(model, s, sign, k1);
      for (int i = 0; i < 4; ++i) tmp[i] = s[i] + 0.5 * h * k1[i];
      detail::flow_rhs(model, tmp, sign, k2);
      for (int i = 0; i < 4; ++i) tmp[i] = s[i] + 0.5 * h * k2[i];
      detail::flow_rhs(model, tmp, sign, k3);
      for (int i = 0; i < 4; ++i) tmp[i] = s[i] + h * k3[i];
      detail::flow_rhs(model, tmp, sign, k4);
      for (int i = 0; i < 4; ++i) q[i] = s[i] + h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      const double nv = 1.0 / std::hypot(q[2], q[3]);
      q[2] *= nv;
      q[3] *= nv;
    }
    const double r2 = q[0] * q[0] + q[1] * q[1];
    if (r2 >= R2) {
      // Linear back-tracking of the last step onto the circle.
      const double dx = q[0] - s[0], dy = q[1] - s[1];
      const double A = dx * dx + dy * dy;
      const double B = 2 * (s[0] * dx + s[1] * dy);
      const double C = s[0] * s[0] + s[1] * s[1] - R2;
      double f = 1.0;
      if (A > 0) {
        const double disc = std::max(0.0, B * B - 4 * A * C);
        f = std::clamp((-B + std::sqrt(disc)) / (2 * A), 0.0, 1.0);
      }
      double ex = s[2] + f * (q[2] - s[2]), ey = s[3] + f * (q[3] - s[3]);
      const double ne = 1.0 / std::hypot(ex, ey);
      t += f * h;
      visit(t, RayPoint{s[0] + f * dx, s[1] + f * dy, ex * ne, ey * ne});
      return t;
    }
    t += h;
    for (int i = 0; i < 4; ++i) s[i] = q[i];
    visit(t, RayPoint{s[0], s[1], s[2], s[3]});
  }
}

/// trace_ray_vec with phase points; theta is unwrapped continuously from the start.
template <class Visitor>
double trace_ray(const SpeedModel& model, double radius, PhasePoint p, FlowDirection dir, double step,
                 double max_length, Visitor&& visit) {
  double prev = p.theta;
  return trace_ray_vec(model, radius, p, dir, step, max_length, [&](double t, const RayPoint& r) {
    const double th = prev + std::remainder(std::atan2(r.st, r.ct) - prev, 2 * M_PI);
    prev = th;
    visit(t, PhasePoint{r.x, r.y, th});
  });
}

// ---- operations -------------------------------------------------------------

/// kappa = c^2 (d_xx + d_yy) log c by central differences of log c at mask nodes.
RealGrid curvature(const SpeedField& speed);

double resolve_step(const SpeedField& speed, const FlowOptions& opt);
double resolve_max_length(const SpeedField& speed, const FlowOptions& opt);

/// Path from `p` to the boundary; attenuation accumulates the integral of `a`
/// (bilinear on the grid) when provided.
GeodesicPath flow(const PhasePoint& p, const SpeedField& speed, FlowDirection dir, const FlowOptions& opt = {},
                  const RealGrid* attenuation = nullptr);

struct ExitTimes {
  double forward, backward;
};
/// tau(x, v) and tau(x, -v).
ExitTimes exit_time(const PhasePoint& p, const SpeedField& speed, const FlowOptions& opt = {});

/// mu = g(nu, v) at the boundary point with Euclidean arclength s.
double boundary_mu(double s, double theta, const SpeedField& speed);

/// Boundary phase point (arclength s, angle theta).
PhasePoint boundary_point(double s, double theta, double radius);

/// Half-width of the excluded glancing set: |mu| below this is not sampled.
inline constexpr double kGlancingMargin = 1e-3;

/// One sample of a boundary fan with its quadrature weight mu-free dSigma^2.
struct FanEntry {
  int arc_index, dir_index;
  double s, theta, mu, weight;
};

/// Non-glancing fan samples on Gamma_+ (outgoing = true) or Gamma_-, arc-major.
/// Directions are offset half a cell from the normal so none is exactly glancing.
std::vector<FanEntry> fan_entries(const SpeedField& speed, int boundary_n, int dir_n, bool outgoing,
                                  double margin = kGlancingMargin);

/// sup over Gamma_- of tau / |mu|. Throws Unbounded if the estimate keeps
/// growing when the direction sampling is refined.
double convexity_constant(const SpeedField& speed, const DomainSpec& domain, const FlowOptions& opt = {});

/// Integral over SM of F via the fan parametrisation of Gamma_+.
double santalo_integrate(const std::function<double(const PhasePoint&)>& F, const SpeedField& speed,
                         const DomainSpec& domain, const FlowOptions& opt = {});

/// Direct quadrature of F c^-2 dx dtheta on the grid (theta_samples equispaced).
double grid_phase_integral(const std::function<double(const PhasePoint&)>& F, const SpeedField& speed,
                           int theta_samples);

/// Solution J(t_end) of J'' + kappa J = 0, J(0) = 0, J'(0) = 1 along the forward
/// geodesic from p (stops at the boundary if reached first).
double jacobi_field(const PhasePoint& p, const SpeedField& speed, double t_end, const FlowOptions& opt = {});

struct SimplicityReport {
  double max_tau = 0;
  bool non_trapping = true;
  double min_ratio = 0, max_ratio = 0;    // tau / |mu| over Gamma_-
  double min_boundary_curvature = 0;      // geodesic curvature of the circle
  bool strictly_convex = true;
  bool conjugate_points = false;
  double first_conjugate_time = 0;        // smallest t with J(t) = 0, if any
  int rays = 0;
  bool simple() const { return non_trapping && strictly_convex && !conjugate_points; }
};

/// Non-trapping, strict convexity and conjugate-point diagnostics over the fan.
SimplicityReport simplicity_check(const SpeedField& speed, const DomainSpec& domain, const FlowOptions& opt = {});

}  // namespace rts
