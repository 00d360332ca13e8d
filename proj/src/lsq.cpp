// Least-squares Step 1: fit h = h0 + X_perp h_perp + sum_k h_k to fan data over
// smooth global bases, with Tikhonov damping on the Jacobi-scaled normal matrix.
#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "rts/errors.hpp"
#include "rts/reconstruction.hpp"

namespace rts {

namespace {

// Legendre values and derivatives P_0..P_n at t.
void legendre(int n, double t, std::vector<double>& p, std::vector<double>& dp) {
  p.assign(n + 1, 0.0);
  dp.assign(n + 1, 0.0);
  p[0] = 1;
  if (n >= 1) {
    p[1] = t;
    dp[1] = 1;
  }
  for (int k = 1; k < n; ++k) {
    p[k + 1] = ((2 * k + 1) * t * p[k] - k * p[k - 1]) / (k + 1);
    dp[k + 1] = dp[k - 1] + (2 * k + 1) * p[k];
  }
}

// Column layout: [h0: P_a P_b | h_perp: (1 - r^2) P_a P_b | H_k: Re, Im of c^k z^j].
class Basis {
 public:
  Basis(int degree, int m, int terms, double radius) : P_(degree), m_(m), J_(terms), R_(radius) {
    for (int a = 0; a <= P_; ++a)
      for (int b = 0; a + b <= P_; ++b) ab_.emplace_back(a, b);
  }

  int poly() const { return static_cast<int>(ab_.size()); }
  int cols() const { return 2 * poly() + 2 * m_ * J_; }

  // Every basis function at the phase point (x, y, theta).
  void sample(double x, double y, double ct, double st, const SpeedModel& model, double* row) const {
    const double u = x / R_, v = y / R_;
    legendre(P_, u, pu_, du_);
    legendre(P_, v, pv_, dv_);
    const SpeedSample s = model.eval(x, y);
    const double bub = 1 - u * u - v * v;
    const int Q = poly();
    for (int q = 0; q < Q; ++q) {
      const auto [a, b] = ab_[q];
      const double f = pu_[a] * pv_[b];
      const double hx = (-2 * u * f + bub * du_[a] * pv_[b]) / R_;
      const double hy = (-2 * v * f + bub * pu_[a] * dv_[b]) / R_;
      row[q] = f;
      row[Q + q] = s.c * (hx * st - hy * ct);  // X_perp h = 2 Re(-i c dh e^{i theta})
    }
    const cplx z(x, y), e(ct, st);
    double* hk = row + 2 * Q;
    for (int k = 1; k <= m_; ++k) {
      cplx w = std::pow(s.c, k) * std::pow(e, k);
      for (int j = 0; j < J_; ++j, w *= z) {
        const int col = 2 * ((k - 1) * J_ + j);
        hk[col] = 2 * w.real();
        hk[col + 1] = -2 * w.imag();
      }
    }
  }

  GaugeRepresentative unpack(const Eigen::VectorXd& x, const SpeedField& speed) const {
    const Grid& g = speed.grid();
    GaugeRepresentative h = GaugeRepresentative::zero(speed.grid_ptr(), m_, true);
    const int Q = poly();
    for (int node : g.mask_nodes()) {
      const double px = g.node_x(node), py = g.node_y(node), u = px / R_, v = py / R_;
      legendre(P_, u, pu_, du_);
      legendre(P_, v, pv_, dv_);
      double h0 = 0, hp = 0;
      for (int q = 0; q < Q; ++q) {
        const double f = pu_[ab_[q].first] * pv_[ab_[q].second];
        h0 += x[q] * f;
        hp += x[Q + q] * f;
      }
      h.h0[node] = h0;
      h.h_perp[node] = hp * (1 - u * u - v * v);
      const double c = speed.c()[node];
      const cplx z(px, py);
      for (int k = 1; k <= m_; ++k) {
        cplx w = std::pow(c, k), acc = 0;
        for (int j = 0; j < J_; ++j, w *= z) {
          const int col = 2 * Q + 2 * ((k - 1) * J_ + j);
          acc += cplx(x[col], x[col + 1]) * w;
        }
        h.h_k[k - 1].mode(k)[node] = acc;
        h.h_k[k - 1].mode(-k)[node] = std::conj(acc);
      }
    }
    return h;
  }

 private:
  int P_, m_, J_;
  double R_;
  std::vector<std::pair<int, int>> ab_;
  mutable std::vector<double> pu_, du_, pv_, dv_;
};

// Row i holds the attenuated ray integrals of every basis function, with the
// trapezoid rule and attenuation interpolation of the transport module.
Eigen::MatrixXd design(const BoundaryFan& fan, const OpticalParams& params, const SpeedField& speed,
                       const Basis& basis, const FlowOptions& flow) {
  const Grid& g = speed.grid();
  const RealGrid a = extend(g, params.a);
  const double step = resolve_step(speed, flow), cap = resolve_max_length(speed, flow);
  const double h = g.h(), R = g.radius();
  const int rows = static_cast<int>(fan.size()), cols = basis.cols();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, cols);
  auto atten = [&](double x, double y) {
    const double u = (x + R) / h, v = (y + R) / h;
    const int i = std::clamp(static_cast<int>(std::floor(u)), 0, g.n() - 2);
    const int j = std::clamp(static_cast<int>(std::floor(v)), 0, g.n() - 2);
    const double fx = u - i, fy = v - j;
    const int b = g.flat(i, j), n = g.n();
    return (1 - fy) * ((1 - fx) * a[b] + fx * a[b + 1]) + fy * ((1 - fx) * a[b + n] + fx * a[b + n + 1]);
  };
  std::vector<double> cur(cols), prev(cols);
  for (int i = 0; i < rows; ++i) {
    const FanEntry& e = fan.entries[i];
    double A_int = 0, prev_a = 0, prev_t = 0;
    bool first = true;
    trace_ray_vec(speed.model(), R, boundary_point(e.s, e.theta, R), FlowDirection::Backward, step, cap,
                  [&](double t, const RayPoint& p) {
                    const double av = atten(p.x, p.y);
                    if (!first) A_int += 0.5 * (prev_a + av) * (t - prev_t);
                    basis.sample(p.x, p.y, p.ct, p.st, speed.model(), cur.data());
                    const double ea = std::exp(-A_int);
                    for (double& v : cur) v *= ea;
                    if (!first)
                      for (int c = 0; c < cols; ++c) A(i, c) += 0.5 * (prev[c] + cur[c]) * (t - prev_t);
                    std::swap(cur, prev);
                    first = false;
                    prev_t = t;
                    prev_a = av;
                  });
  }
  return A;
}

}  // namespace

GaugeRepresentative recover_lsq(const BoundaryFan& data, const OpticalParams& params, const SpeedField& speed,
                                const RecoverOptions& opt, int m, RecoverReport* report) {
  const Grid& g = speed.grid();
  if (!params.real_kernel(g)) throw InvalidArgument("lsq backend supports real kernels only");
  double imag = 0, total = 0;
  for (const cplx& v : data.values) {
    imag = std::max(imag, std::abs(v.imag()));
    total = std::max(total, std::abs(v));
  }
  if (imag > 1e-8 * std::max(total, 1e-300)) throw InvalidArgument("lsq backend supports real data only");
  if (opt.polynomial_degree < 0 || opt.holomorphic_terms < 1)
    throw InvalidArgument("lsq basis sizes must be positive");

  const Basis basis(opt.polynomial_degree, m, opt.holomorphic_terms, g.radius());
  Eigen::MatrixXd A = design(data, params, speed, basis, opt.flow);
  const int R = static_cast<int>(A.rows()), N = basis.cols();
  Eigen::VectorXd d(R);
  for (int i = 0; i < R; ++i) {
    const double w = std::sqrt(data.entries[i].weight);
    A.row(i) *= w;
    d[i] = w * data.values[i].real();
  }

  // Normal matrix in unit-diagonal variables so the damping treats every block alike.
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(N, N);
  G.selfadjointView<Eigen::Lower>().rankUpdate(A.transpose());
  G = G.selfadjointView<Eigen::Lower>();
  Eigen::VectorXd scale(N);
  for (int c = 0; c < N; ++c) scale[c] = G(c, c) > 0 ? 1.0 / std::sqrt(G(c, c)) : 0.0;
  G = scale.asDiagonal() * G * scale.asDiagonal();
  const Eigen::VectorXd b = scale.cwiseProduct(A.transpose() * d);

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double lmax = ev.maxCoeff(), lmin = std::max(ev.minCoeff(), 0.0);
  RecoverReport rep;
  rep.unknowns = N;
  rep.condition = lmin > 0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  rep.lambda = opt.tikhonov * lmax;
  if (rep.condition > opt.condition_cap)
    throw IllConditioned("lsq normal matrix condition " + std::to_string(rep.condition) + " exceeds the cap");
  const Eigen::VectorXd proj = eig.eigenvectors().transpose() * b;
  const Eigen::VectorXd coef =
      eig.eigenvectors() * (proj.array() / (ev.array().max(0.0) + rep.lambda)).matrix();
  const Eigen::VectorXd x = scale.cwiseProduct(coef);

  const double dn = d.norm();
  rep.residual = dn > 0 ? (A * x - d).norm() / dn : 0.0;
  if (report) *report = rep;
  return basis.unpack(x, speed);
}

}  // namespace rts
