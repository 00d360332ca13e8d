#include "rts/elliptic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>

#include <Eigen/SparseLU>

#include "rts/errors.hpp"

namespace rts {

namespace {

using SparseR = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using TripletC = Eigen::Triplet<cplx>;

// Factorisations keyed by a description of grid (and speed). Shared between
// callers; entries are never evicted.
template <class T>
class FactorCache {
 public:
  template <class Build>
  std::shared_ptr<const T> get(const std::string& key, Build&& build) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = map_.find(key);
      if (it != map_.end()) return it->second;
    }
    std::shared_ptr<const T> made = build();
    std::lock_guard<std::mutex> lock(mu_);
    return map_.emplace(key, std::move(made)).first->second;
  }

 private:
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<const T>> map_;
};

std::string grid_key(const Grid& g) {
  std::ostringstream os;
  os.precision(17);
  os << g.n() << ':' << g.radius();
  return os.str();
}

std::string speed_key(const SpeedField& s) { return grid_key(s.grid()) + '|' + s.model().describe(); }

double weighted_norm(const Grid& g, const ComplexGrid& f, const SpeedField& s) {
  return norm2(g, f, &s.area_density());
}

// ---- Dirichlet ---------------------------------------------------------------

struct DirichletSolver {
  Eigen::SparseLU<SparseR> lu;
};

// Shortley-Weller Laplacian over mask slots, zero on the circle.
SparseR laplacian_matrix(const Grid& g) {
    const auto& nodes = g.mask_nodes();
    const int M = static_cast<int>(nodes.size());
    std::vector<Triplet> t;
    t.reserve(5 * M);
    const double h = g.h();
    for (int r = 0; r < M; ++r) {
      const int node = nodes[r];
      const int i = g.col(node), j = g.row(node);
      const auto& arm = g.arms(node);
      double diag = 0;
      for (int axis = 0; axis < 2; ++axis) {
        const int di = axis == 0 ? 1 : 0, dj = 1 - di;
        const bool fwd = g.in_mask(i + di, j + dj), bwd = g.in_mask(i - di, j - dj);
        const double hr = fwd ? h : arm[2 * axis], hl = bwd ? h : arm[2 * axis + 1];
        const double s = 2.0 / (hl + hr);
        if (fwd) t.emplace_back(r, g.slot(g.flat(i + di, j + dj)), s / hr);
        if (bwd) t.emplace_back(r, g.slot(g.flat(i - di, j - dj)), s / hl);
        diag -= s / hr + s / hl;
      }
      t.emplace_back(r, r, diag);
    }
    SparseR A(M, M);
    A.setFromTriplets(t.begin(), t.end());
    return A;
}

std::shared_ptr<const DirichletSolver> dirichlet_solver(const Grid& g) {
  static FactorCache<DirichletSolver> cache;
  return cache.get(grid_key(g), [&] {
    auto solver = std::make_shared<DirichletSolver>();
    solver->lu.compute(laplacian_matrix(g));
    if (solver->lu.info() != Eigen::Success) throw IllConditioned("Dirichlet Laplacian factorisation failed");
    return std::shared_ptr<const DirichletSolver>(solver);
  });
}

// ---- Neumann -----------------------------------------------------------------

struct NeumannSystem {
  Eigen::SparseLU<SparseR> lu;
  std::vector<int> ghosts;       // outside neighbours of mask nodes, carried as unknowns
  std::vector<double> ghost_d;   // ghost-to-mirror distance
  int mask_count = 0;
};

// Biquadratic Lagrange weights on the 3 x 3 nodes around a point, optionally
// differentiated along (ex, ey).
struct QuadStencil {
  int nodes[9];
  double w[9];
};

bool quad_stencil(const Grid& g, const std::vector<int>& unknown, double x, double y, const double* dir,
                  QuadStencil& out) {
  const double h = g.h(), R = g.radius();
  const double u = (x + R) / h, v = (y + R) / h;
  int ci = static_cast<int>(std::lround(u)), cj = static_cast<int>(std::lround(v));
  // Shift the centre towards the disk until all nine nodes are unknowns.
  for (int attempt = 0; attempt < 4; ++attempt) {
    ci = std::clamp(ci, 1, g.n() - 2);
    cj = std::clamp(cj, 1, g.n() - 2);
    bool ok = true;
    for (int b = -1; b <= 1 && ok; ++b)
      for (int a = -1; a <= 1 && ok; ++a) ok = unknown[g.flat(ci + a, cj + b)] >= 0;
    if (ok) {
      const double tx = u - ci, ty = v - cj;
      auto L = [](double t, int a) {
        return a == -1 ? 0.5 * t * (t - 1) : a == 0 ? 1 - t * t : 0.5 * t * (t + 1);
      };
      auto dL = [](double t, int a) { return a == -1 ? t - 0.5 : a == 0 ? -2 * t : t + 0.5; };
      int k = 0;
      for (int b = -1; b <= 1; ++b)
        for (int a = -1; a <= 1; ++a, ++k) {
          out.nodes[k] = g.flat(ci + a, cj + b);
          out.w[k] = dir ? (dL(tx, a) * L(ty, b) * dir[0] + L(tx, a) * dL(ty, b) * dir[1]) / h
                         : L(tx, a) * L(ty, b);
        }
      return true;
    }
    ci += ci - (g.n() - 1) / 2 > 0 ? -1 : 1;
    cj += cj - (g.n() - 1) / 2 > 0 ? -1 : 1;
  }
  return false;
}

std::shared_ptr<const NeumannSystem> neumann_system(const SpeedField& speed) {
  static FactorCache<NeumannSystem> cache;
  const Grid& g = speed.grid();
  // The area density enters the constraint row, so the key includes the speed.
  return cache.get(speed_key(speed), [&] {
    auto sys = std::make_shared<NeumannSystem>();
    const double h = g.h(), R = g.radius();
    const auto& nodes = g.mask_nodes();
    const int M = static_cast<int>(nodes.size());
    sys->mask_count = M;
    // Mirrors are interpolated from mask nodes only, so every ghost row is explicit
    // and the ghosts never couple to each other.
    std::vector<int> unknown(g.size(), -1), inside(g.size(), -1);
    for (int s = 0; s < M; ++s) unknown[nodes[s]] = inside[nodes[s]] = s;
    for (int s = 0; s < M; ++s) {
      const int i = g.col(nodes[s]), j = g.row(nodes[s]);
      for (int nb : {g.flat(i + 1, j), g.flat(i - 1, j), g.flat(i, j + 1), g.flat(i, j - 1)})
        if (unknown[nb] < 0) {
          unknown[nb] = M + static_cast<int>(sys->ghosts.size());
          sys->ghosts.push_back(nb);
        }
    }
    const int G = static_cast<int>(sys->ghosts.size());
    const int lam = M + G;
    std::vector<Triplet> t;
    t.reserve(6 * M + 10 * G + M);
    for (int s = 0; s < M; ++s) {
      const int node = nodes[s];
      const int i = g.col(node), j = g.row(node);
      for (int nb : {g.flat(i + 1, j), g.flat(i - 1, j), g.flat(i, j + 1), g.flat(i, j - 1)})
        t.emplace_back(s, unknown[nb], 1.0 / (h * h));
      t.emplace_back(s, s, -4.0 / (h * h));
      t.emplace_back(s, lam, -1.0);
      t.emplace_back(lam, s, g.area_weight(node) * speed.area_density()[node]);
    }
    sys->ghost_d.resize(G);
    for (int q = 0; q < G; ++q) {
      const int node = sys->ghosts[q];
      const int row = M + q;
      const double x = g.node_x(node), y = g.node_y(node), r = std::hypot(x, y);
      // u(ghost) - u(mirror) = d * d_r u at the circle; the mirror sits at 2R - r.
      const double d = 2 * (r - R), mr = 2 * R - r;
      QuadStencil st;
      if (!quad_stencil(g, inside, x / r * mr, y / r * mr, nullptr, st))
        throw Error("Neumann mirror stencil left the disk");
      t.emplace_back(row, row, 1.0);
      for (int k = 0; k < 9; ++k) t.emplace_back(row, inside[st.nodes[k]], -st.w[k]);
      sys->ghost_d[q] = d;
    }
    SparseR A(lam + 1, lam + 1);
    A.setFromTriplets(t.begin(), t.end());
    sys->lu.compute(A);
    if (sys->lu.info() != Eigen::Success) throw IllConditioned("Neumann system factorisation failed");
    return std::shared_ptr<const NeumannSystem>(sys);
  });
}

// ---- drift Poisson for eta_-+ eta_+- -------------------------------------------
//
// For m >= 1, eta_- eta_+ on mode m is c^(2-m) (Delta phi / 4 - 2m (dbar c / c) d phi)
// with phi = c^m v; eta_+ eta_- on mode -m is its conjugate (d and dbar swapped).

struct DriftSolver {
  Eigen::SparseLU<SparseC> lu;
};

std::shared_ptr<const DriftSolver> drift_solver(const SpeedField& speed, int m, int sign) {
  static FactorCache<DriftSolver> cache;
  std::ostringstream key;
  key << speed_key(speed) << '|' << m << ':' << sign;
  return cache.get(key.str(), [&] {
    const Grid& g = speed.grid();
    const auto& nodes = g.mask_nodes();
    const int M = static_cast<int>(nodes.size());
    std::vector<TripletC> t;
    const SparseR L = laplacian_matrix(g);
    for (int k = 0; k < L.outerSize(); ++k)
      for (SparseR::InnerIterator it(L, k); it; ++it) t.emplace_back(it.row(), it.col(), 0.25 * it.value());
    // sign > 0: coefficient -2m dbar(c)/c on d phi; sign < 0: -2m d(c)/c on dbar phi.
    const double sy = sign > 0 ? 1.0 : -1.0;
    for (int r = 0; r < M; ++r) {
      const int node = nodes[r];
      const cplx coef = -2.0 * m * 0.5 * cplx(speed.dcx()[node], sy * speed.dcy()[node]) / speed.c()[node];
      for (int axis = 0; axis < 2; ++axis) {
        const Stencil st = g.derivative_stencil(node, axis, Flavor::ZeroBoundary);
        const cplx f = coef * 0.5 * (axis == 0 ? cplx(1) : cplx(0, -sy));
        for (int q = 0; q < st.count; ++q) t.emplace_back(r, g.slot(st.e[q].node), f * st.e[q].weight);
      }
    }
    SparseC A(M, M);
    A.setFromTriplets(t.begin(), t.end());
    auto solver = std::make_shared<DriftSolver>();
    solver->lu.compute(A);
    if (solver->lu.info() != Eigen::Success) throw IllConditioned("drift Poisson factorisation failed");
    return std::shared_ptr<const DriftSolver>(solver);
  });
}

// Zero-boundary v on mode sign * m solving eta_-+ eta_+- v = r.
ComplexGrid solve_eta_normal(const ComplexGrid& r, int m, int sign, const SpeedField& speed) {
  const Grid& g = speed.grid();
  const auto& nodes = g.mask_nodes();
  VectorC b(nodes.size());
  for (std::size_t s = 0; s < nodes.size(); ++s) b[s] = std::pow(speed.c()[nodes[s]], m - 2) * r[nodes[s]];
  const VectorC phi = drift_solver(speed, m, sign)->lu.solve(b);
  ComplexGrid v(g.size(), cplx(0));
  for (std::size_t s = 0; s < nodes.size(); ++s) v[nodes[s]] = phi[s] * std::pow(speed.c()[nodes[s]], -m);
  return v;
}

}  // namespace

VectorC to_slots(const Grid& g, const ComplexGrid& f) {
  const auto& nodes = g.mask_nodes();
  VectorC v(nodes.size());
  for (std::size_t s = 0; s < nodes.size(); ++s) v[s] = f[nodes[s]];
  return v;
}

ComplexGrid from_slots(const Grid& g, const VectorC& v) {
  ComplexGrid f(g.size(), cplx(0));
  const auto& nodes = g.mask_nodes();
  for (std::size_t s = 0; s < nodes.size(); ++s) f[nodes[s]] = v[s];
  return f;
}

SparseC eta_matrix(int sign, int n, const SpeedField& speed, Flavor flavor) {
  const Grid& g = speed.grid();
  const auto& nodes = g.mask_nodes();
  const int M = static_cast<int>(nodes.size());
  std::vector<TripletC> t;
  t.reserve(7 * M);
  const cplx iy = sign > 0 ? cplx(0, -1) : cplx(0, 1);
  for (int r = 0; r < M; ++r) {
    const int node = nodes[r];
    const double c = speed.c()[node];
    for (int axis = 0; axis < 2; ++axis) {
      const Stencil st = g.derivative_stencil(node, axis, flavor);
      const cplx f = 0.5 * c * (axis == 0 ? cplx(1) : iy);
      for (int k = 0; k < st.count; ++k) t.emplace_back(r, g.slot(st.e[k].node), f * st.e[k].weight);
    }
    const cplx dc = 0.5 * cplx(speed.dcx()[node], sign > 0 ? -speed.dcy()[node] : speed.dcy()[node]);
    t.emplace_back(r, r, sign > 0 ? double(n) * dc : -double(n) * dc);
  }
  SparseC A(M, M);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

ComplexGrid solve_poisson_dirichlet(const ComplexGrid& rhs, const SpeedField& speed) {
  const Grid& g = speed.grid();
  const auto solver = dirichlet_solver(g);
  const auto& nodes = g.mask_nodes();
  Eigen::VectorXd re(nodes.size()), im(nodes.size());
  for (std::size_t s = 0; s < nodes.size(); ++s) {
    const cplx b = rhs[nodes[s]] * speed.area_density()[nodes[s]];
    re[s] = b.real();
    im[s] = b.imag();
  }
  const Eigen::VectorXd xr = solver->lu.solve(re);
  const Eigen::VectorXd xi = im.isZero(0) ? Eigen::VectorXd::Zero(im.size()) : Eigen::VectorXd(solver->lu.solve(im));
  ComplexGrid out(g.size(), cplx(0));
  for (std::size_t s = 0; s < nodes.size(); ++s) out[nodes[s]] = cplx(xr[s], xi[s]);
  return out;
}

NeumannResult solve_poisson_neumann(const ComplexGrid& rhs, const BoundaryData& data, const SpeedField& speed,
                                    double tolerance) {
  const Grid& g = speed.grid();
  const auto sys = neumann_system(speed);
  const int M = sys->mask_count, G = static_cast<int>(sys->ghosts.size());
  const double R = g.radius();
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(M + G + 1);
  const auto& nodes = g.mask_nodes();
  for (int s = 0; s < M; ++s) b[s] = rhs[nodes[s]] * speed.area_density()[nodes[s]];
  for (int q = 0; q < G; ++q) {
    const int node = sys->ghosts[q];
    const double phi = std::atan2(g.node_y(node), g.node_x(node));
    const double c = speed.model().eval(R * std::cos(phi), R * std::sin(phi)).c;
    b[M + q] = sys->ghost_d[q] * data(phi) / c;  // d_r u = d_nu u / c
  }
  Eigen::VectorXd br = b.real(), bi = b.imag();
  const Eigen::VectorXd xr = sys->lu.solve(br);
  const Eigen::VectorXd xi = bi.isZero(0) ? Eigen::VectorXd::Zero(bi.size()) : Eigen::VectorXd(sys->lu.solve(bi));

  NeumannResult res;
  res.u.assign(g.size(), cplx(0));
  for (int s = 0; s < M; ++s) res.u[nodes[s]] = cplx(xr[s], xi[s]);
  res.multiplier = std::abs(cplx(xr[M + G], xi[M + G]));

  // Green: int Delta_g u dA_g = oint d_nu u ds_g.
  cplx vol = 0, surf = 0;
  double vol_abs = 0, surf_abs = 0;
  for (int node : nodes) {
    const cplx v = rhs[node] * g.area_weight(node) * speed.area_density()[node];
    vol += v;
    vol_abs += std::abs(v);
  }
  const int B = 8 * g.n();
  for (int k = 0; k < B; ++k) {
    const double phi = 2 * M_PI * k / B;
    const double c = speed.model().eval(R * std::cos(phi), R * std::sin(phi)).c;
    const cplx v = data(phi) * (2 * M_PI * R / B) / c;
    surf += v;
    surf_abs += std::abs(v);
  }
  const double scale = vol_abs + surf_abs;
  res.defect = scale > 0 ? std::abs(vol - surf) / scale : 0.0;
  res.compatible = res.defect <= tolerance;
  return res;
}

DbarResult solve_dbar_dirichlet(int k, const ComplexGrid& h_next, const SpeedField& speed, int sign) {
  if (k < 0) throw InvalidArgument("solve_dbar_dirichlet: k must be non-negative");
  const Grid& g = speed.grid();
  const auto& c = speed.c();
  ComplexGrid ch(g.size(), cplx(0));
  for (int node : g.mask_nodes()) ch[node] = std::pow(c[node], k - 1) * h_next[node];
  // Delta_g (c^k p) = 4 c^2 dbar(c^{k-1} h) for the + component, d(...) for the - one.
  ComplexGrid rhs = wirtinger(g, ch, sign > 0, Flavor::Free);
  for (int node : g.mask_nodes()) rhs[node] *= 4 * c[node] * c[node];
  ComplexGrid p = solve_poisson_dirichlet(rhs, speed);
  for (int node : g.mask_nodes()) p[node] *= std::pow(c[node], -k);

  DbarResult out;
  const ComplexGrid back = apply_eta(sign > 0 ? +1 : -1, sign > 0 ? k : -k, p, speed, Flavor::ZeroBoundary);
  ComplexGrid diff(g.size(), cplx(0));
  for (int node : g.mask_nodes()) diff[node] = back[node] - h_next[node];
  const double nh = weighted_norm(g, h_next, speed);
  out.residual = nh > 0 ? weighted_norm(g, diff, speed) / nh : 0.0;
  out.p = std::move(p);
  return out;
}

HodgeResult hodge_decompose(const FiberField& f1, const SpeedField& speed) {
  const Grid& g = f1.grid();
  const ComplexGrid& u1 = f1.mode_or_zero(1);
  const ComplexGrid& um = f1.mode_or_zero(-1);
  // Mode 1 is c d(f0 - i fperp) = eta_+ alpha, mode -1 is c dbar(f0 + i fperp) = eta_- beta;
  // on mode 0 eta_- eta_+ = eta_+ eta_- = Delta_g / 4.
  ComplexGrid ra = apply_eta(-1, 1, u1, speed), rb = apply_eta(+1, -1, um, speed);
  for (auto& v : ra) v *= 4.0;
  for (auto& v : rb) v *= 4.0;
  const ComplexGrid alpha = solve_poisson_dirichlet(ra, speed), beta = solve_poisson_dirichlet(rb, speed);
  const ComplexGrid ea = apply_eta(+1, 0, alpha, speed, Flavor::ZeroBoundary);
  const ComplexGrid eb = apply_eta(-1, 0, beta, speed, Flavor::ZeroBoundary);

  HodgeResult res;
  res.f0.assign(g.size(), cplx(0));
  res.fperp.assign(g.size(), cplx(0));
  for (int node : g.mask_nodes()) {
    res.f0[node] = 0.5 * (alpha[node] + beta[node]);
    res.fperp[node] = (beta[node] - alpha[node]) / cplx(0, 2);
  }
  res.omega = FiberField(f1.grid_ptr(), 1, f1.real());
  res.omega.mode(1) = u1;
  res.omega.mode(-1) = um;
  for (int node : g.mask_nodes()) {
    res.omega.mode(1)[node] -= ea[node];
    res.omega.mode(-1)[node] -= eb[node];
  }

  FiberField f0(f1.grid_ptr(), 0, f1.real()), fp(f1.grid_ptr(), 0, f1.real());
  f0.mode(0) = res.f0;
  fp.mode(0) = res.fperp;
  FiberField rec = apply_X_modes(f0, speed, Flavor::ZeroBoundary) + apply_X_perp_modes(fp, speed, Flavor::ZeroBoundary);
  rec += res.omega;
  const FiberField target = f1.with_degree(1);
  const double nf = l2_norm(target, speed);
  res.recomposition = nf > 0 ? l2_norm(rec - target, speed) / nf : 0.0;

  auto xminus = [&](const FiberField& u) {
    const ComplexGrid a = apply_eta(-1, 1, u.mode(1), speed), b = apply_eta(+1, -1, u.mode(-1), speed);
    ComplexGrid s(g.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = a[i] + b[i];
    return std::array<double, 3>{weighted_norm(g, s, speed), weighted_norm(g, a, speed), weighted_norm(g, b, speed)};
  };
  const auto ro = xminus(res.omega), rf = xminus(target);
  res.xminus_residual = rf[0] > 0 ? ro[0] / rf[0] : 0.0;
  res.eta_residual = rf[1] + rf[2] > 0 ? (ro[1] + ro[2]) / (rf[1] + rf[2]) : 0.0;
  return res;
}

SolenoidalResult solenoidal_project(const FiberField& u, int k, const SpeedField& speed) {
  if (k < 1) throw InvalidArgument("solenoidal_project: k must be at least 1");
  const Grid& g = u.grid();
  const VectorC up = to_slots(g, u.mode_or_zero(k)), um = to_slots(g, u.mode_or_zero(-k));

  SolenoidalResult res;
  res.v = FiberField(u.grid_ptr(), k - 1, u.real());
  res.g = FiberField(u.grid_ptr(), k, u.real());
  FiberField Xv(u.grid_ptr(), k, u.real());
  if (k == 1) {
    // (eta_- eta_+ + eta_+ eta_-) on mode 0 is Delta_g / 2.
    ComplexGrid r = apply_eta(-1, 1, u.mode_or_zero(1), speed);
    const ComplexGrid rm = apply_eta(+1, -1, u.mode_or_zero(-1), speed);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = 2.0 * (r[i] + rm[i]);
    res.v.mode(0) = solve_poisson_dirichlet(r, speed);
    Xv.mode(1) = apply_eta(+1, 0, res.v.mode(0), speed, Flavor::ZeroBoundary);
    Xv.mode(-1) = apply_eta(-1, 0, res.v.mode(0), speed, Flavor::ZeroBoundary);
  } else {
    const int m = k - 1;
    res.v.mode(m) = solve_eta_normal(apply_eta(-1, k, u.mode_or_zero(k), speed), m, +1, speed);
    res.v.mode(-m) = solve_eta_normal(apply_eta(+1, -k, u.mode_or_zero(-k), speed), m, -1, speed);
    Xv.mode(k) = apply_eta(+1, m, res.v.mode(m), speed, Flavor::ZeroBoundary);
    Xv.mode(-k) = apply_eta(-1, -m, res.v.mode(-m), speed, Flavor::ZeroBoundary);
  }
  // One-dimensional Ritz step: rescale v so that X_+ v is exactly orthogonal to u - X_+ v.
  {
    FiberField uk(u.grid_ptr(), k, u.real());
    uk.mode(k) = u.mode_or_zero(k);
    uk.mode(-k) = u.mode_or_zero(-k);
    const double nx = l2_norm(Xv, speed);
    const cplx scale = nx > 0 ? l2_inner(uk, Xv, speed) / (nx * nx) : cplx(1);
    // The step is a small correction of a consistent solve; a scale far from 1
    // means X_+ v is discretisation noise (u nearly in the kernel), left as is.
    if (std::abs(scale - 1.0) <= 0.5) {
      const cplx s = u.real() ? cplx(scale.real()) : scale;
      for (int n = -(k - 1); n <= k - 1; ++n)
        if (res.v.has_mode(n)) for (auto& x : res.v.mode(n)) x *= s;
      for (int n : {k, -k}) for (auto& x : Xv.mode(n)) x *= s;
    }
  }
  res.g.mode(k) = from_slots(g, up);
  res.g.mode(-k) = from_slots(g, um);
  res.g -= Xv;

  const double nu = l2_norm(res.g + Xv, speed);
  res.orthogonality = nu > 0 ? std::abs(l2_inner(Xv, res.g, speed)) / (nu * nu) : 0.0;

  auto xminus = [&](const FiberField& f) {
    const ComplexGrid a = apply_eta(-1, k, f.mode(k), speed), b = apply_eta(+1, -k, f.mode(-k), speed);
    if (k == 1) {
      ComplexGrid s(g.size());
      for (std::size_t i = 0; i < s.size(); ++i) s[i] = a[i] + b[i];
      return weighted_norm(g, s, speed);
    }
    return std::hypot(weighted_norm(g, a, speed), weighted_norm(g, b, speed));
  };
  const double ru = xminus(res.g + Xv);
  res.kernel_residual = ru > 0 ? xminus(res.g) / ru : 0.0;
  return res;
}

}  // namespace rts
