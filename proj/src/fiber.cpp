#include "rts/fiber.hpp"

#include <algorithm>
#include <cmath>

#include "rts/errors.hpp"

namespace rts {

namespace {

const ComplexGrid& empty_grid(const Grid& g) {
  thread_local ComplexGrid z;
  if (z.size() != g.size()) z.assign(g.size(), cplx(0));
  return z;
}

void require_same_grid(const FiberField& a, const FiberField& b) {
  if (a.grid_ptr() != b.grid_ptr() && a.grid().size() != b.grid().size())
    throw InvalidArgument("fiber fields live on different grids");
}

}  // namespace

FiberField::FiberField(GridPtr grid, int degree, bool real)
    : grid_(std::move(grid)), degree_(degree), real_(real) {
  if (degree < 0) throw InvalidArgument("fiber field degree must be non-negative");
  modes_.assign(2 * degree + 1, ComplexGrid(grid_->size(), cplx(0)));
}

const ComplexGrid& FiberField::mode_or_zero(int n) const {
  return has_mode(n) ? mode(n) : empty_grid(*grid_);
}

double FiberField::grid_energy() const {
  double e = 0;
  for (const auto& m : modes_) e += std::pow(norm2(*grid_, m), 2);
  return e;
}

int FiberField::numerical_degree(double rel_tol) const {
  const double total = std::sqrt(grid_energy());
  if (total == 0) return 0;
  for (int n = degree_; n > 0; --n) {
    const double e = std::max(norm2(*grid_, mode(n)), norm2(*grid_, mode(-n)));
    if (e > rel_tol * total) return n;
  }
  return 0;
}

void FiberField::trim(double rel_tol) { *this = with_degree(numerical_degree(rel_tol)); }

FiberField FiberField::with_degree(int N) const {
  FiberField out(grid_, N, real_);
  for (int n = -std::min(N, degree_); n <= std::min(N, degree_); ++n) out.mode(n) = mode(n);
  return out;
}

FiberField FiberField::band(int lo, int hi) const {
  FiberField out(grid_, degree_, real_);
  for (int n = -degree_; n <= degree_; ++n)
    if (std::abs(n) >= lo && std::abs(n) <= hi) out.mode(n) = mode(n);
  return out;
}

FiberField& FiberField::operator+=(const FiberField& o) {
  require_same_grid(*this, o);
  if (o.degree_ > degree_) *this = with_degree(o.degree_);
  for (int n = -o.degree_; n <= o.degree_; ++n) {
    auto& dst = mode(n);
    const auto& src = o.mode(n);
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
  real_ = real_ && o.real_;
  return *this;
}

FiberField& FiberField::operator-=(const FiberField& o) {
  require_same_grid(*this, o);
  if (o.degree_ > degree_) *this = with_degree(o.degree_);
  for (int n = -o.degree_; n <= o.degree_; ++n) {
    auto& dst = mode(n);
    const auto& src = o.mode(n);
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] -= src[k];
  }
  real_ = real_ && o.real_;
  return *this;
}

FiberField& FiberField::operator*=(cplx s) {
  for (auto& m : modes_)
    for (auto& v : m) v *= s;
  if (s.imag() != 0) real_ = false;
  return *this;
}

// ---- optical parameters -------------------------------------------------------

bool OpticalParams::real_kernel(const Grid& g) const {
  const int m = m_k();
  for (int n = 1; n <= m; ++n)
    for (int node : g.mask_nodes())
      if (std::abs(k(n)[node] - std::conj(k(-n)[node])) > 1e-12 * (1 + std::abs(k(n)[node]))) return false;
  for (int node : g.mask_nodes())
    if (std::abs(k(0)[node].imag()) > 1e-12) return false;
  return true;
}

RealGrid OpticalParams::sigma_a(const Grid& g) const {
  RealGrid s(g.size(), 0.0);
  for (int node : g.mask_nodes()) s[node] = a[node] - k(0)[node].real();
  return s;
}

OpticalParams OpticalParams::constant(const Grid& g, double a, const std::vector<cplx>& k_nonneg, double delta) {
  OpticalParams p;
  p.delta = delta;
  p.a.assign(g.size(), 0.0);
  for (int node : g.mask_nodes()) p.a[node] = a;
  const int m = std::max<int>(0, static_cast<int>(k_nonneg.size()) - 1);
  p.k_modes.assign(2 * m + 1, ComplexGrid(g.size(), cplx(0)));
  for (int n = 0; n <= m; ++n) {
    const cplx v = n < static_cast<int>(k_nonneg.size()) ? k_nonneg[n] : cplx(0);
    for (int node : g.mask_nodes()) {
      p.k_modes[m + n][node] = v;
      p.k_modes[m - n][node] = n == 0 ? v : std::conj(v);
    }
  }
  return p;
}

void check_admissible(const Grid& g, const OpticalParams& p) {
  const int m = p.m_k();
  const int J = 4 * m + 1;
  for (int node : g.mask_nodes()) {
    if (p.a[node] < 0) throw InvalidArgument("attenuation must be non-negative");
    for (int j = 0; j < J; ++j) {
      const double th = 2 * M_PI * j / J;
      cplx v = 0;
      for (int n = -m; n <= m; ++n) v += p.k(n)[node] * std::polar(1.0, n * th);
      if (v.real() < -1e-12) throw InvalidArgument("scattering kernel is negative at some angle (not admissible)");
    }
    if (p.a[node] - p.k(0)[node].real() < p.delta * (1 - 1e-12))
      throw InvalidArgument("subcriticality violated: a - k0 < delta");
  }
}

// ---- sampling -----------------------------------------------------------------

PhaseSamples synthesize(const FiberField& u, int theta_samples) {
  if (theta_samples <= 2 * u.degree())
    throw AliasError("theta_samples must exceed twice the field degree");
  const Grid& g = u.grid();
  PhaseSamples s{u.grid_ptr(), theta_samples, std::vector<cplx>(g.size() * theta_samples, cplx(0))};
  const int N = u.degree();
  std::vector<cplx> phase(static_cast<std::size_t>(theta_samples) * (2 * N + 1));
  for (int j = 0; j < theta_samples; ++j)
    for (int n = -N; n <= N; ++n) phase[j * (2 * N + 1) + n + N] = std::polar(1.0, 2 * M_PI * n * j / theta_samples);
  for (int node : g.mask_nodes())
    for (int j = 0; j < theta_samples; ++j) {
      cplx acc = 0;
      for (int n = -N; n <= N; ++n) acc += u.mode(n)[node] * phase[j * (2 * N + 1) + n + N];
      s.at(node, j) = acc;
    }
  return s;
}

FiberField decompose(const PhaseSamples& s, int degree, bool real) {
  const int J = s.theta_n;
  const int N = degree < 0 ? (J - 1) / 2 : degree;
  if (2 * N >= J) throw AliasError("decompose degree too large for the theta sampling");
  FiberField u(s.grid, N, real);
  const Grid& g = *s.grid;
  std::vector<cplx> phase(static_cast<std::size_t>(J) * (2 * N + 1));
  for (int j = 0; j < J; ++j)
    for (int n = -N; n <= N; ++n) phase[j * (2 * N + 1) + n + N] = std::polar(1.0 / J, -2 * M_PI * n * j / J);
  for (int node : g.mask_nodes())
    for (int n = -N; n <= N; ++n) {
      cplx acc = 0;
      for (int j = 0; j < J; ++j) acc += s.at(node, j) * phase[j * (2 * N + 1) + n + N];
      u.mode(n)[node] = acc;
    }
  return u;
}

cplx l2_inner(const FiberField& u, const FiberField& w, const SpeedField& speed) {
  const int N = std::min(u.degree(), w.degree());
  cplx acc = 0;
  for (int n = -N; n <= N; ++n) acc += inner(u.grid(), u.mode(n), w.mode(n), &speed.area_density());
  return 2 * M_PI * acc;
}

double l2_norm(const FiberField& u, const SpeedField& speed) {
  return std::sqrt(std::max(0.0, l2_inner(u, u, speed).real()));
}

FiberField apply_S(const OpticalParams& p, const FiberField& u) {
  const int m = std::min(p.m_k(), u.degree());
  FiberField out(u.grid_ptr(), m, u.real() && p.real_kernel(u.grid()));
  for (int n = -m; n <= m; ++n) {
    auto& dst = out.mode(n);
    const auto& kn = p.k(n);
    const auto& un = u.mode(n);
    for (int node : u.grid().mask_nodes()) dst[node] = kn[node] * un[node];
  }
  return out;
}

FiberField apply_V(const FiberField& u) {
  FiberField out(u.grid_ptr(), u.degree(), u.real());
  for (int n = -u.degree(); n <= u.degree(); ++n) {
    auto& dst = out.mode(n);
    const auto& src = u.mode(n);
    for (std::size_t k = 0; k < src.size(); ++k) dst[k] = cplx(0, n) * src[k];
  }
  return out;
}

namespace {

/// Pointwise evaluation route for X (perp = false) and X_perp (perp = true).
FiberField apply_frame_sampled(const FiberField& u, const SpeedField& speed, Flavor flavor, bool perp) {
  const Grid& g = u.grid();
  const int N = u.degree();
  const int out_deg = N + 1;
  const int J = 2 * out_deg + 2;
  std::vector<ComplexGrid> ux, uy;
  for (int n = -N; n <= N; ++n) {
    ux.push_back(diff(g, u.mode(n), 0, flavor));
    uy.push_back(diff(g, u.mode(n), 1, flavor));
  }
  PhaseSamples s{u.grid_ptr(), J, std::vector<cplx>(g.size() * J, cplx(0))};
  for (int node : g.mask_nodes()) {
    const double c = speed.c()[node], cx = speed.dcx()[node], cy = speed.dcy()[node];
    for (int j = 0; j < J; ++j) {
      const double th = 2 * M_PI * j / J;
      const double ct = std::cos(th), st = std::sin(th);
      cplx acc = 0;
      for (int n = -N; n <= N; ++n) {
        const cplx e = std::polar(1.0, n * th);
        const cplx un = u.mode(n)[node];
        const cplx dth = cplx(0, n) * un;
        if (!perp)
          acc += e * (c * (ct * ux[n + N][node] + st * uy[n + N][node]) + (-cy * ct + cx * st) * dth);
        else
          acc += e * (c * (st * ux[n + N][node] - ct * uy[n + N][node]) - (cx * ct + cy * st) * dth);
      }
      s.at(node, j) = acc;
    }
  }
  return decompose(s, out_deg, u.real());
}

}  // namespace

FiberField apply_X(const FiberField& u, const SpeedField& speed, Flavor flavor) {
  return apply_frame_sampled(u, speed, flavor, false);
}

FiberField apply_X_perp(const FiberField& u, const SpeedField& speed, Flavor flavor) {
  return apply_frame_sampled(u, speed, flavor, true);
}

ComplexGrid apply_eta(int sign, int n, const ComplexGrid& tilde_u, const SpeedField& speed, Flavor flavor) {
  const Grid& g = speed.grid();
  const ComplexGrid d = wirtinger(g, tilde_u, sign < 0, flavor);
  ComplexGrid out(g.size(), cplx(0));
  for (int node : g.mask_nodes()) {
    const double c = speed.c()[node];
    // d c = (c_x - i c_y) / 2, dbar c its conjugate.
    const cplx dc = 0.5 * cplx(speed.dcx()[node], sign > 0 ? -speed.dcy()[node] : speed.dcy()[node]);
    out[node] = sign > 0 ? c * d[node] + double(n) * dc * tilde_u[node] : c * d[node] - double(n) * dc * tilde_u[node];
  }
  return out;
}

namespace {

void accumulate(ComplexGrid& dst, const ComplexGrid& src) {
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
}

}  // namespace

FiberField apply_X_plus(const FiberField& u, const SpeedField& speed, Flavor flavor) {
  const int N = u.degree();
  FiberField out(u.grid_ptr(), N + 1, u.real());
  for (int n = 0; n <= N; ++n) accumulate(out.mode(n + 1), apply_eta(+1, n, u.mode(n), speed, flavor));
  for (int n = -N; n <= 0; ++n) accumulate(out.mode(n - 1), apply_eta(-1, n, u.mode(n), speed, flavor));
  return out;
}

FiberField apply_X_minus(const FiberField& u, const SpeedField& speed, Flavor flavor) {
  const int N = u.degree();
  FiberField out(u.grid_ptr(), std::max(N - 1, 0), u.real());
  for (int n = 1; n <= N; ++n) accumulate(out.mode(n - 1), apply_eta(-1, n, u.mode(n), speed, flavor));
  for (int n = -N; n <= -1; ++n) accumulate(out.mode(n + 1), apply_eta(+1, n, u.mode(n), speed, flavor));
  return out;
}

FiberField apply_X_modes(const FiberField& u, const SpeedField& speed, Flavor flavor) {
  return apply_X_plus(u, speed, flavor) + apply_X_minus(u, speed, flavor);
}

FiberField apply_X_perp_modes(const FiberField& u, const SpeedField& speed, Flavor flavor) {
  const int N = u.degree();
  FiberField out(u.grid_ptr(), N + 1, u.real());
  const cplx minus_i(0, -1);
  for (int n = -N; n <= N; ++n) {
    ComplexGrid up = apply_eta(+1, n, u.mode(n), speed, flavor);
    ComplexGrid dn = apply_eta(-1, n, u.mode(n), speed, flavor);
    for (std::size_t k = 0; k < up.size(); ++k) {
      out.mode(n + 1)[k] += minus_i * up[k];
      out.mode(n - 1)[k] -= minus_i * dn[k];
    }
  }
  return out;
}

FiberField multiply(const RealGrid& a, const FiberField& u) {
  FiberField out(u.grid_ptr(), u.degree(), u.real());
  for (int n = -u.degree(); n <= u.degree(); ++n)
    for (int node : u.grid().mask_nodes()) out.mode(n)[node] = a[node] * u.mode(n)[node];
  return out;
}

double q_infty(const Grid& g, const OpticalParams& p) {
  double amax = 0, kmax = 0;
  const int m = p.m_k();
  const int J = 64 * (m + 1);
  for (int node : g.mask_nodes()) {
    amax = std::max(amax, p.a[node]);
    double acc = 0;
    for (int j = 0; j < J; ++j) {
      cplx v = 0;
      for (int n = -m; n <= m; ++n) v += p.k(n)[node] * std::polar(1.0, 2 * M_PI * n * j / J);
      acc += std::abs(v);
    }
    // k(alpha) = (1 / 2 pi) sum k_n e^{i n alpha}, so int |k| is the sample mean of |sum|.
    kmax = std::max(kmax, acc / J);
  }
  return amax + kmax;
}

double accretivity_gap(const OpticalParams& p, const FiberField& u, const SpeedField& speed) {
  FiberField Qu = multiply(p.a, u) - apply_S(p, u);
  const double qq = l2_inner(Qu, u, speed).real();
  const double nu = l2_norm(u, speed);
  return qq - p.delta * nu * nu;
}

}  // namespace rts
