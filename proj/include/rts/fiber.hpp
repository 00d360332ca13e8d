// Functions on the unit tangent bundle stored as fiberwise Fourier modes, and
// the first-order frame operators acting on them.
#pragma once

#include <vector>

#include "rts/geometry.hpp"
#include "rts/grid.hpp"

namespace rts {

/// u(x, theta) = sum_{n=-N..N} u_n(x) e^{i n theta}, one complex grid per mode.
class FiberField {
 public:
  FiberField() = default;
  FiberField(GridPtr grid, int degree, bool real = false);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  /// Storage degree N: modes -N..N are held (some may be zero).
  int degree() const { return degree_; }
  bool real() const { return real_; }
  void set_real(bool r) { real_ = r; }

  ComplexGrid& mode(int n) { return modes_[n + degree_]; }
  const ComplexGrid& mode(int n) const { return modes_[n + degree_]; }
  /// Mode n, or an empty grid when |n| > degree().
  const ComplexGrid& mode_or_zero(int n) const;
  bool has_mode(int n) const { return n >= -degree_ && n <= degree_; }

  /// Largest |n| whose mode exceeds rel_tol * (total grid norm).
  int numerical_degree(double rel_tol = 1e-14) const;
  /// Drop trailing modes below the threshold.
  void trim(double rel_tol = 1e-14);
  /// Same field with storage degree N (truncating or zero-padding).
  FiberField with_degree(int N) const;
  /// Keep only modes with |n| in [lo, hi].
  FiberField band(int lo, int hi) const;

  FiberField& operator+=(const FiberField& o);
  FiberField& operator-=(const FiberField& o);
  FiberField& operator*=(cplx s);
  friend FiberField operator+(FiberField a, const FiberField& b) { return a += b; }
  friend FiberField operator-(FiberField a, const FiberField& b) { return a -= b; }
  friend FiberField operator*(cplx s, FiberField a) { return a *= s; }

  /// Sum of squared grid norms of all modes (flat area weights, no c factor).
  double grid_energy() const;

 private:
  GridPtr grid_;
  int degree_ = 0;
  bool real_ = false;
  std::vector<ComplexGrid> modes_;
};

/// Values on SM at theta_j = 2 pi j / theta_n, node-major.
struct PhaseSamples {
  GridPtr grid;
  int theta_n = 0;
  std::vector<cplx> values;  // values[node * theta_n + j]
  cplx& at(int node, int j) { return values[static_cast<std::size_t>(node) * theta_n + j]; }
  cplx at(int node, int j) const { return values[static_cast<std::size_t>(node) * theta_n + j]; }
};

/// Attenuation a, scattering kernel modes k_n (|n| <= m_k) and subcriticality margin.
struct OpticalParams {
  RealGrid a;
  std::vector<ComplexGrid> k_modes;  // index n + m_k
  double delta = 0.1;

  int m_k() const { return static_cast<int>(k_modes.size() / 2); }
  const ComplexGrid& k(int n) const { return k_modes[n + m_k()]; }
  bool real_kernel(const Grid& g) const;
  /// sigma_a = a - Re k_0.
  RealGrid sigma_a(const Grid& g) const;

  /// Spatially constant parameters: a, kernel modes k_0..k_m (k_{-n} = conj k_n).
  static OpticalParams constant(const Grid& g, double a, const std::vector<cplx>& k_nonneg, double delta);
};

/// Admissibility (a >= 0, synthesized k >= -1e-12 on 4 m_k + 1 angles) and
/// subcriticality (sigma_a >= delta). Throws InvalidArgument with the reason.
void check_admissible(const Grid& g, const OpticalParams& p);

PhaseSamples synthesize(const FiberField& u, int theta_samples);
/// Trapezoidal Fourier coefficients up to |n| <= degree (default (J-1)/2).
FiberField decompose(const PhaseSamples& s, int degree = -1, bool real = false);

/// L2(SM) norm: 2 pi sum_n int |u_n|^2 c^-2 dx.
double l2_norm(const FiberField& u, const SpeedField& speed);
/// L2(SM) inner product.
cplx l2_inner(const FiberField& u, const FiberField& w, const SpeedField& speed);

/// (Su)_n = k_n u_n.
FiberField apply_S(const OpticalParams& p, const FiberField& u);

/// X by pointwise evaluation of c (cos, sin).grad + (-c_y cos + c_x sin) d_theta.
FiberField apply_X(const FiberField& u, const SpeedField& speed, Flavor flavor = Flavor::Free);
/// X_perp = c (sin d_x - cos d_y) - (c_x cos + c_y sin) d_theta.
FiberField apply_X_perp(const FiberField& u, const SpeedField& speed, Flavor flavor = Flavor::Free);
/// V = d_theta (multiplication by i n).
FiberField apply_V(const FiberField& u);

/// Reduced eta operators on the coefficient of e^{i n theta}:
/// eta_+ : c^{1-n} d(c^n u) on mode n+1, eta_- : c^{1+n} dbar(c^{-n} u) on mode n-1.
ComplexGrid apply_eta(int sign, int n, const ComplexGrid& tilde_u, const SpeedField& speed,
                      Flavor flavor = Flavor::Free);

/// X_+ raises |n|, X_- lowers it; X = X_+ + X_-.
FiberField apply_X_plus(const FiberField& u, const SpeedField& speed, Flavor flavor = Flavor::Free);
FiberField apply_X_minus(const FiberField& u, const SpeedField& speed, Flavor flavor = Flavor::Free);
/// X assembled as X_+ + X_-.
FiberField apply_X_modes(const FiberField& u, const SpeedField& speed, Flavor flavor = Flavor::Free);
/// X_perp = (eta_+ - eta_-) / i, assembled from the mode formulas.
FiberField apply_X_perp_modes(const FiberField& u, const SpeedField& speed, Flavor flavor = Flavor::Free);

/// Multiply every mode by a scalar grid.
FiberField multiply(const RealGrid& a, const FiberField& u);

/// sup a + sup_x int |k(x, alpha)| d alpha.
double q_infty(const Grid& g, const OpticalParams& p);
/// Re (Qu, u) - delta |u|^2 with Q = a - S.
double accretivity_gap(const OpticalParams& p, const FiberField& u, const SpeedField& speed);

}  // namespace rts
