// Poisson and d-bar problems on the disk, and the Hodge / solenoidal splits of
// fiber harmonics used by the reconstruction.
#pragma once

#include <functional>

#include <Eigen/SparseCore>

#include "rts/fiber.hpp"

namespace rts {

using SparseC = Eigen::SparseMatrix<cplx>;
using VectorC = Eigen::VectorXcd;

/// Mask-slot vector <-> grid conversions.
VectorC to_slots(const Grid& g, const ComplexGrid& f);
ComplexGrid from_slots(const Grid& g, const VectorC& v);

/// eta_+ (sign > 0) or eta_- on the coefficient of mode n as a sparse matrix over mask slots.
SparseC eta_matrix(int sign, int n, const SpeedField& speed, Flavor flavor);

/// Delta_g p = rhs, p = 0 on the circle (Shortley-Weller five-point scheme).
ComplexGrid solve_poisson_dirichlet(const ComplexGrid& rhs, const SpeedField& speed);

/// Normal derivative d_nu u (g-unit outward normal) at the boundary point of angle phi.
using BoundaryData = std::function<cplx(double phi)>;

struct NeumannResult {
  ComplexGrid u;            // zero g-mean representative
  double defect = 0;        // |int rhs dA_g - oint data ds_g| relative to the sizes of both
  double multiplier = 0;    // |lambda| absorbed by the constraint row
  bool compatible = true;   // defect <= tolerance
};

/// Delta_g u = rhs, d_nu u = data, normalised to zero g-mean. Incompatible data is
/// projected through a Lagrange multiplier and flagged.
NeumannResult solve_poisson_neumann(const ComplexGrid& rhs, const BoundaryData& data, const SpeedField& speed,
                                    double tolerance = 1e-2);

struct DbarResult {
  ComplexGrid p;
  double residual = 0;  // |eta p - h| / |h|
};

/// Zero-boundary p on mode +k (sign > 0: c^{1-k} d(c^k p) = h) or mode -k
/// (sign < 0: c^{1-k} dbar(c^k p) = h), via Delta_g(c^k p) = 4 c^2 dbar(c^{k-1} h)
/// (resp. d).
DbarResult solve_dbar_dirichlet(int k, const ComplexGrid& h_next, const SpeedField& speed, int sign);

struct HodgeResult {
  ComplexGrid f0, fperp;  // zero-boundary potentials
  FiberField omega;       // degree-1 remainder
  double recomposition = 0;        // |X f0 + X_perp fperp + omega - f1| / |f1|
  double xminus_residual = 0;      // |X_- omega| / |X_- f1|
  double eta_residual = 0;         // (|eta_- omega_1| + |eta_+ omega_-1|) / same for f1
};

/// f1 = X f0 + X_perp fperp + omega with f0, fperp zero on the circle; the
/// potentials solve Delta_g alpha = 4 eta_- f_1, Delta_g beta = 4 eta_+ f_-1.
HodgeResult hodge_decompose(const FiberField& f1, const SpeedField& speed);

struct SolenoidalResult {
  FiberField v;     // modes +-(k-1) (mode 0 when k = 1)
  FiberField g;     // u - X_+ v on modes +-k
  double orthogonality = 0;    // |<X_+ v, g>| / |u|^2
  double kernel_residual = 0;  // |X_- g| / |X_- u|
};

/// u = X_+ v + g on modes +-k with v zero on the circle, from the normal problem
/// X_- X_+ v = X_- u, followed by a one-dimensional Ritz rescaling of v that makes
/// <X_+ v, g> vanish in the discrete L2(SM) product (skipped when the rescale is
/// far from 1, i.e. when X_+ v is at discretisation noise level).
SolenoidalResult solenoidal_project(const FiberField& u, int k, const SpeedField& speed);

}  // namespace rts
