// Inverse source pipeline: gauge representatives, the triangular descent for
// the gauge potential p, the source-type finishers, and gauge generation.
#pragma once

#include <cstdint>
#include <vector>

#include "rts/elliptic.hpp"
#include "rts/transport.hpp"

namespace rts {

/// h = h0 + X_perp h_perp + sum_k h_k with h_perp zero on the circle and h_k in H_k.
struct GaugeRepresentative {
  ComplexGrid h0;
  ComplexGrid h_perp;
  std::vector<FiberField> h_k;  // h_k[k - 1] holds modes +-k

  int degree() const { return static_cast<int>(h_k.size()); }
  /// The representative as a fiber field of degree max(1, m).
  FiberField synthesize(const SpeedField& speed, bool real) const;
  static GaugeRepresentative zero(const GridPtr& g, int m, bool real = true);
};

/// (X + a) p + h for the given split, with p of degree m - 1.
struct GaugeSplit {
  FiberField p;
  GaugeRepresentative h;
};

/// Split F (degree <= m) as (X + a) p + h: top-down solenoidal projections for
/// p_{m-1}, ..., p_1, then the Hodge split on modes +-1 for p_0 and h_perp.
GaugeSplit gauge_split(const FiberField& F, const RealGrid& a, const SpeedField& speed, int m);

struct HarnessResult {
  FiberField f;                // F - S u
  FiberField u;                // (X + a) u = F, u = 0 on Gamma_-
  BoundaryFan data;            // I_a[F]
  GaugeRepresentative truth;   // h
};

/// F := (X + a) p + h, u := T^{-1} F, f := F - S u, data := I_a[F].
HarnessResult synthetic_gauge_harness(const FiberField& p, const GaugeRepresentative& h, const OpticalParams& params,
                                      const SpeedField& speed, const DomainSpec& domain,
                                      const TransportOptions& opt = {});

/// A source problem with its exact forward data and representative.
struct SourceFixture {
  FiberField f;
  ForwardResult forward;
  BoundaryFan data;  // M_{a,k} f
  GaugeSplit split;  // f + S u = (X + a) p + h
};

/// Forward-solve f, measure, and split f + S u into the gauge form of degree m
/// (-1 -> kernel degree; the isotropic vector-field case uses m = 1).
SourceFixture make_fixture(const FiberField& f, const OpticalParams& params, const SpeedField& speed,
                           const DomainSpec& domain, const TransportOptions& opt = {}, int m = -1);

enum class Backend { Oracle, Lsq };

struct RecoverOptions {
  Backend backend = Backend::Oracle;
  const GaugeRepresentative* truth = nullptr;  // required by the oracle backend
  int degree = -1;                  // m; -1 -> kernel degree
  int polynomial_degree = 16;       // total degree of the Legendre bases for h0 and h_perp
  int holomorphic_terms = 12;       // c^k z^j, j < this, per H_k component
  double tikhonov = 1e-6;           // relative to the largest eigenvalue of the scaled normal matrix
  double condition_cap = 1e14;      // IllConditioned above this (undamped, scaled normal matrix)
  FlowOptions flow;
};

struct RecoverReport {
  int unknowns = 0;
  double residual = 0;        // |A x - data| / |data| in the fan norm
  double condition = 0;       // condition number of the scaled normal matrix
  double lambda = 0;          // absolute Tikhonov weight on the scaled normal matrix
};

/// Step 1: the representative h with I_a h = data.
GaugeRepresentative recover_representative(const BoundaryFan& data, const OpticalParams& params,
                                           const SpeedField& speed, const RecoverOptions& opt,
                                           RecoverReport* report = nullptr);

struct PipelineState {
  FiberField w;  // u - p = T^{-1} f~
  FiberField p;  // p_{m-1}, ..., p_1 (mode 0 filled by the finishers)
  FiberField Sw;
  ComplexGrid s1_plus, s1_minus;
  std::vector<double> dbar_residuals;  // per solved component, top level first
};

struct Step2Options {
  TransportOptions transport;
  double consistency_tol = 0.1;  // ConsistencyFailure above this d-bar residual
};

/// Step 2: w from free transport, then p_{m-1}, ..., p_1 from the H_m, ..., H_2
/// projections, each a zero-boundary d-bar problem.
PipelineState step2_triangular(const GaugeRepresentative& f_tilde, const OpticalParams& params,
                               const SpeedField& speed, int m, const Step2Options& opt = {});

struct Case1Result {
  ComplexGrid f0, f_perp, p0;
  NeumannResult neumann;
};

/// Source f0 + X_perp f_perp. Fills state.p mode 0 and s_{1,+-}.
Case1Result case1_finish(PipelineState& state, const GaugeRepresentative& f_tilde, const OpticalParams& params,
                         const SpeedField& speed);

/// Vector-field source f1. Fills state.p mode 0.
FiberField case2_finish(PipelineState& state, const GaugeRepresentative& f_tilde, const OpticalParams& params,
                        const SpeedField& speed);

/// Isotropic kernel, source f0 + X_perp f_perp: recover k0 u0 + f0 and f_perp,
/// integrate for u, subtract k0 u0.
Case1Result isotropic_case1(const BoundaryFan& data, const OpticalParams& params, const SpeedField& speed,
                            const RecoverOptions& opt, const TransportOptions& topt = {});

struct Iso2Result {
  FiberField f1;
  ComplexGrid f0_tilde, fperp_tilde;
  FiberField omega;
};

/// Isotropic kernel, vector-field source: recover (k0 u0 - a f0~, f_perp~, omega_1),
/// integrate for u - f0~, then f0~ = [(k0 u0 - a f0~) - k0 (u0 - f0~)] / (k0 - a).
Iso2Result isotropic_case2(const BoundaryFan& data, const OpticalParams& params, const SpeedField& speed,
                           const RecoverOptions& opt, const TransportOptions& topt = {});

/// Elimination of u0 in the isotropic vector-field case, pointwise.
cplx iso2_eliminate(cplx k0u0_minus_af0, cplx u0_minus_f0, double k0, double a);

/// f = X p + a p - S p for zero-boundary p.
FiberField gauge_generate(const FiberField& p, const OpticalParams& params, const SpeedField& speed);

/// |M_{a,k} f|_{L2(Gamma_+)} / |f|_{L2(SM)}, 0 for f = 0.
double gauge_verify(const FiberField& f, const OpticalParams& params, const SpeedField& speed,
                    const DomainSpec& domain, const TransportOptions& opt = {});

struct DescentStage {
  int bound;             // degree bound on u from the induction step
  int numerical_degree;  // measured degree of u at this stage
  double boundary_norm;  // |u on Gamma_+| / |f|
};

struct DescentReport {
  bool injective = false;  // source degree 0: no pure-gauge source exists
  int source_degree = 0, kernel_degree = 0;
  std::vector<DescentStage> stages;
};

/// Pure-gauge source of degree m (p of degree m - 1) against the given kernel:
/// stage 0 is the full forward solution; each further stage re-solves the free
/// transport with S u truncated to the previous bound.
DescentReport degree_descent_probe(const OpticalParams& params, const SpeedField& speed, const DomainSpec& domain,
                                   int m, std::uint64_t seed = 3, double degree_tol = 1e-2,
                                   const TransportOptions& opt = {});

/// Relative L2(M, dA_g) error |got - want| / |want|, optionally after removing both g-means
/// (for quantities defined up to a constant). 0 when both vanish.
double relative_error(const SpeedField& speed, const ComplexGrid& got, const ComplexGrid& want, bool demean = false);

}  // namespace rts
