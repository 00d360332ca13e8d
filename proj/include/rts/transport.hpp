// Attenuated transport along geodesics: free-transport solves, scattering
// source iteration, the boundary measurement and the attenuated X-ray transform.
#pragma once

#include <cstdint>
#include <vector>

#include "rts/fiber.hpp"
#include "rts/geometry.hpp"

namespace rts {

struct TransportOptions {
  int theta_samples = 0;   // per-node direction samples; 0 -> max(2 N_max + 2, 32)
  int max_degree = 0;      // N_max; 0 -> m_k + m_f + 8
  double tail_tol = 1e-2;  // DegreeOverflow when the top mode carries more than this fraction of the energy
  double tol = 1e-10;      // relative L2 update that stops the source iteration
  int max_iterations = 500;
  int divergence_window = 5;
  FlowOptions flow;
};

/// Samples of a function on Gamma_+ (or Gamma_-), arc-major.
struct BoundaryFan {
  int boundary_n = 0, dir_n = 0;
  bool outgoing = true;
  std::vector<FanEntry> entries;
  std::vector<double> tau;   // travel time of the geodesic through each entry
  std::vector<cplx> values;

  std::size_t size() const { return entries.size(); }
  /// L2(Gamma, dSigma^2) norm.
  double l2_norm() const;
  /// L2 norm weighted by |mu|.
  double l2_mu_norm() const;
};

/// Empty outgoing fan on the domain's boundary sampling.
BoundaryFan make_fan(const SpeedField& speed, const DomainSpec& domain);

/// I_a f on Gamma_+: integral of f e^{-int a} along the incoming geodesic.
BoundaryFan attenuated_ray_transform(const FiberField& f, const RealGrid& a, const SpeedField& speed,
                                     const DomainSpec& domain, const FlowOptions& flow = {});
/// Same, evaluated on an existing fan layout.
void attenuated_ray_transform(const FiberField& f, const RealGrid& a, const SpeedField& speed, BoundaryFan& fan,
                              const FlowOptions& flow = {});

/// w with (X + a) w = q and w = 0 on Gamma_-, by backward characteristics from
/// every node and direction sample, re-expanded in modes.
FiberField solve_free_transport(const FiberField& q, const RealGrid& a, const SpeedField& speed,
                                const TransportOptions& opt = {});
/// The direction samples of the free-transport solution before re-expansion.
PhaseSamples free_transport_samples(const FiberField& q, const RealGrid& a, const SpeedField& speed, int theta_samples,
                                    const FlowOptions& flow = {});

struct ForwardResult {
  FiberField u;
  int iterations = 0;
  std::vector<double> residuals;  // relative L2 update per iteration
};

/// Source iteration u <- T^{-1}(S u + f) for X u + a u = S u + f, u = 0 on Gamma_-.
ForwardResult forward_solve(const FiberField& f, const OpticalParams& p, const SpeedField& speed,
                            const TransportOptions& opt = {});

/// M_{a,k} f = u on Gamma_+ (the outgoing trace I_a[f + S u]).
BoundaryFan measure(const FiberField& f, const OpticalParams& p, const SpeedField& speed, const DomainSpec& domain,
                    const TransportOptions& opt = {}, ForwardResult* forward = nullptr);

struct NormBoundReport {
  double c0 = 0, q_inf = 0, delta = 0;
  double bound = 0;      // sqrt(C0) (Q_inf / delta + 1)
  double max_ratio = 0;  // max |M f| / |f| over the trials
  std::vector<double> ratios;
};

/// Randomised check of |M f|_{L2(Gamma_+)} <= sqrt(C0)(Q_inf/delta + 1) |f|.
NormBoundReport norm_bound_check(const OpticalParams& p, const SpeedField& speed, const DomainSpec& domain, int trials,
                                 std::uint64_t seed = 7, const TransportOptions& opt = {});
/// Ratio for one given source.
double measurement_ratio(const FiberField& f, const OpticalParams& p, const SpeedField& speed,
                         const DomainSpec& domain, const TransportOptions& opt = {});

struct TraceRow {
  double margin;          // glancing exclusion |mu| >= margin
  double trace_integral;  // int_{Gamma_-} tau^{2 eta} |mu|
  double w_integral;      // int_{Gamma_-} tau^{2 eta + 1} |mu|
};

/// The two Gamma_- integrals of tau^eta as the glancing margin shrinks by
/// `ratio` per level, starting at `first_margin`.
std::vector<TraceRow> trace_counterexample(double eta, int levels, const SpeedField& speed, int boundary_n,
                                           double first_margin = 1e-3, double ratio = 4.0,
                                           const FlowOptions& flow = {});

}  // namespace rts
