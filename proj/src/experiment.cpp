#include "rts/experiment.hpp"

#include <algorithm>
#include <cmath>

#include "rts/errors.hpp"

namespace rts {

namespace {

FiberField scalar(const GridPtr& g, const ComplexGrid& f) {
  FiberField u(g, 0);
  u.mode(0) = f;
  return u;
}

}  // namespace

ReconstructionRun run_reconstruction(const RunConfig& cfg, const SpeedField& sp) {
  const GridPtr& g = sp.grid_ptr();
  OpticalParams P = make_params(cfg, *g);
  check_admissible(*g, P);
  const ReconstructSpec& rs = cfg.reconstruct;
  const std::string& c = rs.case_name;
  const FiberField src = make_source(cfg, sp, c);
  const SourceFixture fx = make_fixture(src, P, sp, cfg.domain, cfg.transport, c == "iso2" ? 1 : -1);

  RecoverOptions opt;
  opt.backend = rs.backend;
  opt.truth = &fx.split.h;
  opt.tikhonov = rs.tikhonov;
  opt.polynomial_degree = rs.polynomial_degree;
  opt.holomorphic_terms = rs.holomorphic_terms;
  opt.condition_cap = rs.condition_cap;
  opt.flow = cfg.transport.flow;
  const Step2Options s2{cfg.transport};
  const int m = P.m_k();

  ReconstructionRun run;
  run.data = fx.data;
  Json err = Json::object();
  RecoverReport rep;
  bool have_report = false;

  if (c == "1" || c == "iso1") {
    Case1Result res;
    if (c == "1") {
      const GaugeRepresentative h = recover_representative(fx.data, P, sp, opt, &rep);
      have_report = true;
      PipelineState st = step2_triangular(h, P, sp, m, s2);
      res = case1_finish(st, h, P, sp);
      run.fields.push_back({"p", st.p, 0, false});
    } else {
      res = isotropic_case1(fx.data, P, sp, opt, cfg.transport);
    }
    run.fields.push_back({"f0", scalar(g, res.f0), 0, true});
    run.fields.push_back({"fperp", scalar(g, res.f_perp), 0, true});
    err["f0"] = relative_error(sp, res.f0, source_profile(cfg, *g, "f0"));
    err["fperp_up_to_constant"] = relative_error(sp, res.f_perp, source_profile(cfg, *g, "fperp"), true);
    run.results["neumann_compatible"] = res.neumann.compatible;
  } else if (c == "2" || c == "iso2") {
    FiberField vec;
    if (c == "2") {
      const GaugeRepresentative h = recover_representative(fx.data, P, sp, opt, &rep);
      have_report = true;
      PipelineState st = step2_triangular(h, P, sp, m, s2);
      vec = case2_finish(st, h, P, sp);
      run.fields.push_back({"p", st.p, 0, false});
    } else {
      const Iso2Result res = isotropic_case2(fx.data, P, sp, opt, cfg.transport);
      vec = res.f1;
      run.fields.push_back({"f0_tilde", scalar(g, res.f0_tilde), 0, false});
    }
    run.fields.push_back({"f1", vec, 1, true});
    err["f1"] = relative_error(sp, vec.mode(1), source_profile(cfg, *g, "f1"));
  } else {
    // General source: only the representative and the gauge potential are determined.
    const GaugeRepresentative h = recover_representative(fx.data, P, sp, opt, &rep);
    have_report = true;
    PipelineState st = step2_triangular(h, P, sp, std::max(m, 1), s2);
    const FiberField hs = h.synthesize(sp, src.real());
    run.fields.push_back({"h", hs, cfg.render.mode, true});
    run.fields.push_back({"p", st.p, 0, false});
    const BoundaryFan back = attenuated_ray_transform(hs, P.a, sp, cfg.domain, cfg.transport.flow);
    double e = 0;
    for (std::size_t i = 0; i < back.size(); ++i)
      e += back.entries[i].weight * std::norm(back.values[i] - fx.data.values[i]);
    const double dn = fx.data.l2_norm();
    err["data_residual"] = dn > 0 ? std::sqrt(e) / dn : 0.0;
    if (rs.backend == Backend::Lsq) {
      // The oracle hands back the exact split, so this comparison only means something for lsq.
      const FiberField want = fx.split.h.synthesize(sp, src.real());
      const double wn = l2_norm(want, sp);
      err["representative"] = wn > 0 ? l2_norm(hs - want, sp) / wn : 0.0;
    }
  }
  if (have_report && rs.backend == Backend::Lsq)
    run.results["lsq"] = {{"unknowns", rep.unknowns},
                          {"residual", rep.residual},
                          {"condition", rep.condition},
                          {"lambda", rep.lambda}};
  run.results["case"] = c;
  run.results["backend"] = rs.backend == Backend::Lsq ? "lsq" : "oracle";
  run.results["errors"] = err;
  return run;
}

}  // namespace rts
