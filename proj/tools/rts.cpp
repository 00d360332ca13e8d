// rts: command line front end. Exit codes: 0 ok, 1 usage or invalid input,
// 2 numerical failure, 3 I/O.
#include <cmath>
#include <filesystem>
#include <iostream>
#include <memory>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "rts/acceptance.hpp"
#include "rts/errors.hpp"
#include "rts/experiment.hpp"
#include "rts/io.hpp"
#include "rts/profiles.hpp"
#include "rts/reconstruction.hpp"

namespace fs = std::filesystem;
using namespace rts;

namespace {

constexpr int kOk = 0, kUsage = 1, kNumerical = 2, kIo = 3;

struct Flags {
  std::string config, out = "rts_out", backend, case_name;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int grid = 0;
  bool render = false;
  bool full = false;
  std::vector<int> only;
};

// Everything a subcommand needs: effective config, domain, speed, parameters, output list.
struct Run {
  RunConfig cfg;
  fs::path out;
  std::string command;
  GridPtr grid;
  std::unique_ptr<SpeedField> speed;
  Json outputs = Json::array();
  Json results = Json::object();

  OpticalParams params() const {
    OpticalParams p = make_params(cfg, *grid);
    check_admissible(*grid, p);
    return p;
  }
  void add(const fs::path& p) { outputs.push_back(fs::relative(p, out).generic_string()); }
  void add(const std::vector<fs::path>& ps) {
    for (const auto& p : ps) add(p);
  }

  void field(const std::string& stem, const FiberField& u) {
    add(write_field_csv(out, stem, u));
    if (cfg.binary) add(write_field_binary(out, stem, u));
  }
  void render_grid(const std::string& stem, const ComplexGrid& f) {
    const int size = cfg.render.size;
    const auto img = raster_field(*grid, f, cfg.render.part, size);
    const auto [lo, hi] = render_range(img, cfg.render.part);
    const fs::path p = out / (stem + "_" + cfg.render.part + ".pgm");
    write_pgm(p, size, size, img, lo, hi);
    add(p);
  }
  void render_fan(const std::string& stem, const BoundaryFan& fan) {
    const auto img = raster_fan(fan, cfg.render.part);
    const auto [lo, hi] = render_range(img, cfg.render.part);
    const fs::path p = out / (stem + "_" + cfg.render.part + ".pgm");
    write_pgm(p, fan.dir_n, fan.boundary_n, img, lo, hi);
    add(p);
  }
  void render_mode(const std::string& stem, const FiberField& u) {
    const int n = cfg.render.mode;
    if (!u.has_mode(n)) throw InvalidArgument("render.mode " + std::to_string(n) + " exceeds the field degree");
    render_grid(stem + "_mode" + std::to_string(n), u.mode(n));
  }

  void manifest() {
    Json m;
    m["tool"] = "rts";
    m["command"] = command;
    m["config"] = cfg.to_json();
    m["results"] = results;
    m["outputs"] = outputs;
    write_json(out / "manifest.json", m);
  }
};

Run prepare(const std::string& command, const Flags& f) {
  Run r;
  r.command = command;
  if (!f.config.empty()) r.cfg = load_config(f.config);
  Json j = r.cfg.to_json();
  if (f.grid > 0) {
    j["domain"]["grid_n"] = f.grid;
    j["domain"]["boundary_n"] = 2 * f.grid;
    j["domain"]["dir_n"] = f.grid;
  }
  if (!f.backend.empty()) j["reconstruct"]["backend"] = f.backend;
  if (!f.case_name.empty()) j["reconstruct"]["case"] = f.case_name;
  if (f.seed_set) j["seed"] = f.seed;
  r.cfg = parse_config(j);  // re-validate with the overrides applied
  r.out = f.out;
  std::error_code ec;
  fs::create_directories(r.out, ec);
  if (ec) throw IoError("cannot create output directory " + r.out.string() + ": " + ec.message());
  r.grid = make_grid(r.cfg.domain);
  r.speed = std::make_unique<SpeedField>(r.grid, r.cfg.speed);
  return r;
}

Json fan_summary(const BoundaryFan& fan) {
  return {{"entries", fan.size()}, {"l2_norm", fan.l2_norm()}, {"l2_mu_norm", fan.l2_mu_norm()}};
}

// ---- subcommands ----------------------------------------------------------------

int cmd_selftest(Run& r, const Flags& f) {
  AcceptanceOptions opt;
  opt.profile = f.full ? Profile::Full : Profile::Quick;
  opt.only = f.only;
  opt.on_result = [](const CriterionResult& c) { std::cout << format_result(c) << std::endl; };
  Json list = Json::array();
  int failed = 0;
  for (const CriterionResult& c : run_acceptance(opt)) {
    failed += !c.pass;
    list.push_back({{"id", c.id}, {"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  r.results = {{"profile", f.full ? "full" : "quick"}, {"criteria", list}, {"failed", failed}};
  r.manifest();
  std::cout << (failed ? "FAIL" : "PASS") << ": " << failed << " criteria failed\n";
  return failed ? kNumerical : kOk;
}

int cmd_geometry(Run& r, const Flags&) {
  const SpeedField& sp = *r.speed;
  const DomainSpec& d = r.cfg.domain;
  const FlowOptions& fopt = r.cfg.transport.flow;
  const SimplicityReport s = simplicity_check(sp, d, fopt);
  const double c0 = convexity_constant(sp, d, fopt);
  const auto one = [](const PhasePoint&) { return 1.0; };
  const double vol_fan = santalo_integrate(one, sp, d, fopt);
  const double vol_grid = grid_phase_integral(one, sp, 64);
  r.results = {{"simple", s.simple()},
               {"non_trapping", s.non_trapping},
               {"strictly_convex", s.strictly_convex},
               {"conjugate_points", s.conjugate_points},
               {"max_tau", s.max_tau},
               {"tau_over_mu", {s.min_ratio, s.max_ratio}},
               {"min_boundary_curvature", s.min_boundary_curvature},
               {"convexity_constant", c0},
               {"santalo_volume", vol_fan},
               {"grid_volume", vol_grid}};
  // A few geodesics from the boundary for inspection.
  std::mt19937_64 rng(r.cfg.seed);
  std::uniform_real_distribution<double> S(0, 2 * M_PI), B(-1.3, 1.3);
  for (int k = 0; k < 8; ++k) {
    const double s0 = S(rng);
    const PhasePoint p = boundary_point(s0, s0 + M_PI + B(rng), d.radius);
    const fs::path path = r.out / ("geodesic_" + std::to_string(k) + ".csv");
    write_path_csv(path, flow(p, sp, FlowDirection::Forward, fopt));
    r.add(path);
  }
  r.manifest();
  std::cout << "simple " << (s.simple() ? "yes" : "no") << ", C0 " << c0 << ", Santalo volume " << vol_fan
            << " (grid " << vol_grid << ")\n";
  return kOk;
}

int cmd_forward(Run& r, const Flags& f) {
  const OpticalParams P = r.params();
  const FiberField src = make_source(r.cfg, *r.speed, r.cfg.reconstruct.case_name);
  const ForwardResult fr = forward_solve(src, P, *r.speed, r.cfg.transport);
  r.field("f", src);
  r.field("u", fr.u);
  if (f.render) r.render_mode("u", fr.u);
  r.results = {{"source_case", r.cfg.reconstruct.case_name},
               {"iterations", fr.iterations},
               {"final_residual", fr.residuals.empty() ? 0.0 : fr.residuals.back()},
               {"residuals", fr.residuals},
               {"degree", fr.u.degree()},
               {"u_l2", l2_norm(fr.u, *r.speed)}};
  r.manifest();
  std::cout << "forward: " << fr.iterations << " iterations, degree " << fr.u.degree() << "\n";
  return kOk;
}

int cmd_measure(Run& r, const Flags& f) {
  const OpticalParams P = r.params();
  const FiberField src = make_source(r.cfg, *r.speed, r.cfg.reconstruct.case_name);
  ForwardResult fr;
  const BoundaryFan fan = measure(src, P, *r.speed, r.cfg.domain, r.cfg.transport, &fr);
  const fs::path p = r.out / "fan.csv";
  write_fan_csv(p, fan);
  r.add(p);
  if (f.render) r.render_fan("fan", fan);
  r.results = fan_summary(fan);
  r.results["iterations"] = fr.iterations;
  r.results["ratio"] = fan.l2_norm() / l2_norm(src, *r.speed);
  r.manifest();
  std::cout << "measure: " << fan.size() << " fan samples, |Mf| " << fan.l2_norm() << "\n";
  return kOk;
}

int cmd_reconstruct(Run& r, const Flags& f) {
  const ReconstructionRun run = run_reconstruction(r.cfg, *r.speed);
  for (const NamedField& nf : run.fields) {
    r.field(nf.name, nf.field);
    if (f.render && nf.primary) r.render_grid(nf.name + "_mode" + std::to_string(nf.render_mode),
                                              nf.field.mode_or_zero(nf.render_mode));
  }
  const fs::path dp = r.out / "data.csv";
  write_fan_csv(dp, run.data);
  r.add(dp);
  r.results = run.results;
  r.manifest();
  std::cout << "reconstruct case " << r.cfg.reconstruct.case_name << ": " << run.results["errors"].dump() << "\n";
  return kOk;
}

int cmd_gauge_check(Run& r, const Flags&) {
  const OpticalParams P = r.params();
  std::mt19937_64 rng(r.cfg.seed);
  Json ratios = Json::array();
  double worst = 0;
  const int deg = r.cfg.gauge.degree;
  for (int t = 0; t < r.cfg.gauge.trials; ++t) {
    const FiberField p = random_fiber_field(r.grid, deg, rng, P.real_kernel(*r.grid), true);
    const FiberField g = gauge_generate(p, P, *r.speed);
    const double ratio = gauge_verify(g, P, *r.speed, r.cfg.domain, r.cfg.transport);
    ratios.push_back(ratio);
    worst = std::max(worst, ratio);
    if (t == 0) {
      r.field("p", p);
      r.field("f", g);
    }
  }
  r.results = {{"p_degree", deg}, {"ratios", ratios}, {"max_ratio", worst}, {"bound", 1e-3}, {"pass", worst <= 1e-3}};
  r.manifest();
  std::cout << "gauge-check: max |Mf|/|f| " << worst << " over " << r.cfg.gauge.trials << " trials\n";
  return kOk;
}

int cmd_descent(Run& r, const Flags&) {
  const OpticalParams P = r.params();
  const DescentReport rep = degree_descent_probe(P, *r.speed, r.cfg.domain, r.cfg.gauge.degree, r.cfg.seed, 1e-2,
                                                 r.cfg.transport);
  Json stages = Json::array();
  for (const DescentStage& s : rep.stages)
    stages.push_back({{"bound", s.bound}, {"numerical_degree", s.numerical_degree}, {"boundary_norm", s.boundary_norm}});
  r.results = {{"source_degree", rep.source_degree},
               {"kernel_degree", rep.kernel_degree},
               {"injective", rep.injective},
               {"stages", stages}};
  r.manifest();
  std::cout << "descent-probe: " << stages.dump() << "\n";
  return kOk;
}

int cmd_render(Run& r, const Flags&) {
  const std::string& what = r.cfg.render.field;
  const FiberField src = make_source(r.cfg, *r.speed, r.cfg.reconstruct.case_name);
  if (what == "f") {
    r.render_mode("f", src);
  } else {
    const OpticalParams P = r.params();
    if (what == "u") {
      r.render_mode("u", forward_solve(src, P, *r.speed, r.cfg.transport).u);
    } else {
      r.render_fan("fan", measure(src, P, *r.speed, r.cfg.domain, r.cfg.transport));
    }
  }
  r.results = {{"field", what}};
  r.manifest();
  std::cout << "render: " << r.outputs.dump() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radiative transfer source problems: forward solves, measurements, reconstruction and gauge checks"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags flags;
  app.add_option("--config", flags.config, "JSON run configuration");
  app.add_option("--out", flags.out, "output directory")->capture_default_str();
  app.add_option("--backend", flags.backend, "Step 1 backend")->check(CLI::IsMember({"oracle", "lsq"}));
  app.add_option("--case", flags.case_name, "source case")->check(CLI::IsMember({"1", "2", "iso1", "iso2", "general"}));
  app.add_option_function<std::uint64_t>(
      "--seed", [&](std::uint64_t s) { flags.seed = s, flags.seed_set = true; }, "random seed");
  app.add_option("--grid", flags.grid, "grid_n (boundary_n = 2 N, dir_n = N)")->check(CLI::Range(16, 4096));
  app.add_flag("--render", flags.render, "also write PGM renders of the outputs");

  auto* selftest = app.add_subcommand("selftest", "run the acceptance criteria (quick profile by default)");
  selftest->add_flag("--full", flags.full, "pinned resolutions");
  selftest->add_option("--only", flags.only, "criterion ids");
  app.add_subcommand("geometry", "exit times, convexity constant, Santalo volume, simplicity");
  app.add_subcommand("forward", "solve the transport equation and export u");
  app.add_subcommand("measure", "export the boundary measurement of the configured source");
  app.add_subcommand("reconstruct", "recover the configured source from its exact data");
  app.add_subcommand("gauge-check", "generate pure-gauge sources and verify their measurement vanishes");
  app.add_subcommand("descent-probe", "degree descent of pure-gauge solutions");
  app.add_subcommand("render", "grayscale PGM of a field or fan");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  std::unique_ptr<Run> run;
  // On failure the manifest still records the effective configuration and the error.
  auto fail = [&](int code, const std::string& what) {
    std::cerr << what << "\n";
    if (run) {
      run->results = {{"error", what}, {"exit_code", code}};
      try {
        run->manifest();
      } catch (const std::exception&) {
      }
    }
    return code;
  };
  try {
    run = std::make_unique<Run>(prepare(cmd, flags));
    Run& r = *run;
    if (cmd == "selftest") return cmd_selftest(r, flags);
    if (cmd == "geometry") return cmd_geometry(r, flags);
    if (cmd == "forward") return cmd_forward(r, flags);
    if (cmd == "measure") return cmd_measure(r, flags);
    if (cmd == "reconstruct") return cmd_reconstruct(r, flags);
    if (cmd == "gauge-check") return cmd_gauge_check(r, flags);
    if (cmd == "descent-probe") return cmd_descent(r, flags);
    if (cmd == "render") return cmd_render(r, flags);
  } catch (const ConfigError& e) {
    return fail(kUsage, std::string("config error at ") + e.what());
  } catch (const InvalidArgument& e) {
    return fail(kUsage, std::string("invalid input: ") + e.what());
  } catch (const NumericalError& e) {
    return fail(kNumerical, std::string("numerical failure: ") + e.what());
  } catch (const IoError& e) {
    return fail(kIo, std::string("I/O error: ") + e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(kIo, std::string("I/O error: ") + e.what());
  } catch (const std::exception& e) {
    return fail(kNumerical, std::string("error: ") + e.what());
  }
  return kUsage;
}
