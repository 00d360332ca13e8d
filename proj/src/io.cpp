#include "rts/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "rts/errors.hpp"

namespace rts {

namespace fs = std::filesystem;

namespace {

// ---- config reading with JSON-pointer error paths --------------------------

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }

const Json& require_object(const Json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "/" : path, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(child(path, k), "unknown key");
  return j;
}

void read(const Json& o, const std::string& path, const char* key, double& out) {
  if (!o.contains(key)) return;
  const Json& v = o[key];
  if (!v.is_number()) throw ConfigError(child(path, key), "expected a number");
  out = v.get<double>();
  if (!std::isfinite(out)) throw ConfigError(child(path, key), "must be finite");
}

void read(const Json& o, const std::string& path, const char* key, int& out) {
  if (!o.contains(key)) return;
  const Json& v = o[key];
  if (!v.is_number_integer()) throw ConfigError(child(path, key), "expected an integer");
  const auto x = v.get<long long>();
  if (x < -(1LL << 30) || x > (1LL << 30)) throw ConfigError(child(path, key), "integer out of range");
  out = static_cast<int>(x);
}

void read(const Json& o, const std::string& path, const char* key, std::uint64_t& out) {
  if (!o.contains(key)) return;
  const Json& v = o[key];
  if (!v.is_number_unsigned()) throw ConfigError(child(path, key), "expected a non-negative integer");
  out = v.get<std::uint64_t>();
}

void read(const Json& o, const std::string& path, const char* key, bool& out) {
  if (!o.contains(key)) return;
  const Json& v = o[key];
  if (!v.is_boolean()) throw ConfigError(child(path, key), "expected true or false");
  out = v.get<bool>();
}

void read(const Json& o, const std::string& path, const char* key, std::string& out,
          std::initializer_list<const char*> choices) {
  if (!o.contains(key)) return;
  const Json& v = o[key];
  std::string list;
  for (const char* c : choices) list += std::string(list.empty() ? "" : ", ") + c;
  if (!v.is_string()) throw ConfigError(child(path, key), "expected one of " + list);
  const std::string s = v.get<std::string>();
  if (std::none_of(choices.begin(), choices.end(), [&](const char* c) { return s == c; }))
    throw ConfigError(child(path, key), "'" + s + "' is not one of " + list);
  out = s;
}

cplx read_complex(const Json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw ConfigError(path, "expected a number or [re, im]");
}

Json complex_json(cplx z) {
  if (z.imag() == 0) return z.real();
  return Json::array({z.real(), z.imag()});
}

void check(bool ok, const std::string& path, const char* what) {
  if (!ok) throw ConfigError(path, what);
}

std::vector<Bump> read_bumps(const Json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of bumps");
  std::vector<Bump> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = child(path, std::to_string(i));
    require_object(v[i], p, {"x0", "y0", "width", "amp"});
    Bump b;
    read(v[i], p, "x0", b.x0);
    read(v[i], p, "y0", b.y0);
    read(v[i], p, "width", b.width);
    check(b.width > 0, child(p, "width"), "must be positive");
    if (v[i].contains("amp")) b.amp = read_complex(v[i]["amp"], child(p, "amp"));
    out.push_back(b);
  }
  return out;
}

Json bumps_json(const std::vector<Bump>& bumps) {
  Json a = Json::array();
  for (const Bump& b : bumps) a.push_back({{"x0", b.x0}, {"y0", b.y0}, {"width", b.width}, {"amp", complex_json(b.amp)}});
  return a;
}

const std::vector<Bump> kDefaultF0 = {{0.2, -0.1, 0.45, 1.0}, {-0.3, 0.25, 0.35, 0.5}};
const std::vector<Bump> kDefaultFperp = {{-0.1, 0.2, 0.5, 0.8}};
const std::vector<Bump> kDefaultF1 = {{0.1, 0.2, 0.5, cplx(0.7, 0.3)}};

const char* family_name(SpeedModel::Family f) {
  switch (f) {
    case SpeedModel::Family::Constant:
      return "constant";
    case SpeedModel::Family::Bump:
      return "bump";
    case SpeedModel::Family::Gaussian:
      return "gaussian";
  }
  return "constant";
}

// ---- writers ----------------------------------------------------------------

std::ofstream open_out(const fs::path& path, bool binary = false) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, binary ? std::ios::binary | std::ios::out : std::ios::out);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

std::string mode_name(const std::string& stem, int n) { return stem + "_mode" + std::to_string(n); }

bool parse_double(std::string_view s, double& v) {
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

}  // namespace

// ---- config -------------------------------------------------------------------

RunConfig parse_config(const Json& j) {
  RunConfig c;
  require_object(j, "", {"domain", "speed", "optics", "transport", "flow", "source", "reconstruct", "gauge", "render",
                         "binary", "seed"});
  if (j.contains("domain")) {
    const std::string p = "/domain";
    const Json& o = require_object(j["domain"], p, {"radius", "grid_n", "boundary_n", "dir_n"});
    read(o, p, "radius", c.domain.radius);
    read(o, p, "grid_n", c.domain.grid_n);
    read(o, p, "boundary_n", c.domain.boundary_n);
    read(o, p, "dir_n", c.domain.dir_n);
    try {
      c.domain.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(p, e.what());
    }
  }
  if (j.contains("speed")) {
    const std::string p = "/speed";
    const Json& o = require_object(j["speed"], p, {"family", "c0", "eps", "width", "alpha"});
    std::string fam = family_name(c.speed.family);
    read(o, p, "family", fam, {"constant", "bump", "gaussian"});
    c.speed.family = fam == "bump" ? SpeedModel::Family::Bump
                     : fam == "gaussian" ? SpeedModel::Family::Gaussian
                                         : SpeedModel::Family::Constant;
    read(o, p, "c0", c.speed.c0);
    read(o, p, "eps", c.speed.eps);
    read(o, p, "width", c.speed.width);
    read(o, p, "alpha", c.speed.alpha);
    check(c.speed.c0 > 0, p + "/c0", "must be positive");
    check(c.speed.width > 0, p + "/width", "must be positive");
    check(c.speed.c0 + std::min(c.speed.eps, 0.0) > 0, p + "/eps", "speed must stay positive");
  }
  if (j.contains("optics")) {
    const std::string p = "/optics";
    const Json& o = require_object(j["optics"], p, {"absorption", "k", "delta"});
    if (o.contains("absorption")) {
      const std::string q = p + "/absorption";
      const Json& a = require_object(o["absorption"], q, {"base", "amp", "width"});
      read(a, q, "base", c.absorption.base);
      read(a, q, "amp", c.absorption.amp);
      read(a, q, "width", c.absorption.width);
      check(c.absorption.width > 0, q + "/width", "must be positive");
    }
    if (o.contains("k")) {
      const Json& k = o["k"];
      if (!k.is_array() || k.empty()) throw ConfigError(p + "/k", "expected a non-empty array k_0 .. k_m");
      c.k.clear();
      for (std::size_t i = 0; i < k.size(); ++i) c.k.push_back(read_complex(k[i], child(p + "/k", std::to_string(i))));
      check(c.k[0].imag() == 0, p + "/k/0", "k_0 must be real");
    }
    read(o, p, "delta", c.delta);
    check(c.delta > 0, p + "/delta", "must be positive");
  }
  if (j.contains("transport")) {
    const std::string p = "/transport";
    const Json& o = require_object(j["transport"], p, {"theta_samples", "max_degree", "tail_tol", "tol",
                                                       "max_iterations", "divergence_window"});
    TransportOptions& t = c.transport;
    read(o, p, "theta_samples", t.theta_samples);
    read(o, p, "max_degree", t.max_degree);
    read(o, p, "tail_tol", t.tail_tol);
    read(o, p, "tol", t.tol);
    read(o, p, "max_iterations", t.max_iterations);
    read(o, p, "divergence_window", t.divergence_window);
    check(t.theta_samples >= 0, p + "/theta_samples", "must be >= 0 (0 selects the default)");
    check(t.max_degree >= 0, p + "/max_degree", "must be >= 0 (0 selects the default)");
    check(t.tail_tol > 0 && t.tail_tol <= 1, p + "/tail_tol", "must be in (0, 1]");
    check(t.tol > 0, p + "/tol", "must be positive");
    check(t.max_iterations >= 1, p + "/max_iterations", "must be >= 1");
    check(t.divergence_window >= 1, p + "/divergence_window", "must be >= 1");
  }
  if (j.contains("flow")) {
    const std::string p = "/flow";
    const Json& o = require_object(j["flow"], p, {"step", "max_length"});
    read(o, p, "step", c.transport.flow.step);
    read(o, p, "max_length", c.transport.flow.max_length);
    check(c.transport.flow.step >= 0, p + "/step", "must be >= 0 (0 selects the default)");
    check(c.transport.flow.max_length >= 0, p + "/max_length", "must be >= 0 (0 selects the default)");
  }
  if (j.contains("source")) {
    const std::string p = "/source";
    const Json& o = require_object(j["source"], p, {"f0", "fperp", "f1"});
    if (o.contains("f0")) c.source.f0 = read_bumps(o["f0"], p + "/f0");
    if (o.contains("fperp")) c.source.fperp = read_bumps(o["fperp"], p + "/fperp");
    if (o.contains("f1")) c.source.f1 = read_bumps(o["f1"], p + "/f1");
  }
  if (j.contains("reconstruct")) {
    const std::string p = "/reconstruct";
    const Json& o = require_object(j["reconstruct"], p, {"backend", "case", "tikhonov", "polynomial_degree",
                                                         "holomorphic_terms", "condition_cap"});
    ReconstructSpec& r = c.reconstruct;
    std::string backend = r.backend == Backend::Lsq ? "lsq" : "oracle";
    read(o, p, "backend", backend, {"oracle", "lsq"});
    r.backend = backend == "lsq" ? Backend::Lsq : Backend::Oracle;
    read(o, p, "case", r.case_name, {"1", "2", "iso1", "iso2", "general"});
    read(o, p, "tikhonov", r.tikhonov);
    read(o, p, "polynomial_degree", r.polynomial_degree);
    read(o, p, "holomorphic_terms", r.holomorphic_terms);
    read(o, p, "condition_cap", r.condition_cap);
    check(r.tikhonov >= 0, p + "/tikhonov", "must be >= 0");
    check(r.polynomial_degree >= 0, p + "/polynomial_degree", "must be >= 0");
    check(r.holomorphic_terms >= 1, p + "/holomorphic_terms", "must be >= 1");
    check(r.condition_cap > 0, p + "/condition_cap", "must be positive");
  }
  if (j.contains("gauge")) {
    const std::string p = "/gauge";
    const Json& o = require_object(j["gauge"], p, {"degree", "trials"});
    read(o, p, "degree", c.gauge.degree);
    read(o, p, "trials", c.gauge.trials);
    check(c.gauge.degree >= 0 && c.gauge.degree <= 16, p + "/degree", "must be in [0, 16]");
    check(c.gauge.trials >= 1, p + "/trials", "must be >= 1");
  }
  if (j.contains("render")) {
    const std::string p = "/render";
    const Json& o = require_object(j["render"], p, {"field", "mode", "part", "size"});
    read(o, p, "field", c.render.field, {"u", "f", "fan"});
    read(o, p, "mode", c.render.mode);
    read(o, p, "part", c.render.part, {"abs", "arg", "re", "im"});
    read(o, p, "size", c.render.size);
    check(c.render.size >= 8 && c.render.size <= 8192, p + "/size", "must be in [8, 8192]");
  }
  read(j, "", "binary", c.binary);
  read(j, "", "seed", c.seed);
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read config " + path.string());
  Json j;
  try {
    j = Json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("/", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

Json RunConfig::to_json() const {
  Json j;
  j["domain"] = {{"radius", domain.radius},
                 {"grid_n", domain.grid_n},
                 {"boundary_n", domain.boundary_n},
                 {"dir_n", domain.dir_n}};
  j["speed"] = {{"family", family_name(speed.family)},
                {"c0", speed.c0},
                {"eps", speed.eps},
                {"width", speed.width},
                {"alpha", speed.alpha}};
  Json kk = Json::array();
  for (const cplx& v : k) kk.push_back(complex_json(v));
  j["optics"] = {{"absorption", {{"base", absorption.base}, {"amp", absorption.amp}, {"width", absorption.width}}},
                 {"k", kk},
                 {"delta", delta}};
  j["transport"] = {{"theta_samples", transport.theta_samples},
                    {"max_degree", transport.max_degree},
                    {"tail_tol", transport.tail_tol},
                    {"tol", transport.tol},
                    {"max_iterations", transport.max_iterations},
                    {"divergence_window", transport.divergence_window}};
  j["flow"] = {{"step", transport.flow.step}, {"max_length", transport.flow.max_length}};
  j["source"] = {{"f0", bumps_json(source.f0.empty() ? kDefaultF0 : source.f0)},
                 {"fperp", bumps_json(source.fperp.empty() ? kDefaultFperp : source.fperp)},
                 {"f1", bumps_json(source.f1.empty() ? kDefaultF1 : source.f1)}};
  j["reconstruct"] = {{"backend", reconstruct.backend == Backend::Lsq ? "lsq" : "oracle"},
                      {"case", reconstruct.case_name},
                      {"tikhonov", reconstruct.tikhonov},
                      {"polynomial_degree", reconstruct.polynomial_degree},
                      {"holomorphic_terms", reconstruct.holomorphic_terms},
                      {"condition_cap", reconstruct.condition_cap}};
  j["gauge"] = {{"degree", gauge.degree}, {"trials", gauge.trials}};
  j["render"] = {{"field", render.field}, {"mode", render.mode}, {"part", render.part}, {"size", render.size}};
  j["binary"] = binary;
  j["seed"] = seed;
  return j;
}

OpticalParams make_params(const RunConfig& cfg, const Grid& g) {
  OpticalParams p = OpticalParams::constant(g, cfg.absorption.base, cfg.k, cfg.delta);
  if (cfg.absorption.amp != 0) {
    const ComplexGrid bump = gaussian_sum(g, {{0, 0, cfg.absorption.width, cfg.absorption.amp}});
    for (int node : g.mask_nodes()) p.a[node] += bump[node].real();
  }
  return p;
}

ComplexGrid source_profile(const RunConfig& cfg, const Grid& g, const std::string& which) {
  if (which == "f0") return gaussian_sum(g, cfg.source.f0.empty() ? kDefaultF0 : cfg.source.f0);
  if (which == "fperp") return gaussian_sum(g, cfg.source.fperp.empty() ? kDefaultFperp : cfg.source.fperp);
  if (which == "f1") return gaussian_sum(g, cfg.source.f1.empty() ? kDefaultF1 : cfg.source.f1);
  throw InvalidArgument("unknown source profile '" + which + "'");
}

FiberField make_source(const RunConfig& cfg, const SpeedField& speed, const std::string& case_name) {
  const Grid& g = speed.grid();
  const auto& f0b = cfg.source.f0.empty() ? kDefaultF0 : cfg.source.f0;
  const auto& fpb = cfg.source.fperp.empty() ? kDefaultFperp : cfg.source.fperp;
  const auto& f1b = cfg.source.f1.empty() ? kDefaultF1 : cfg.source.f1;
  auto all_real = [](const std::vector<Bump>& b) {
    return std::all_of(b.begin(), b.end(), [](const Bump& x) { return x.amp.imag() == 0; });
  };
  const bool with_scalar = case_name == "1" || case_name == "iso1" || case_name == "general";
  const bool with_vector = case_name == "2" || case_name == "iso2" || case_name == "general";
  if (!with_scalar && !with_vector) throw InvalidArgument("unknown source case '" + case_name + "'");
  const bool real = !with_scalar || (all_real(f0b) && all_real(fpb));
  FiberField f(speed.grid_ptr(), 1, real);
  if (with_scalar) {
    f.mode(0) = gaussian_sum(g, f0b);
    FiberField q(speed.grid_ptr(), 0, real);
    q.mode(0) = gaussian_sum(g, fpb);
    f += apply_X_perp(q, speed);
  }
  if (with_vector) {
    const ComplexGrid v = gaussian_sum(g, f1b);
    for (int node : g.mask_nodes()) {
      f.mode(1)[node] += v[node];
      f.mode(-1)[node] += std::conj(v[node]);
    }
  }
  return f;
}

// ---- serialization ----------------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::vector<fs::path> write_field_csv(const fs::path& dir, const std::string& stem, const FiberField& u) {
  const Grid& g = u.grid();
  std::vector<fs::path> out;
  for (int n = -u.degree(); n <= u.degree(); ++n) {
    const fs::path path = dir / (mode_name(stem, n) + ".csv");
    std::ofstream f = open_out(path);
    f << "x,y,Re,Im\n";
    const ComplexGrid& m = u.mode(n);
    for (int node : g.mask_nodes())
      f << format_double(g.node_x(node)) << ',' << format_double(g.node_y(node)) << ',' << format_double(m[node].real())
        << ',' << format_double(m[node].imag()) << '\n';
    finish(f, path);
    out.push_back(path);
  }
  return out;
}

std::vector<fs::path> write_field_binary(const fs::path& dir, const std::string& stem, const FiberField& u) {
  const Grid& g = u.grid();
  std::vector<fs::path> out;
  Json modes = Json::array();
  std::vector<double> buf(2 * g.size());
  for (int n = -u.degree(); n <= u.degree(); ++n) {
    const std::string name = mode_name(stem, n) + ".f64";
    const fs::path path = dir / name;
    const ComplexGrid& m = u.mode(n);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const bool in = g.in_mask(static_cast<int>(k));
      buf[2 * k] = in ? m[k].real() : 0.0;
      buf[2 * k + 1] = in ? m[k].imag() : 0.0;
    }
    if constexpr (std::endian::native != std::endian::little) {
      for (double& v : buf) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        bits = __builtin_bswap64(bits);
        v = std::bit_cast<double>(bits);
      }
    }
    std::ofstream f = open_out(path, true);
    f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(double)));
    finish(f, path);
    out.push_back(path);
    modes.push_back({{"mode", n}, {"file", name}});
  }
  Json side;
  side["format"] = "float64-le";
  side["layout"] = "row-major [row j][column i][Re, Im]; node (i, j) is at x = x0 + i h, y = y0 + j h";
  side["grid_n"] = g.n();
  side["x0"] = -g.radius();
  side["y0"] = -g.radius();
  side["h"] = g.h();
  side["domain"] = {{"shape", "disk"}, {"radius", g.radius()}};
  side["outside"] = "nodes outside the disk hold 0";
  side["degree"] = u.degree();
  side["real"] = u.real();
  side["modes"] = modes;
  const fs::path sp = dir / (stem + ".json");
  write_json(sp, side);
  out.push_back(sp);
  return out;
}

FiberField read_field_csv(const fs::path& dir, const std::string& stem, const GridPtr& g, int degree, bool real) {
  FiberField u(g, degree, real);
  const double R = g->radius(), h = g->h();
  for (int n = -degree; n <= degree; ++n) {
    const fs::path path = dir / (mode_name(stem, n) + ".csv");
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "x,y,Re,Im") throw IoError(path.string() + ": bad header");
    int lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      double v[4];
      std::size_t start = 0;
      for (int c = 0; c < 4; ++c) {
        const std::size_t end = c < 3 ? line.find(',', start) : line.size();
        if (end == std::string::npos || !parse_double(std::string_view(line).substr(start, end - start), v[c]))
          throw IoError(path.string() + ":" + std::to_string(lineno) + ": malformed row");
        start = end + 1;
      }
      const int i = static_cast<int>(std::lround((v[0] + R) / h)), j = static_cast<int>(std::lround((v[1] + R) / h));
      if (!g->in_mask(i, j)) throw IoError(path.string() + ":" + std::to_string(lineno) + ": point outside the grid");
      u.mode(n)[g->flat(i, j)] = cplx(v[2], v[3]);
    }
  }
  return u;
}

fs::path write_grid_csv(const fs::path& path, const Grid& g, const ComplexGrid& f) {
  std::ofstream out = open_out(path);
  out << "x,y,Re,Im\n";
  for (int node : g.mask_nodes())
    out << format_double(g.node_x(node)) << ',' << format_double(g.node_y(node)) << ','
        << format_double(f[node].real()) << ',' << format_double(f[node].imag()) << '\n';
  finish(out, path);
  return path;
}

void write_fan_csv(const fs::path& path, const BoundaryFan& fan) {
  std::ofstream out = open_out(path);
  out << "s,theta_in,mu,tau,Re,Im\n";
  for (std::size_t i = 0; i < fan.size(); ++i) {
    const FanEntry& e = fan.entries[i];
    const double tau = i < fan.tau.size() ? fan.tau[i] : 0.0;
    const cplx v = i < fan.values.size() ? fan.values[i] : cplx(0);
    out << format_double(e.s) << ',' << format_double(e.theta) << ',' << format_double(e.mu) << ','
        << format_double(tau) << ',' << format_double(v.real()) << ',' << format_double(v.imag()) << '\n';
  }
  finish(out, path);
}

void write_path_csv(const fs::path& path, const GeodesicPath& p) {
  std::ofstream out = open_out(path);
  out << "t,x,y,theta\n";
  for (std::size_t i = 0; i < p.points.size(); ++i)
    out << format_double(p.times[i]) << ',' << format_double(p.points[i].x) << ',' << format_double(p.points[i].y)
        << ',' << format_double(p.points[i].theta) << '\n';
  finish(out, path);
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

void write_pgm(const fs::path& path, int width, int height, const std::vector<double>& values, double lo, double hi) {
  if (width <= 0 || height <= 0 || values.size() != static_cast<std::size_t>(width) * height)
    throw InvalidArgument("pgm: image size does not match the value count");
  std::string px(values.size(), '\0');
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double t = std::isfinite(values[k]) ? std::clamp((values[k] - lo) / span, 0.0, 1.0) : 0.0;
    px[k] = static_cast<char>(static_cast<unsigned char>(std::lround(255 * t)));
  }
  std::ofstream out = open_out(path, true);
  out << "P5\n" << width << ' ' << height << "\n255\n";
  out.write(px.data(), static_cast<std::streamsize>(px.size()));
  finish(out, path);
}

namespace {

double part_of(cplx v, const std::string& part) {
  if (part == "abs") return std::abs(v);
  if (part == "arg") return std::arg(v);
  if (part == "re") return v.real();
  if (part == "im") return v.imag();
  throw InvalidArgument("unknown render part '" + part + "'");
}

}  // namespace

std::vector<double> raster_field(const Grid& g, const ComplexGrid& f, const std::string& part, int size) {
  if (size < 1) throw InvalidArgument("raster size must be positive");
  const ComplexGrid ext = extend(g, f);
  const double R = g.radius();
  std::vector<double> img(static_cast<std::size_t>(size) * size, 0.0);
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) {
      const double x = -R + (c + 0.5) * 2 * R / size, y = R - (r + 0.5) * 2 * R / size;
      if (x * x + y * y >= R * R) continue;
      img[static_cast<std::size_t>(r) * size + c] = part_of(interpolate(g, std::span<const cplx>(ext), x, y), part);
    }
  return img;
}

std::vector<double> raster_fan(const BoundaryFan& fan, const std::string& part) {
  std::vector<double> img(static_cast<std::size_t>(fan.boundary_n) * fan.dir_n, 0.0);
  for (std::size_t i = 0; i < fan.size(); ++i) {
    const FanEntry& e = fan.entries[i];
    img[static_cast<std::size_t>(e.arc_index) * fan.dir_n + e.dir_index] = part_of(fan.values[i], part);
  }
  return img;
}

std::pair<double, double> render_range(const std::vector<double>& values, const std::string& part) {
  if (part == "arg") return {-M_PI, M_PI};
  double m = 0;
  for (double v : values)
    if (std::isfinite(v)) m = std::max(m, std::abs(v));
  if (m == 0) m = 1;
  if (part == "abs") return {0.0, m};
  return {-m, m};
}

}  // namespace rts
