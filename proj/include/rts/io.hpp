// Run configuration (JSON) and deterministic exports: CSV with shortest
// round-trip decimals, raw float64 blocks with a JSON sidecar, run manifests
// and grayscale PGM renders.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rts/profiles.hpp"
#include "rts/reconstruction.hpp"

namespace rts {

using Json = nlohmann::ordered_json;

/// Invalid configuration; the message starts with the JSON pointer of the offending value.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& path, const std::string& what) : InvalidArgument(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// a(x) = base + amp exp(-|x|^2 / width^2).
struct AbsorptionSpec {
  double base = 0.6, amp = 0.0, width = 0.5;
};

/// Source profiles as gaussian bumps; empty lists take built-in defaults.
struct SourceSpec {
  std::vector<Bump> f0, fperp, f1;
};

struct ReconstructSpec {
  Backend backend = Backend::Oracle;
  std::string case_name = "1";  // 1, 2, iso1, iso2, general
  double tikhonov = 1e-6;
  int polynomial_degree = 16;
  int holomorphic_terms = 12;
  double condition_cap = 1e14;
};

struct GaugeSpec {
  int degree = 2;   // gauge-check: degree of p; descent-probe: source degree m
  int trials = 20;
};

struct RenderSpec {
  std::string field = "u";   // u, f, fan
  int mode = 0;
  std::string part = "abs";  // abs, arg, re, im
  int size = 256;
};

struct RunConfig {
  DomainSpec domain;
  SpeedModel speed;
  AbsorptionSpec absorption;
  std::vector<cplx> k = {0.2, 0.08, 0.04};  // k_0 .. k_m (k_{-n} = conj k_n)
  double delta = 0.1;
  TransportOptions transport;
  SourceSpec source;
  ReconstructSpec reconstruct;
  GaugeSpec gauge;
  RenderSpec render;
  bool binary = false;  // also write float64 blocks
  std::uint64_t seed = 1;

  /// Effective configuration, every field spelled out.
  Json to_json() const;
};

/// Parse and validate; unknown keys and wrong types raise ConfigError with their path.
RunConfig parse_config(const Json& j);
/// Read a config file (IoError when unreadable, ConfigError when malformed).
RunConfig load_config(const std::filesystem::path& path);

OpticalParams make_params(const RunConfig& cfg, const Grid& g);
/// The configured source for a reconstruction case: f0 + X_perp f_perp (1, iso1),
/// a vector field f1 (2, iso2), or f0 + f1 + X_perp f_perp (general).
FiberField make_source(const RunConfig& cfg, const SpeedField& speed, const std::string& case_name);
/// One configured profile ("f0", "fperp" or "f1") on the grid, defaults applied.
ComplexGrid source_profile(const RunConfig& cfg, const Grid& g, const std::string& which);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

/// One CSV per mode, stem_mode<n>.csv (n signed, e.g. u_mode-1.csv), columns x,y,Re,Im
/// over the mask nodes in row-major order. Returns the written paths.
std::vector<std::filesystem::path> write_field_csv(const std::filesystem::path& dir, const std::string& stem,
                                                   const FiberField& u);
/// Raw little-endian float64 (Re, Im) per grid node, row-major n x n, one file per
/// mode (stem_mode<n>.f64), plus the sidecar stem.json describing the layout.
std::vector<std::filesystem::path> write_field_binary(const std::filesystem::path& dir, const std::string& stem,
                                                      const FiberField& u);
/// Read back the CSV files written by write_field_csv for modes -N..N.
FiberField read_field_csv(const std::filesystem::path& dir, const std::string& stem, const GridPtr& g, int degree,
                          bool real);
/// Scalar grid as a single CSV x,y,Re,Im.
std::filesystem::path write_grid_csv(const std::filesystem::path& path, const Grid& g, const ComplexGrid& f);

/// Columns s,theta_in,mu,tau,Re,Im, arc-major.
void write_fan_csv(const std::filesystem::path& path, const BoundaryFan& fan);
/// Columns t,x,y,theta.
void write_path_csv(const std::filesystem::path& path, const GeodesicPath& p);

void write_json(const std::filesystem::path& path, const Json& j);

/// Grayscale binary PGM (P5), row 0 at the top; values are mapped linearly from
/// [lo, hi] to 0..255 and clamped.
void write_pgm(const std::filesystem::path& path, int width, int height, const std::vector<double>& values, double lo,
               double hi);
/// Resample a grid field (|.|, arg, Re or Im of one mode) onto a size x size image of
/// the disk (bilinear on the extended field, top row at y = R); outside points are 0.
std::vector<double> raster_field(const Grid& g, const ComplexGrid& f, const std::string& part, int size);
/// Fan values as an image: rows are arc samples, columns direction samples.
std::vector<double> raster_fan(const BoundaryFan& fan, const std::string& part);
/// Display range for a raster: [0, max] for abs, [-pi, pi] for arg, symmetric otherwise.
std::pair<double, double> render_range(const std::vector<double>& values, const std::string& part);

}  // namespace rts
