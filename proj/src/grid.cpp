#include "rts/grid.hpp"

#include <algorithm>
#include <cmath>

#include "rts/errors.hpp"

namespace rts {

void DomainSpec::validate() const {
  if (!(radius > 0)) throw InvalidArgument("domain.radius must be positive");
  if (grid_n < 16) throw InvalidArgument("domain.grid_n must be >= 16");
  if (boundary_n < 2 || boundary_n % 2) throw InvalidArgument("domain.boundary_n must be even and >= 2");
  if (dir_n < 2 || dir_n % 2) throw InvalidArgument("domain.dir_n must be even and >= 2");
}

namespace {

constexpr int kBandLayers = 3;
constexpr int kSubsamples = 16;

template <class T>
std::vector<T> extend_impl(const Grid& g, const std::vector<T>& f) {
  std::vector<T> out(f);
  const int n = g.n();
  std::vector<unsigned char> known(g.size(), 0);
  for (int node : g.mask_nodes()) known[node] = 1;
  clear_outside(g, out);

  const int di[4] = {1, -1, 0, 0};
  const int dj[4] = {0, 0, 1, -1};
  const int ddi[4] = {1, 1, -1, -1};
  const int ddj[4] = {1, -1, 1, -1};
  std::vector<std::pair<int, T>> layer;
  for (int pass = 0; pass < kBandLayers; ++pass) {
    layer.clear();
    for (int node = 0; node < static_cast<int>(g.size()); ++node) {
      if (known[node]) continue;
      const int i = g.col(node), j = g.row(node);
      T acc{};
      int cnt = 0;
      auto try_dir = [&](int a, int b) {
        const int i1 = i + a, j1 = j + b, i2 = i + 2 * a, j2 = j + 2 * b;
        if (i1 < 0 || j1 < 0 || i1 >= n || j1 >= n) return;
        const int n1 = g.flat(i1, j1);
        if (!known[n1]) return;
        if (i2 >= 0 && j2 >= 0 && i2 < n && j2 < n && known[g.flat(i2, j2)])
          acc += 2.0 * out[n1] - out[g.flat(i2, j2)];
        else
          acc += out[n1];
        ++cnt;
      };
      for (int d = 0; d < 4; ++d) try_dir(di[d], dj[d]);
      if (cnt == 0)
        for (int d = 0; d < 4; ++d) try_dir(ddi[d], ddj[d]);
      if (cnt > 0) layer.emplace_back(node, acc / static_cast<double>(cnt));
    }
    for (auto& [node, v] : layer) {
      out[node] = v;
      known[node] = 1;
    }
  }
  return out;
}

template <class T>
T interpolate_impl(const Grid& g, std::span<const T> f, double x, double y) {
  const double h = g.h();
  const double R = g.radius();
  double u = (x + R) / h, v = (y + R) / h;
  int i = static_cast<int>(std::floor(u)), j = static_cast<int>(std::floor(v));
  i = std::clamp(i, 0, g.n() - 2);
  j = std::clamp(j, 0, g.n() - 2);
  const double fx = u - i, fy = v - j;
  const int base = g.flat(i, j);
  const int n = g.n();
  return (1 - fy) * ((1 - fx) * f[base] + fx * f[base + 1]) +
         fy * ((1 - fx) * f[base + n] + fx * f[base + n + 1]);
}

}  // namespace

Grid::Grid(const DomainSpec& spec) : spec_(spec), n_(spec.grid_n) {
  spec_.validate();
  const double R = spec_.radius;
  h_ = 2.0 * R / (n_ - 1);
  mask_.assign(size(), 0);
  slot_.assign(size(), -1);
  area_.assign(size(), 0.0);
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i) {
      const double r2 = x(i) * x(i) + y(j) * y(j);
      if (r2 < R * R * (1.0 - 1e-12)) {
        const int node = flat(i, j);
        mask_[node] = 1;
        slot_[node] = static_cast<int>(mask_nodes_.size());
        mask_nodes_.push_back(node);
      }
    }
  if (mask_nodes_.empty()) throw InvalidArgument("domain mask is empty");

  arms_.resize(mask_nodes_.size());
  for (int node : mask_nodes_) {
    const double px = node_x(node), py = node_y(node);
    const double hx = std::sqrt(std::max(0.0, R * R - py * py));
    const double hy = std::sqrt(std::max(0.0, R * R - px * px));
    auto& a = arms_[slot_[node]];
    a[0] = std::min(h_, hx - px);
    a[1] = std::min(h_, hx + px);
    a[2] = std::min(h_, hy - py);
    a[3] = std::min(h_, hy + py);
    for (double& v : a) v = std::max(v, 1e-9 * h_);
  }

  // Cell/disk intersection areas by subsampling; slivers of outside cells go to
  // the nearest mask neighbour.
  for (int node = 0; node < static_cast<int>(size()); ++node) {
    const double cx = node_x(node), cy = node_y(node);
    if (std::hypot(cx, cy) > R + h_) continue;
    int inside = 0;
    for (int a = 0; a < kSubsamples; ++a)
      for (int b = 0; b < kSubsamples; ++b) {
        const double sx = cx + h_ * ((a + 0.5) / kSubsamples - 0.5);
        const double sy = cy + h_ * ((b + 0.5) / kSubsamples - 0.5);
        if (sx * sx + sy * sy < R * R) ++inside;
      }
    const double w = h_ * h_ * inside / double(kSubsamples * kSubsamples);
    if (w == 0) continue;
    if (mask_[node]) {
      area_[node] += w;
      continue;
    }
    int best = -1;
    double bestd = 1e300;
    const int i = col(node), j = row(node);
    for (int dj = -2; dj <= 2; ++dj)
      for (int di = -2; di <= 2; ++di)
        if (in_mask(i + di, j + dj)) {
          const double d = di * di + dj * dj;
          if (d < bestd) {
            bestd = d;
            best = flat(i + di, j + dj);
          }
        }
    if (best >= 0) area_[best] += w;
  }
  // Normalise the residual subsampling error so the total is exactly pi R^2.
  double total = 0;
  for (int node : mask_nodes_) total += area_[node];
  const double scale = M_PI * R * R / total;
  for (int node : mask_nodes_) area_[node] *= scale;

  // Band nodes for extension: outside nodes within kBandLayers cells of the mask.
  for (int node = 0; node < static_cast<int>(size()); ++node) {
    if (mask_[node]) continue;
    const double r = std::hypot(node_x(node), node_y(node));
    if (r < R + (kBandLayers + 0.5) * h_) band_nodes_.push_back(node);
  }
}

GridPtr make_grid(const DomainSpec& spec) { return std::make_shared<const Grid>(spec); }

Stencil Grid::derivative_stencil(int node, int axis, Flavor flavor) const {
  Stencil s;
  const int i = col(node), j = row(node);
  const int di = axis == 0 ? 1 : 0, dj = axis == 0 ? 0 : 1;
  const bool fwd = in_mask(i + di, j + dj);
  const bool bwd = in_mask(i - di, j - dj);
  const int nf = fwd ? flat(i + di, j + dj) : -1;
  const int nb = bwd ? flat(i - di, j - dj) : -1;

  if (fwd && bwd && in_mask(i + 2 * di, j + 2 * dj) && in_mask(i - 2 * di, j - 2 * dj)) {
    s.add(flat(i + 2 * di, j + 2 * dj), -1.0 / (12 * h_));
    s.add(nf, 8.0 / (12 * h_));
    s.add(nb, -8.0 / (12 * h_));
    s.add(flat(i - 2 * di, j - 2 * dj), 1.0 / (12 * h_));
    return s;
  }

  if (flavor == Flavor::ZeroBoundary) {
    const auto& a = arms(node);
    const double hr = fwd ? h_ : a[axis == 0 ? 0 : 2];
    const double hl = bwd ? h_ : a[axis == 0 ? 1 : 3];
    // Three-point non-uniform first derivative; circle points carry the value zero.
    const double wl = -hr / (hl * (hl + hr));
    const double w0 = (hr - hl) / (hl * hr);
    const double wr = hl / (hr * (hl + hr));
    if (bwd) s.add(nb, wl);
    s.add(node, w0);
    if (fwd) s.add(nf, wr);
    return s;
  }

  if (fwd && bwd) {
    s.add(nf, 0.5 / h_);
    s.add(nb, -0.5 / h_);
  } else if (bwd) {
    if (in_mask(i - 2 * di, j - 2 * dj)) {
      s.add(node, 1.5 / h_);
      s.add(nb, -2.0 / h_);
      s.add(flat(i - 2 * di, j - 2 * dj), 0.5 / h_);
    } else {
      s.add(node, 1.0 / h_);
      s.add(nb, -1.0 / h_);
    }
  } else if (fwd) {
    if (in_mask(i + 2 * di, j + 2 * dj)) {
      s.add(node, -1.5 / h_);
      s.add(nf, 2.0 / h_);
      s.add(flat(i + 2 * di, j + 2 * dj), -0.5 / h_);
    } else {
      s.add(node, -1.0 / h_);
      s.add(nf, 1.0 / h_);
    }
  }
  return s;
}

RealGrid extend(const Grid& g, const RealGrid& f) { return extend_impl(g, f); }
ComplexGrid extend(const Grid& g, const ComplexGrid& f) { return extend_impl(g, f); }

double interpolate(const Grid& g, std::span<const double> f, double x, double y) {
  return interpolate_impl(g, f, x, y);
}
cplx interpolate(const Grid& g, std::span<const cplx> f, double x, double y) {
  return interpolate_impl(g, f, x, y);
}

ComplexGrid diff(const Grid& g, const ComplexGrid& f, int axis, Flavor flavor) {
  ComplexGrid out(g.size());
  for (int node : g.mask_nodes()) {
    const Stencil s = g.derivative_stencil(node, axis, flavor);
    cplx acc = 0;
    for (int k = 0; k < s.count; ++k) acc += s.e[k].weight * f[s.e[k].node];
    out[node] = acc;
  }
  return out;
}

ComplexGrid wirtinger(const Grid& g, const ComplexGrid& f, bool conj, Flavor flavor) {
  const ComplexGrid fx = diff(g, f, 0, flavor);
  const ComplexGrid fy = diff(g, f, 1, flavor);
  const cplx iy = conj ? cplx(0, 1) : cplx(0, -1);
  ComplexGrid out(g.size());
  for (int node : g.mask_nodes()) out[node] = 0.5 * (fx[node] + iy * fy[node]);
  return out;
}

cplx inner(const Grid& g, const ComplexGrid& f, const ComplexGrid& h, const RealGrid* weight) {
  cplx acc = 0;
  for (int node : g.mask_nodes()) {
    const double w = g.area_weight(node) * (weight ? (*weight)[node] : 1.0);
    acc += w * f[node] * std::conj(h[node]);
  }
  return acc;
}

double norm2(const Grid& g, const ComplexGrid& f, const RealGrid* weight) {
  return std::sqrt(std::max(0.0, inner(g, f, f, weight).real()));
}

ComplexGrid to_complex(const RealGrid& f) { return ComplexGrid(f.begin(), f.end()); }

}  // namespace rts
