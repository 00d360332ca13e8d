// Cartesian node grid over the disk domain, with the stencils every module shares.
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace rts {

using cplx = std::complex<double>;
using RealGrid = std::vector<double>;
using ComplexGrid = std::vector<cplx>;

/// Domain: a disk of the given radius sampled on a grid_n x grid_n node grid,
/// with boundary_n arclength samples and dir_n direction samples for fans.
struct DomainSpec {
  double radius = 1.0;
  int grid_n = 64;
  int boundary_n = 128;
  int dir_n = 64;

  /// Throws InvalidArgument when an invariant is violated.
  void validate() const;
};

/// How a stencil treats the edge of the mask.
enum class Flavor {
  Free,          // one-sided differences using mask nodes only
  ZeroBoundary,  // field vanishes on the circle; arms end at the circle (Shortley-Weller)
};

struct StencilEntry {
  int node;
  double weight;
};

/// Up to four entries; the circle point of a zero-boundary arm carries no node.
struct Stencil {
  std::array<StencilEntry, 4> e{};
  int count = 0;
  void add(int node, double w) { e[count++] = {node, w}; }
};

class Grid {
 public:
  explicit Grid(const DomainSpec& spec);

  const DomainSpec& spec() const { return spec_; }
  int n() const { return n_; }
  double radius() const { return spec_.radius; }
  double h() const { return h_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }

  double x(int i) const { return -spec_.radius + i * h_; }
  double y(int j) const { return -spec_.radius + j * h_; }
  int flat(int i, int j) const { return j * n_ + i; }
  int col(int node) const { return node % n_; }
  int row(int node) const { return node / n_; }
  double node_x(int node) const { return x(col(node)); }
  double node_y(int node) const { return y(row(node)); }

  bool in_mask(int node) const { return mask_[node] != 0; }
  bool in_mask(int i, int j) const {
    return i >= 0 && j >= 0 && i < n_ && j < n_ && mask_[flat(i, j)] != 0;
  }
  /// Flat indices of the nodes strictly inside the circle, in row-major order.
  const std::vector<int>& mask_nodes() const { return mask_nodes_; }
  /// Position of a node inside mask_nodes(), or -1.
  int slot(int node) const { return slot_[node]; }

  /// Area quadrature weight of a mask node (cell-disk intersection, with the
  /// slivers of outside cells folded onto the nearest mask node). Sums to pi R^2.
  double area_weight(int node) const { return area_[node]; }

  /// Distance from a mask node to the circle along +x, -x, +y, -y, capped at h.
  const std::array<double, 4>& arms(int node) const { return arms_[slot_[node]]; }

  /// First derivative along axis (0 = x, 1 = y) at a mask node: fourth-order
  /// central where two nodes on each side are in the mask, else the flavor's
  /// boundary-adapted three-point rule.
  Stencil derivative_stencil(int node, int axis, Flavor flavor) const;

  /// Outside nodes within the extension band, ordered by layer.
  const std::vector<int>& band_nodes() const { return band_nodes_; }

 private:
  DomainSpec spec_;
  int n_;
  double h_;
  std::vector<unsigned char> mask_;
  std::vector<int> mask_nodes_;
  std::vector<int> slot_;
  std::vector<double> area_;
  std::vector<std::array<double, 4>> arms_;
  std::vector<int> band_nodes_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(const DomainSpec& spec);

// ---- grid field utilities -------------------------------------------------

/// Zero every value outside the mask.
template <class T>
void clear_outside(const Grid& g, std::vector<T>& f) {
  for (std::size_t k = 0; k < f.size(); ++k)
    if (!g.in_mask(static_cast<int>(k))) f[k] = T{};
}

/// Fill the outside band by layered linear extrapolation from the mask, so
/// that bilinear interpolation is second order up to the circle.
RealGrid extend(const Grid& g, const RealGrid& f);
ComplexGrid extend(const Grid& g, const ComplexGrid& f);

/// Bilinear interpolation of an extended field; (x, y) must lie in the disk.
double interpolate(const Grid& g, std::span<const double> f, double x, double y);
cplx interpolate(const Grid& g, std::span<const cplx> f, double x, double y);

/// d/dx and d/dy at mask nodes; zero outside.
ComplexGrid diff(const Grid& g, const ComplexGrid& f, int axis, Flavor flavor);
/// Complex derivative d = (d/dx - i d/dy)/2 (conj = false) or dbar (conj = true).
ComplexGrid wirtinger(const Grid& g, const ComplexGrid& f, bool conj, Flavor flavor);

/// Weighted inner product sum_mask w * f * conj(g) * weight(node).
cplx inner(const Grid& g, const ComplexGrid& f, const ComplexGrid& h, const RealGrid* weight = nullptr);
double norm2(const Grid& g, const ComplexGrid& f, const RealGrid* weight = nullptr);

ComplexGrid to_complex(const RealGrid& f);

}  // namespace rts
