#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "perimlab/geometry.hpp"

namespace perimlab {

/// Uniform-grid index over a polygon boundary.
///
/// Cells that no edge touches carry a definite inside/outside label obtained by
/// scanline parity at the grid nodes. Cells that edges touch ("boundary cells")
/// keep a CSR list of those edges; membership there is decided locally by counting
/// crossings of the segment from the query point to a cell corner whose parity is
/// known and which no edge passes near. Distance queries expand outward ring by
/// ring until the remaining rings provably cannot improve the best hit.
class PolygonLocator {
 public:
  PolygonLocator(const std::vector<Vec2>& vertices, const Box& bbox);

  bool contains(Vec2 p) const;
  double distance(Vec2 p) const;
  bool within(Vec2 p, double t) const;

  /// First pair of non-adjacent edges that intersect, or {-1,-1} if the loop is simple.
  std::pair<std::int64_t, std::int64_t> first_intersection() const;

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double cell_w() const { return cw_; }
  double cell_h() const { return ch_; }
  const Box& grid_box() const { return gbox_; }
  bool cell_has_edges(std::uint32_t cell) const { return (labels_[cell] & 3u) == kBoundary; }
  bool cell_inside(std::uint32_t cell) const { return (labels_[cell] & 3u) == kInside; }
  std::uint32_t cell_index(int ix, int iy) const {
    return static_cast<std::uint32_t>(iy) * static_cast<std::uint32_t>(nx_) +
           static_cast<std::uint32_t>(ix);
  }
  Box cell_rect(std::uint32_t cell) const;
  /// Cell indices of every boundary cell whose rectangle meets `region`.
  std::vector<std::uint32_t> boundary_cells_in(const Box& region) const;

 private:
  static constexpr std::uint8_t kOutside = 0;
  static constexpr std::uint8_t kInside = 1;
  static constexpr std::uint8_t kBoundary = 2;

  int cell_ix(double x) const;
  int cell_iy(double y) const;
  double seg_dist2(Vec2 p, std::uint32_t e) const;
  double scan_cell_dist2(std::uint32_t cell, Vec2 p, double bound2) const;
  bool node_parity(int jx, int jy) const { return parity_[node_id(jx, jy)]; }
  bool node_dirty(int jx, int jy) const { return dirty_[node_id(jx, jy)]; }
  std::size_t node_id(int jx, int jy) const {
    return static_cast<std::size_t>(jy) * (nx_ + 1) + jx;
  }
  bool contains_slow(Vec2 p) const;

  std::vector<Vec2> v_;
  Box gbox_;
  int nx_ = 0, ny_ = 0;
  double cw_ = 0, ch_ = 0;
  // labels_: bits 0-1 cell label, bits 2-3 chosen clean corner, bit 4 no-clean-corner flag
  std::vector<std::uint8_t> labels_;
  std::vector<std::uint32_t> offs_;
  std::vector<std::uint32_t> edges_;
  std::vector<bool> parity_;
  std::vector<bool> dirty_;
};

}  // namespace perimlab
