#include "perimlab/locator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace perimlab {

namespace {

// Distance squared from p to segment [a, b].
double point_seg_dist2(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  const double len2 = norm2(d);
  double t = len2 > 0.0 ? dot(p - a, d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Vec2 q = {a.x + t * d.x, a.y + t * d.y};
  return norm2(p - q);
}

double rect_dist2(Vec2 p, const Box& r) {
  const double dx = std::max({r.lo.x - p.x, 0.0, p.x - r.hi.x});
  const double dy = std::max({r.lo.y - p.y, 0.0, p.y - r.hi.y});
  return dx * dx + dy * dy;
}

bool strictly_straddles(double d1, double d2) { return (d1 > 0.0) != (d2 > 0.0) && d1 != 0.0 && d2 != 0.0; }

bool on_segment_collinear(Vec2 p, Vec2 a, Vec2 b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

// Full segment intersection test including touching and collinear overlap.
bool segments_meet(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const double d1 = cross(q2 - q1, p1 - q1);
  const double d2 = cross(q2 - q1, p2 - q1);
  const double d3 = cross(p2 - p1, q1 - p1);
  const double d4 = cross(p2 - p1, q2 - p1);
  if (strictly_straddles(d1, d2) && strictly_straddles(d3, d4)) return true;
  if (d1 == 0.0 && on_segment_collinear(p1, q1, q2)) return true;
  if (d2 == 0.0 && on_segment_collinear(p2, q1, q2)) return true;
  if (d3 == 0.0 && on_segment_collinear(q1, p1, p2)) return true;
  if (d4 == 0.0 && on_segment_collinear(q2, p1, p2)) return true;
  return false;
}

}  // namespace

int PolygonLocator::cell_ix(double x) const {
  int i = static_cast<int>(std::floor((x - gbox_.lo.x) / cw_));
  return std::clamp(i, 0, nx_ - 1);
}

int PolygonLocator::cell_iy(double y) const {
  int i = static_cast<int>(std::floor((y - gbox_.lo.y) / ch_));
  return std::clamp(i, 0, ny_ - 1);
}

Box PolygonLocator::cell_rect(std::uint32_t cell) const {
  const int ix = static_cast<int>(cell % static_cast<std::uint32_t>(nx_));
  const int iy = static_cast<int>(cell / static_cast<std::uint32_t>(nx_));
  const Vec2 lo = {gbox_.lo.x + ix * cw_, gbox_.lo.y + iy * ch_};
  return {lo, {lo.x + cw_, lo.y + ch_}};
}

PolygonLocator::PolygonLocator(const std::vector<Vec2>& vertices, const Box& bbox) : v_(vertices) {
  const std::size_t n = v_.size();
  if (n < 3) throw GeometryError("locator: need at least 3 vertices");

  const double w = std::max(bbox.width(), 1e-300);
  const double h = std::max(bbox.height(), 1e-300);
  const double margin = 1e-6 * std::max(w, h) + 1e-12;
  gbox_ = bbox.inflated(margin);

  const double target = std::clamp(4.0 * static_cast<double>(n), 256.0, 1.6e7);
  const double aspect = gbox_.width() / gbox_.height();
  ny_ = std::max(1, static_cast<int>(std::lround(std::sqrt(target / aspect))));
  nx_ = std::max(1, static_cast<int>(std::lround(target / ny_)));
  cw_ = gbox_.width() / nx_;
  ch_ = gbox_.height() / ny_;
  const std::size_t ncells = static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);

  // Register each edge in every cell its row-slab projection touches. Conservative:
  // a cell is registered whenever the edge meets the cell's closed rectangle.
  offs_.assign(ncells + 1, 0);
  auto for_edge_cells = [&](std::uint32_t e, auto&& emit) {
    const Vec2 a = v_[e], b = v_[(e + 1) % n];
    const int iy0 = cell_iy(std::min(a.y, b.y));
    const int iy1 = cell_iy(std::max(a.y, b.y));
    for (int iy = iy0; iy <= iy1; ++iy) {
      double xlo, xhi;
      if (a.y == b.y) {
        xlo = std::min(a.x, b.x);
        xhi = std::max(a.x, b.x);
      } else {
        const double ylo = gbox_.lo.y + iy * ch_;
        const double yhi = ylo + ch_;
        double t0 = std::clamp((ylo - a.y) / (b.y - a.y), 0.0, 1.0);
        double t1 = std::clamp((yhi - a.y) / (b.y - a.y), 0.0, 1.0);
        const double x0 = a.x + t0 * (b.x - a.x);
        const double x1 = a.x + t1 * (b.x - a.x);
        xlo = std::min(x0, x1);
        xhi = std::max(x0, x1);
      }
      const int ix0 = cell_ix(xlo);
      const int ix1 = cell_ix(xhi);
      for (int ix = ix0; ix <= ix1; ++ix) emit(cell_index(ix, iy));
    }
  };
  for (std::uint32_t e = 0; e < n; ++e)
    for_edge_cells(e, [&](std::uint32_t c) { ++offs_[c + 1]; });
  for (std::size_t c = 0; c < ncells; ++c) offs_[c + 1] += offs_[c];
  edges_.resize(offs_[ncells]);
  {
    std::vector<std::uint32_t> cursor(offs_.begin(), offs_.end() - 1);
    for (std::uint32_t e = 0; e < n; ++e)
      for_edge_cells(e, [&](std::uint32_t c) { edges_[cursor[c]++] = e; });
  }

  // Node parity by scanline: for each node row, collect x-crossings of edges whose
  // y-span straddles the row (half-open at the top endpoint, horizontals excluded).
  const std::size_t nnodes = static_cast<std::size_t>(nx_ + 1) * static_cast<std::size_t>(ny_ + 1);
  parity_.assign(nnodes, false);
  dirty_.assign(nnodes, false);
  const double eps_x = 1e-9 * cw_;

  std::vector<std::uint32_t> row_count(ny_ + 2, 0);
  auto node_rows = [&](std::uint32_t e, auto&& emit) {
    const Vec2 a = v_[e], b = v_[(e + 1) % n];
    if (a.y == b.y) return;
    const double ymin = std::min(a.y, b.y), ymax = std::max(a.y, b.y);
    int j0 = static_cast<int>(std::ceil((ymin - gbox_.lo.y) / ch_ - 1e-12));
    j0 = std::max(j0, 0);
    while (gbox_.lo.y + j0 * ch_ < ymin) ++j0;
    int j1 = static_cast<int>(std::floor((ymax - gbox_.lo.y) / ch_ + 1e-12));
    j1 = std::min(j1, ny_);
    while (j1 >= j0 && gbox_.lo.y + j1 * ch_ >= ymax) --j1;
    for (int j = j0; j <= j1; ++j) {
      const double y = gbox_.lo.y + j * ch_;
      const double xc = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
      emit(j, xc);
    }
  };
  for (std::uint32_t e = 0; e < n; ++e)
    node_rows(e, [&](int j, double) { ++row_count[j + 1]; });
  std::vector<std::uint32_t> row_off(ny_ + 2);
  row_off[0] = 0;
  for (int j = 0; j <= ny_; ++j) row_off[j + 1] = row_off[j] + row_count[j + 1];
  std::vector<double> xs(row_off[ny_ + 1]);
  {
    std::vector<std::uint32_t> cursor(row_off.begin(), row_off.end() - 1);
    for (std::uint32_t e = 0; e < n; ++e)
      node_rows(e, [&](int j, double xc) { xs[cursor[j]++] = xc; });
  }
  for (int j = 0; j <= ny_; ++j) {
    double* beg = xs.data() + row_off[j];
    double* end = xs.data() + row_off[j + 1];
    std::sort(beg, end);
    std::size_t ptr = 0;
    const std::size_t m = static_cast<std::size_t>(end - beg);
    bool par = false;
    for (int jx = 0; jx <= nx_; ++jx) {
      const double x = gbox_.lo.x + jx * cw_;
      while (ptr < m && beg[ptr] < x - eps_x) {
        par = !par;
        ++ptr;
      }
      const std::size_t id = node_id(jx, j);
      parity_[id] = par;
      for (std::size_t k = ptr; k < m && beg[k] <= x + eps_x; ++k) dirty_[id] = true;
    }
  }
  // Nodes lying on (or within eps of) a horizontal edge get no crossing record;
  // mark them dirty explicitly.
  const double eps_y = 1e-9 * ch_;
  for (std::uint32_t e = 0; e < n; ++e) {
    const Vec2 a = v_[e], b = v_[(e + 1) % n];
    if (a.y != b.y) continue;
    const double rel = (a.y - gbox_.lo.y) / ch_;
    const int j = static_cast<int>(std::lround(rel));
    if (j < 0 || j > ny_) continue;
    if (std::abs(a.y - (gbox_.lo.y + j * ch_)) > eps_y) continue;
    const int jx0 = std::clamp(static_cast<int>(std::floor((std::min(a.x, b.x) - eps_x - gbox_.lo.x) / cw_)), 0, nx_);
    const int jx1 = std::clamp(static_cast<int>(std::ceil((std::max(a.x, b.x) + eps_x - gbox_.lo.x) / cw_)), 0, nx_);
    for (int jx = jx0; jx <= jx1; ++jx) {
      const double x = gbox_.lo.x + jx * cw_;
      if (x >= std::min(a.x, b.x) - eps_x && x <= std::max(a.x, b.x) + eps_x) dirty_[node_id(jx, j)] = true;
    }
  }

  // Cell labels. Edge-free cells take the parity of any clean corner (their corners
  // cannot straddle the boundary, or an edge would have been registered).
  labels_.assign(ncells, 0);
  for (std::size_t c = 0; c < ncells; ++c) {
    const int ix = static_cast<int>(c % static_cast<std::size_t>(nx_));
    const int iy = static_cast<int>(c / static_cast<std::size_t>(nx_));
    if (offs_[c + 1] > offs_[c]) {
      std::uint8_t lab = kBoundary;
      bool found = false;
      for (int k = 0; k < 4; ++k) {
        if (!node_dirty(ix + (k & 1), iy + (k >> 1))) {
          lab |= static_cast<std::uint8_t>(k << 2);
          found = true;
          break;
        }
      }
      if (!found) lab |= 16;
      labels_[c] = lab;
    } else {
      bool val = node_parity(ix, iy);
      for (int k = 0; k < 4; ++k) {
        if (!node_dirty(ix + (k & 1), iy + (k >> 1))) {
          val = node_parity(ix + (k & 1), iy + (k >> 1));
          break;
        }
      }
      labels_[c] = val ? kInside : kOutside;
    }
  }
}

bool PolygonLocator::contains_slow(Vec2 p) const {
  const std::size_t n = v_.size();
  double py = p.y;
  for (int attempt = 0; attempt < 8; ++attempt) {
    bool odd = false;
    bool clean = true;
    for (std::size_t e = 0; e < n && clean; ++e) {
      const Vec2 a = v_[e], b = v_[(e + 1) % n];
      if (a.y == b.y) {
        if (py == a.y && p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x)) return true;
        continue;
      }
      const double ymin = std::min(a.y, b.y), ymax = std::max(a.y, b.y);
      if (!(ymin <= py && py < ymax)) continue;
      const double xc = a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y);
      if (std::abs(xc - p.x) <= 1e-12 * (1.0 + std::abs(p.x))) clean = false;
      if (xc < p.x) odd = !odd;
    }
    if (clean) return odd;
    py = std::nextafter(py, std::numeric_limits<double>::infinity());
  }
  return false;
}

bool PolygonLocator::contains(Vec2 p) const {
  if (p.x < gbox_.lo.x || p.x > gbox_.hi.x || p.y < gbox_.lo.y || p.y > gbox_.hi.y) return false;
  const int ix = cell_ix(p.x), iy = cell_iy(p.y);
  const std::uint32_t c = cell_index(ix, iy);
  const std::uint8_t lab = labels_[c];
  if ((lab & 3u) != kBoundary) return (lab & 3u) == kInside;
  if (lab & 16u) return contains_slow(p);

  const int k = (lab >> 2) & 3;
  const int jx = ix + (k & 1), jy = iy + (k >> 1);
  const Vec2 q = {gbox_.lo.x + jx * cw_, gbox_.lo.y + jy * ch_};
  bool par = node_parity(jx, jy);
  const std::size_t n = v_.size();
  for (std::uint32_t t = offs_[c]; t < offs_[c + 1]; ++t) {
    const std::uint32_t e = edges_[t];
    const Vec2 a = v_[e], b = v_[(e + 1) % n];
    const double d1 = cross(b - a, p - a);
    const double d2 = cross(b - a, q - a);
    if (!strictly_straddles(d1, d2)) continue;
    const double d3 = cross(q - p, a - p);
    const double d4 = cross(q - p, b - p);
    if (strictly_straddles(d3, d4)) par = !par;
  }
  return par;
}

double PolygonLocator::seg_dist2(Vec2 p, std::uint32_t e) const {
  return point_seg_dist2(p, v_[e], v_[(e + 1) % v_.size()]);
}

double PolygonLocator::scan_cell_dist2(std::uint32_t cell, Vec2 p, double bound2) const {
  const std::uint8_t lab = labels_[cell];
  if ((lab & 3u) != kBoundary) return bound2;
  if (rect_dist2(p, cell_rect(cell)) > bound2) return bound2;
  for (std::uint32_t t = offs_[cell]; t < offs_[cell + 1]; ++t)
    bound2 = std::min(bound2, seg_dist2(p, edges_[t]));
  return bound2;
}

double PolygonLocator::distance(Vec2 p) const {
  const int cx = cell_ix(p.x), cy = cell_iy(p.y);
  const double min_cell = std::min(cw_, ch_);
  double best2 = std::numeric_limits<double>::infinity();
  const int kmax = std::max({cx, nx_ - 1 - cx, cy, ny_ - 1 - cy});
  for (int k = 0;; ++k) {
    if (k > kmax) break;
    const double lb = (k - 1) * min_cell;
    if (lb > 0.0 && lb * lb > best2) break;
    const int x0 = std::max(cx - k, 0), x1 = std::min(cx + k, nx_ - 1);
    const int y0 = std::max(cy - k, 0), y1 = std::min(cy + k, ny_ - 1);
    for (int ix = x0; ix <= x1; ++ix) {
      if (cy - k >= 0) best2 = scan_cell_dist2(cell_index(ix, cy - k), p, best2);
      if (k > 0 && cy + k <= ny_ - 1) best2 = scan_cell_dist2(cell_index(ix, cy + k), p, best2);
    }
    for (int iy = std::max(y0, cy - k + 1); iy <= std::min(y1, cy + k - 1); ++iy) {
      if (cx - k >= 0) best2 = scan_cell_dist2(cell_index(cx - k, iy), p, best2);
      if (cx + k <= nx_ - 1) best2 = scan_cell_dist2(cell_index(cx + k, iy), p, best2);
    }
  }
  return std::sqrt(best2);
}

bool PolygonLocator::within(Vec2 p, double t) const {
  if (t < 0.0) return false;
  const double cap2 = t * t;
  const int cx = cell_ix(p.x), cy = cell_iy(p.y);
  const double min_cell = std::min(cw_, ch_);
  double best2 = std::numeric_limits<double>::infinity();
  const int kmax = std::max({cx, nx_ - 1 - cx, cy, ny_ - 1 - cy});
  for (int k = 0; k <= kmax; ++k) {
    const double lb = (k - 1) * min_cell;
    if (lb > t) break;
    const int x0 = std::max(cx - k, 0), x1 = std::min(cx + k, nx_ - 1);
    for (int ix = x0; ix <= x1; ++ix) {
      if (cy - k >= 0) best2 = scan_cell_dist2(cell_index(ix, cy - k), p, best2);
      if (k > 0 && cy + k <= ny_ - 1) best2 = scan_cell_dist2(cell_index(ix, cy + k), p, best2);
      if (best2 <= cap2) return true;
    }
    for (int iy = std::max(cy - k + 1, 0); iy <= std::min(cy + k - 1, ny_ - 1); ++iy) {
      if (cx - k >= 0) best2 = scan_cell_dist2(cell_index(cx - k, iy), p, best2);
      if (cx + k <= nx_ - 1) best2 = scan_cell_dist2(cell_index(cx + k, iy), p, best2);
      if (best2 <= cap2) return true;
    }
  }
  return best2 <= cap2;
}

std::pair<std::int64_t, std::int64_t> PolygonLocator::first_intersection() const {
  const std::size_t n = v_.size();
  const std::size_t ncells = static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);
  std::int64_t be = -1, bf = -1;
  for (std::size_t c = 0; c < ncells; ++c) {
    for (std::uint32_t s = offs_[c]; s < offs_[c + 1]; ++s) {
      for (std::uint32_t t = s + 1; t < offs_[c + 1]; ++t) {
        std::uint32_t e = edges_[s], f = edges_[t];
        if (e == f) continue;
        if (e > f) std::swap(e, f);
        if (f == e + 1 || (e == 0 && f == n - 1)) continue;  // adjacent edges share a vertex
        if (be >= 0 && (e > be || (e == be && f >= bf))) continue;
        if (segments_meet(v_[e], v_[(e + 1) % n], v_[f], v_[(f + 1) % n])) {
          be = e;
          bf = f;
        }
      }
    }
  }
  return {be, bf};
}

std::vector<std::uint32_t> PolygonLocator::boundary_cells_in(const Box& region) const {
  std::vector<std::uint32_t> out;
  const int ix0 = cell_ix(region.lo.x), ix1 = cell_ix(region.hi.x);
  const int iy0 = cell_iy(region.lo.y), iy1 = cell_iy(region.hi.y);
  for (int iy = iy0; iy <= iy1; ++iy)
    for (int ix = ix0; ix <= ix1; ++ix) {
      const std::uint32_t c = cell_index(ix, iy);
      if ((labels_[c] & 3u) == kBoundary) out.push_back(c);
    }
  return out;
}

}  // namespace perimlab
