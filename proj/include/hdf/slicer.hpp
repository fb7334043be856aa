/*
 * Copyright 2026 The HDF Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hdf/error.hpp"
#include "hdf/image.hpp"
#include "hdf/tensor.hpp"

namespace hdf {

inline constexpr std::size_t kSliceGrid = 224;
inline constexpr std::size_t kSlicesPerTechnique = 4;
inline constexpr std::size_t kSliceCount = 20;

enum class Technique { rect, tri, circ, ldiag, rdiag };

inline constexpr std::array<Technique, 5> kTechniques = {Technique::rect, Technique::tri, Technique::circ,
                                                         Technique::ldiag, Technique::rdiag};

inline std::string_view to_string(Technique t) {
  switch (t) {
    case Technique::rect: return "rect";
    case Technique::tri: return "tri";
    case Technique::circ: return "circ";
    case Technique::ldiag: return "ldiag";
    case Technique::rdiag: return "rdiag";
  }
  return "?";
}

struct BoundingBox {
  std::size_t top = 0;
  std::size_t left = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// One of the 20 sub-image regions on the 224x224 working grid.
struct SliceMask {
  Technique technique = Technique::rect;
  std::size_t index = 0;
  std::vector<std::uint8_t> mask;  // row-major, kSliceGrid x kSliceGrid
  BoundingBox bbox;

  bool contains(std::size_t row, std::size_t col) const { return mask[row * kSliceGrid + col] != 0; }
  std::size_t area() const {
    std::size_t n = 0;
    for (auto m : mask) n += m != 0;
    return n;
  }
};

struct SubImage {
  Tensor pixels;  // (3, 224, 224), pixel units
  Technique technique = Technique::rect;
  std::size_t index = 0;
};

namespace detail {

inline BoundingBox tight_bbox(const std::vector<std::uint8_t>& mask) {
  std::size_t top = kSliceGrid, left = kSliceGrid, bottom = 0, right = 0;
  bool any = false;
  for (std::size_t r = 0; r < kSliceGrid; ++r) {
    for (std::size_t c = 0; c < kSliceGrid; ++c) {
      if (!mask[r * kSliceGrid + c]) continue;
      any = true;
      top = std::min(top, r);
      bottom = std::max(bottom, r);
      left = std::min(left, c);
      right = std::max(right, c);
    }
  }
  if (!any) return {};
  return {top, left, bottom - top + 1, right - left + 1};
}

// Builds the four masks of a technique from a pixel -> region rule; a rule
// result outside 0..3 leaves the pixel unassigned.
template <typename Rule>
std::array<SliceMask, 4> masks_from_rule(Technique technique, Rule&& rule) {
  std::array<SliceMask, 4> out;
  for (std::size_t k = 0; k < 4; ++k) {
    out[k].technique = technique;
    out[k].index = k;
    out[k].mask.assign(kSliceGrid * kSliceGrid, 0);
  }
  for (std::size_t r = 0; r < kSliceGrid; ++r) {
    for (std::size_t c = 0; c < kSliceGrid; ++c) {
      const int region = rule(static_cast<long>(r), static_cast<long>(c));
      if (region >= 0 && region < 4) out[static_cast<std::size_t>(region)].mask[r * kSliceGrid + c] = 1;
    }
  }
  for (auto& m : out) m.bbox = tight_bbox(m.mask);
  return out;
}

inline constexpr long kHalf = static_cast<long>(kSliceGrid / 2);   // 112
inline constexpr long kLast = static_cast<long>(kSliceGrid) - 1;   // 223

inline int quadrant(long r, long c) { return (r < kHalf ? 0 : 2) + (c < kHalf ? 0 : 1); }

}  // namespace detail

/// Quadrants in order top-left, top-right, bottom-left, bottom-right.
inline std::array<SliceMask, 4> rect_slices() {
  return detail::masks_from_rule(Technique::rect, detail::quadrant);
}

/// Triangles cut by both diagonals, ordered top, right, bottom, left.
/// With d1 = c - r and d2 = r + c - 223 the half-open rules below give an
/// exact partition (d1 = d2 = 0 never happens on an even grid).
inline std::array<SliceMask, 4> tri_slices() {
  return detail::masks_from_rule(Technique::tri, [](long r, long c) {
    const long d1 = c - r;
    const long d2 = r + c - detail::kLast;
    if (d1 >= 0 && d2 < 0) return 0;
    if (d1 > 0 && d2 >= 0) return 1;
    if (d1 <= 0 && d2 > 0) return 2;
    if (d1 < 0 && d2 <= 0) return 3;
    return -1;
  });
}

/// Quadrant sectors of the inscribed disc (centre 111.5, radius 112, pixel
/// centres strictly inside). Corners outside the disc belong to no slice.
inline std::array<SliceMask, 4> circ_slices() {
  return detail::masks_from_rule(Technique::circ, [](long r, long c) {
    const double centre = (static_cast<double>(kSliceGrid) - 1.0) / 2.0;
    const double radius = static_cast<double>(kSliceGrid) / 2.0;
    const double dy = static_cast<double>(r) - centre;
    const double dx = static_cast<double>(c) - centre;
    if (dy * dy + dx * dx >= radius * radius) return -1;
    return detail::quadrant(r, c);
  });
}

/// Bands parallel to the main diagonal: d = c - r split at -112, 0, 112.
inline std::array<SliceMask, 4> ldiag_slices() {
  return detail::masks_from_rule(Technique::ldiag, [](long r, long c) {
    const long d = c - r;
    if (d < -detail::kHalf) return 0;
    if (d < 0) return 1;
    if (d < detail::kHalf) return 2;
    return 3;
  });
}

/// Bands parallel to the anti-diagonal: s = r + c split at 112, 223, 335.
inline std::array<SliceMask, 4> rdiag_slices() {
  return detail::masks_from_rule(Technique::rdiag, [](long r, long c) {
    const long s = r + c;
    if (s < detail::kHalf) return 0;
    if (s < detail::kLast) return 1;
    if (s < detail::kLast + detail::kHalf) return 2;
    return 3;
  });
}

inline std::array<SliceMask, 4> technique_slices(Technique t) {
  switch (t) {
    case Technique::rect: return rect_slices();
    case Technique::tri: return tri_slices();
    case Technique::circ: return circ_slices();
    case Technique::ldiag: return ldiag_slices();
    case Technique::rdiag: return rdiag_slices();
  }
  throw std::logic_error("unknown slicing technique");
}

/// All 20 masks: rect 0-3, tri 0-3, circ 0-3, ldiag 0-3, rdiag 0-3.
/// Geometry is fixed, so the result is computed once and shared.
inline const std::vector<SliceMask>& all_masks() {
  static const std::vector<SliceMask> masks = [] {
    std::vector<SliceMask> out;
    out.reserve(kSliceCount);
    for (Technique t : kTechniques) {
      for (auto& m : technique_slices(t)) out.push_back(std::move(m));
    }
    return out;
  }();
  return masks;
}

/// Fills pixels outside the mask (inside its bbox) with `fill`, crops the
/// bbox and resizes the crop back to 224x224 bilinearly.
inline SubImage render_slice(const Tensor& source, const SliceMask& slice, const std::array<float, 3>& fill) {
  if (source.shape() != Shape{3, kSliceGrid, kSliceGrid}) {
    throw ShapeError("render_slice: source must be 3x224x224, got " + shape_string(source.shape()));
  }
  if (slice.mask.size() != kSliceGrid * kSliceGrid) throw ShapeError("render_slice: mask must be 224x224");
  const BoundingBox& box = slice.bbox;
  if (box.height == 0 || box.width == 0 || slice.area() == 0) {
    throw ShapeError("render_slice: mask " + std::string(to_string(slice.technique)) + "_" +
                     std::to_string(slice.index) + " is empty");
  }
  Tensor crop({3, box.height, box.width});
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t y = 0; y < box.height; ++y) {
      for (std::size_t x = 0; x < box.width; ++x) {
        const std::size_t r = box.top + y;
        const std::size_t col = box.left + x;
        crop.at(c, y, x) = slice.contains(r, col) ? source.at(c, r, col) : fill[c];
      }
    }
  }
  return SubImage{resize_bilinear(crop, kSliceGrid, kSliceGrid), slice.technique, slice.index};
}

/// Renders the 20 sub-images of a 3x224x224 working image, in all_masks() order.
inline std::vector<SubImage> slice_all(const Tensor& working, const std::array<float, 3>& fill) {
  std::vector<SubImage> out;
  out.reserve(kSliceCount);
  for (const auto& mask : all_masks()) out.push_back(render_slice(working, mask, fill));
  return out;
}

}  // namespace hdf
