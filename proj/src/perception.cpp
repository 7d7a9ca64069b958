#include "spraysim/perception.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#include "spraysim/errors.hpp"

namespace spraysim {

namespace {

void require_matching_dims(const SegmentedFrame& seg, const DepthFrame& depth) {
  if (seg.width != depth.width || seg.height != depth.height)
    throw std::invalid_argument(
        "segmentation/depth dimension mismatch: " + std::to_string(seg.width) + "x" +
        std::to_string(seg.height) + " vs " + std::to_string(depth.width) + "x" +
        std::to_string(depth.height));
}

}  // namespace

SegmentedFrame fuse_depth_gate(const SegmentedFrame& seg, const DepthFrame& depth,
                               double max_depth_m) {
  require_matching_dims(seg, depth);
  SegmentedFrame out = seg;
  const auto n = out.classes.size();
  for (std::size_t i = 0; i < n; ++i) {
    const float d = depth.depth_m[i];
    if (d == 0.0f || d > max_depth_m)
      out.classes[i] = static_cast<std::uint8_t>(SegClass::Sky);
  }
  return out;
}

std::vector<ZoneRect> partition_zones(int width, int height, int n_zones,
                                      SplitAxis axis) {
  if (n_zones < 1) throw ConfigError("n_zones must be >= 1");
  if (width < 1 || height < 1)
    throw std::invalid_argument("cannot partition an empty frame");

  const int span = axis == SplitAxis::Width ? width : height;
  if (n_zones > span)
    throw std::invalid_argument("more zones than pixels along the split axis");

  // Equal zones; the last one absorbs the remainder.
  const int base = span / n_zones;
  std::vector<ZoneRect> zones;
  zones.reserve(static_cast<std::size_t>(n_zones));
  for (int i = 0; i < n_zones; ++i) {
    const int begin = i * base;
    const int extent = (i == n_zones - 1) ? span - begin : base;
    if (axis == SplitAxis::Width)
      zones.push_back({begin, 0, extent, height});
    else
      zones.push_back({0, begin, width, extent});
  }
  return zones;
}

std::vector<ZoneRect> partition_zones(const SegmentedFrame& frame, int n_zones,
                                      SplitAxis axis) {
  return partition_zones(frame.width, frame.height, n_zones, axis);
}

ZoneFeatures compute_zone_features(const SegmentedFrame& seg, const DepthFrame& depth,
                                   const ZoneRect& zone, int zone_index, double v_p,
                                   DistanceStat stat) {
  require_matching_dims(seg, depth);
  if (zone.x0 < 0 || zone.y0 < 0 || zone.w < 1 || zone.h < 1 ||
      zone.x0 + zone.w > seg.width || zone.y0 + zone.h > seg.height)
    throw std::invalid_argument("zone rect out of frame bounds");

  std::vector<float> target_depths;
  target_depths.reserve(static_cast<std::size_t>(zone.w) * zone.h / 4);
  for (int y = zone.y0; y < zone.y0 + zone.h; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * seg.width;
    for (int x = zone.x0; x < zone.x0 + zone.w; ++x) {
      if (is_spray_class(static_cast<SegClass>(seg.classes[row + x])))
        target_depths.push_back(depth.depth_m[row + x]);
    }
  }

  ZoneFeatures f;
  f.zone_index = zone_index;
  f.v_p = v_p;
  f.valid_pixel_count = target_depths.size();
  const double total = static_cast<double>(zone.w) * static_cast<double>(zone.h);
  f.a_p = static_cast<double>(target_depths.size()) / total;

  if (target_depths.empty()) {
    f.d_c = std::numeric_limits<double>::infinity();
    return f;
  }

  if (stat == DistanceStat::Mean) {
    double sum = 0.0;
    for (float d : target_depths) sum += d;
    f.d_c = sum / static_cast<double>(target_depths.size());
  } else {
    const std::size_t n = target_depths.size();
    auto mid = target_depths.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(target_depths.begin(), mid, target_depths.end());
    double median = *mid;
    if (n % 2 == 0) {
      const auto lower =
          *std::max_element(target_depths.begin(), mid);
      median = (median + lower) / 2.0;
    }
    f.d_c = median;
  }
  return f;
}

std::vector<ZoneFeatures> frame_features(const SegmentedFrame& seg,
                                         const DepthFrame& depth, double v_p,
                                         int n_zones, SplitAxis axis,
                                         DistanceStat stat, double max_depth_m) {
  const SegmentedFrame gated = fuse_depth_gate(seg, depth, max_depth_m);
  const auto rects = partition_zones(gated, n_zones, axis);
  std::vector<ZoneFeatures> features;
  features.reserve(rects.size());
  for (std::size_t i = 0; i < rects.size(); ++i)
    features.push_back(compute_zone_features(gated, depth, rects[i],
                                             static_cast<int>(i), v_p, stat));
  return features;
}

}  // namespace spraysim
