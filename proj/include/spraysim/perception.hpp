#pragma once

#include <vector>

#include "spraysim/raster.hpp"

namespace spraysim {

enum class SplitAxis { Width, Height };
enum class DistanceStat { Median, Mean };

// Per-nozzle control inputs extracted from one zone of a gated frame.
// a_p is the fruit-tree area fraction in [0,1]; d_c the representative
// target distance in meters (+inf when the zone holds no target pixels);
// v_p the platform speed, carried for traversal-time and volume accounting.
struct ZoneFeatures {
  int zone_index = 0;
  double a_p = 0.0;
  double d_c = 0.0;
  double v_p = 0.0;
  std::size_t valid_pixel_count = 0;
};

struct ZoneRect {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;
};

// Voids every pixel whose depth exceeds max_depth_m or is invalid (0) by
// rewriting it to Sky. Idempotent; other pixels are untouched.
SegmentedFrame fuse_depth_gate(const SegmentedFrame& seg, const DepthFrame& depth,
                               double max_depth_m = 2.0);

// Equal, contiguous, non-overlapping regions covering the frame; when the
// axis length is not divisible by n_zones the last zone absorbs the
// remainder. Ordering follows the nozzle index along the boom.
std::vector<ZoneRect> partition_zones(int width, int height, int n_zones = 4,
                                      SplitAxis axis = SplitAxis::Width);
std::vector<ZoneRect> partition_zones(const SegmentedFrame& frame, int n_zones = 4,
                                      SplitAxis axis = SplitAxis::Width);

ZoneFeatures compute_zone_features(const SegmentedFrame& seg, const DepthFrame& depth,
                                   const ZoneRect& zone, int zone_index, double v_p,
                                   DistanceStat stat = DistanceStat::Median);

// Gate, partition and featurize in one pass over a frame pair.
std::vector<ZoneFeatures> frame_features(const SegmentedFrame& seg,
                                         const DepthFrame& depth, double v_p,
                                         int n_zones = 4,
                                         SplitAxis axis = SplitAxis::Width,
                                         DistanceStat stat = DistanceStat::Median,
                                         double max_depth_m = 2.0);

}  // namespace spraysim
