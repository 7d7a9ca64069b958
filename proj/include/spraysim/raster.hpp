#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace spraysim {

// Classes produced by the upstream segmentation model. Raster values
// outside this range are a load error.
enum class SegClass : std::uint8_t {
  Tree = 0,
  Fruit = 1,
  Ground = 2,
  Sky = 3,
  Pipe = 4,
};

inline constexpr int kSegClassCount = 5;

// Tree and Fruit are the spray targets; everything else is background.
inline bool is_spray_class(SegClass c) {
  return c == SegClass::Tree || c == SegClass::Fruit;
}

struct SegmentedFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> classes;  // row-major, values 0..4
  std::uint64_t frame_id = 0;
  double timestamp = 0.0;

  SegmentedFrame() = default;
  SegmentedFrame(int w, int h, SegClass fill = SegClass::Sky)
      : width(w), height(h),
        classes(static_cast<std::size_t>(w) * static_cast<std::size_t>(h),
                static_cast<std::uint8_t>(fill)) {}

  std::size_t pixel_count() const { return classes.size(); }

  SegClass at(int x, int y) const {
    return static_cast<SegClass>(classes[static_cast<std::size_t>(y) * width + x]);
  }
  void set(int x, int y, SegClass c) {
    classes[static_cast<std::size_t>(y) * width + x] = static_cast<std::uint8_t>(c);
  }
};

struct DepthFrame {
  int width = 0;
  int height = 0;
  std::vector<float> depth_m;  // meters; 0 = invalid reading

  DepthFrame() = default;
  DepthFrame(int w, int h, float fill = 0.0f)
      : width(w), height(h),
        depth_m(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  float at(int x, int y) const {
    return depth_m[static_cast<std::size_t>(y) * width + x];
  }
  void set(int x, int y, float d) {
    depth_m[static_cast<std::size_t>(y) * width + x] = d;
  }
};

// SEGMASK1 format: three text header lines ("SEGMASK1", "<width> <height>",
// "classes 5") followed by width*height raw bytes, row-major, values 0..4.
SegmentedFrame load_mask(const std::filesystem::path& path);
void save_mask(const SegmentedFrame& frame, const std::filesystem::path& path);

// DEPTH16 format: three text header lines ("DEPTH16", "<width> <height>",
// "unit mm") followed by width*height little-endian uint16 millimeters,
// 0 = invalid. Loaded values are converted to meters.
DepthFrame load_depth(const std::filesystem::path& path);
void save_depth(const DepthFrame& frame, const std::filesystem::path& path);

// Stain rasters reuse the SEGMASK1 container with values {0,1} so they can
// be inspected with the same tooling.
void save_stain_raster(const std::vector<std::uint8_t>& stained, int width,
                       int height, const std::filesystem::path& path);

}  // namespace spraysim
