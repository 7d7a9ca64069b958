#include "spraysim/raster.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "spraysim/errors.hpp"
#include "spraysim/fsio.hpp"

namespace spraysim {

namespace {

constexpr const char* kMaskMagic = "SEGMASK1";
constexpr const char* kDepthMagic = "DEPTH16";

struct RasterHeader {
  int width = 0;
  int height = 0;
  std::string third_line;
};

// Three text lines terminated by '\n'; returns the payload offset.
std::size_t parse_header(const std::string& data, const char* magic,
                         const std::filesystem::path& path, RasterHeader& out) {
  std::size_t pos = 0;
  auto next_line = [&](const char* what) {
    std::size_t nl = data.find('\n', pos);
    if (nl == std::string::npos)
      throw IoError(path.string() + ": malformed header (missing " + what + " line)");
    std::string line = data.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };

  if (next_line("magic") != magic)
    throw IoError(path.string() + ": malformed header (bad magic, expected " +
                  std::string(magic) + ")");

  std::istringstream dims(next_line("dimensions"));
  if (!(dims >> out.width >> out.height) || out.width <= 0 || out.height <= 0)
    throw IoError(path.string() + ": malformed header (bad dimensions line)");
  std::string rest;
  if (dims >> rest)
    throw IoError(path.string() + ": malformed header (trailing dimension tokens)");

  out.third_line = next_line("attribute");
  return pos;
}

std::string format_header(const char* magic, int width, int height,
                          const std::string& third) {
  std::ostringstream os;
  os << magic << '\n' << width << ' ' << height << '\n' << third << '\n';
  return os.str();
}

}  // namespace

SegmentedFrame load_mask(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  RasterHeader hdr;
  const std::size_t payload = parse_header(data, kMaskMagic, path, hdr);
  if (hdr.third_line != "classes 5")
    throw IoError(path.string() + ": malformed header (expected 'classes 5', got '" +
                  hdr.third_line + "')");

  const std::size_t expected =
      static_cast<std::size_t>(hdr.width) * static_cast<std::size_t>(hdr.height);
  if (data.size() - payload != expected)
    throw IoError(path.string() + ": dimension mismatch vs declared header (payload " +
                  std::to_string(data.size() - payload) + " bytes, expected " +
                  std::to_string(expected) + ")");

  SegmentedFrame frame;
  frame.width = hdr.width;
  frame.height = hdr.height;
  frame.classes.resize(expected);
  std::memcpy(frame.classes.data(), data.data() + payload, expected);
  for (std::size_t i = 0; i < expected; ++i) {
    if (frame.classes[i] >= kSegClassCount)
      throw IoError(path.string() + ": class out of range (value " +
                    std::to_string(int(frame.classes[i])) + " at pixel " +
                    std::to_string(i) + ")");
  }
  return frame;
}

void save_mask(const SegmentedFrame& frame, const std::filesystem::path& path) {
  const std::size_t expected =
      static_cast<std::size_t>(frame.width) * static_cast<std::size_t>(frame.height);
  if (frame.classes.size() != expected)
    throw IoError("mask raster length does not match its dimensions");
  for (std::uint8_t v : frame.classes)
    if (v >= kSegClassCount) throw IoError("mask contains class out of range");

  std::string out = format_header(kMaskMagic, frame.width, frame.height, "classes 5");
  out.append(reinterpret_cast<const char*>(frame.classes.data()), frame.classes.size());
  atomic_write_file(path, out);
}

DepthFrame load_depth(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  RasterHeader hdr;
  const std::size_t payload = parse_header(data, kDepthMagic, path, hdr);
  if (hdr.third_line != "unit mm")
    throw IoError(path.string() + ": malformed header (expected 'unit mm', got '" +
                  hdr.third_line + "')");

  const std::size_t pixels =
      static_cast<std::size_t>(hdr.width) * static_cast<std::size_t>(hdr.height);
  if (data.size() - payload != pixels * 2)
    throw IoError(path.string() + ": dimension mismatch vs declared header (payload " +
                  std::to_string(data.size() - payload) + " bytes, expected " +
                  std::to_string(pixels * 2) + ")");

  DepthFrame frame;
  frame.width = hdr.width;
  frame.height = hdr.height;
  frame.depth_m.resize(pixels);
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data() + payload);
  for (std::size_t i = 0; i < pixels; ++i) {
    const std::uint16_t mm =
        static_cast<std::uint16_t>(bytes[2 * i]) |
        static_cast<std::uint16_t>(bytes[2 * i + 1]) << 8;
    frame.depth_m[i] = static_cast<float>(mm) * 1e-3f;
  }
  return frame;
}

void save_depth(const DepthFrame& frame, const std::filesystem::path& path) {
  const std::size_t pixels =
      static_cast<std::size_t>(frame.width) * static_cast<std::size_t>(frame.height);
  if (frame.depth_m.size() != pixels)
    throw IoError("depth raster length does not match its dimensions");

  std::string out = format_header(kDepthMagic, frame.width, frame.height, "unit mm");
  out.reserve(out.size() + pixels * 2);
  for (std::size_t i = 0; i < pixels; ++i) {
    const float m = frame.depth_m[i];
    if (!(m >= 0.0f) || !std::isfinite(m))
      throw IoError("depth values must be finite and non-negative");
    const double mm = std::lround(static_cast<double>(m) * 1000.0);
    if (mm > 65535.0) throw IoError("depth value exceeds the 16-bit millimeter range");
    const auto v = static_cast<std::uint16_t>(mm);
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
  }
  atomic_write_file(path, out);
}

void save_stain_raster(const std::vector<std::uint8_t>& stained, int width,
                       int height, const std::filesystem::path& path) {
  SegmentedFrame frame;
  frame.width = width;
  frame.height = height;
  frame.classes = stained;
  for (auto& v : frame.classes) v = v ? 1 : 0;
  save_mask(frame, path);
}

}  // namespace spraysim
