#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace poselift {

/// 8-bit image, row-major, interleaved channels (1 = gray, 3 = RGB).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;

  std::uint8_t& at(int x, int y, int c) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  bool same_dims(const Image& other) const {
    return width == other.width && height == other.height;
  }
};

Image make_image(int width, int height, int channels, std::uint8_t fill = 0);

/// Single-channel float plane, values typically in [0, 1].
struct FloatImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  float& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  float at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
};

/// PNG IO (8-bit; 16-bit inputs are reduced, palettes expanded, alpha
/// stripped). Throws AssetDecodeError / IoError.
Image load_png(const std::string& path);
void save_png(const Image& image, const std::string& path);

}  // namespace poselift
