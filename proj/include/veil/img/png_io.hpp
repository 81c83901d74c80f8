#pragma once

#include <string>

#include "veil/img/image.hpp"

namespace veil::img {

// 8-bit grayscale or RGB PNG only; 16-bit, palette and alpha files are
// rejected with an IoError naming the path.
Image load_png(const std::string& path);
void save_png(const std::string& path, const Image& image);

Image map_to_image(const Map2D& m);
void save_png(const std::string& path, const Map2D& m);

}  // namespace veil::img
