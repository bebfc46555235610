// png.hpp - minimal 8-bit grayscale PNG writer and slice export.
// The IDAT stream uses stored (uncompressed) deflate blocks, so output bytes
// depend only on the pixel data.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/volume.hpp"

namespace mpf {

void write_png_gray8(const std::string& path, int width, int height,
                     const std::vector<std::uint8_t>& pixels);

// Extract a slice perpendicular to `axis` (0=x, 1=y, 2=z) and window it
// linearly to [0,255]; window_min must be < window_max.
std::vector<std::uint8_t> window_slice(const Volume& v, int axis, int index,
                                       double window_min, double window_max,
                                       int& width, int& height);

void export_png(const Volume& v, int axis, int index, double window_min,
                double window_max, const std::string& path);

} // namespace mpf
