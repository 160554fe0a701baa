#pragma once

#include <cstdint>
#include <string>

namespace nights {

/// 8-bit RGB PNG filled with one color.
std::string encode_solid_png(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b);

}  // namespace nights
