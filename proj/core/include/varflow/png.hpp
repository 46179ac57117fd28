#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "varflow/grid.hpp"

namespace varflow {

struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // RGB, row-major
};

/// Color-wheel encoding: hue = atan2(u1, u0), saturation = min(1, |u| / max_magnitude),
/// value = 1. Zero motion maps to white.
RgbImage flow_to_rgb(const FlowField& flow, double max_magnitude);

std::vector<std::uint8_t> encode_png(const RgbImage& image);
std::vector<std::uint8_t> flow_to_png(const FlowField& flow, double max_magnitude);

/// Decodes an 8-bit grayscale or RGB(A) PNG into a single-channel map in [0, 1]
/// (RGB is reduced with Rec. 601 luma weights).
ScalarMap decode_png_gray(std::span<const std::uint8_t> bytes);
ScalarMap read_png_gray(const std::filesystem::path& path);

}  // namespace varflow
