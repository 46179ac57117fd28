#include "varflow/png.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "varflow/io.hpp"

namespace varflow {
namespace {

std::uint8_t to_byte(double unit) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(unit, 0.0, 1.0) * 255.0));
}

}  // namespace

RgbImage flow_to_rgb(const FlowField& flow, double max_magnitude) {
  if (!(max_magnitude > 0.0)) fail(ErrorCode::NonPositiveValue, "max magnitude must be positive");
  validate(flow);
  RgbImage img{flow.width(), flow.height(), std::vector<std::uint8_t>(flow.u0.size() * 3)};
  for (std::size_t i = 0; i < flow.u0.size(); ++i) {
    const double u0 = flow.u0[i];
    const double u1 = flow.u1[i];
    const double sat = std::min(1.0, std::hypot(u0, u1) / max_magnitude);
    double hue = std::atan2(u1, u0) / (2.0 * std::numbers::pi) * 6.0;  // sextants
    if (hue < 0.0) hue += 6.0;
    if (hue >= 6.0) hue -= 6.0;
    const double x = 1.0 - std::abs(std::fmod(hue, 2.0) - 1.0);
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(hue)) {
      case 0: r = 1; g = x; break;
      case 1: r = x; g = 1; break;
      case 2: g = 1; b = x; break;
      case 3: g = x; b = 1; break;
      case 4: r = x; b = 1; break;
      default: r = 1; b = x; break;
    }
    // value = 1: blend the pure hue toward white by the saturation.
    img.pixels[3 * i + 0] = to_byte(1.0 - sat * (1.0 - r));
    img.pixels[3 * i + 1] = to_byte(1.0 - sat * (1.0 - g));
    img.pixels[3 * i + 2] = to_byte(1.0 - sat * (1.0 - b));
  }
  return img;
}

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
  png_image desc{};
  desc.version = PNG_IMAGE_VERSION;
  desc.width = static_cast<png_uint_32>(image.width);
  desc.height = static_cast<png_uint_32>(image.height);
  desc.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&desc, nullptr, &size, 0, image.pixels.data(), 0, nullptr)) {
    fail(ErrorCode::IoFailure, std::string("png encode: ") + desc.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&desc, out.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
    fail(ErrorCode::IoFailure, std::string("png encode: ") + desc.message);
  }
  out.resize(size);
  return out;
}

std::vector<std::uint8_t> flow_to_png(const FlowField& flow, double max_magnitude) {
  return encode_png(flow_to_rgb(flow, max_magnitude));
}

ScalarMap decode_png_gray(std::span<const std::uint8_t> bytes) {
  png_image desc{};
  desc.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&desc, bytes.data(), bytes.size())) {
    fail(ErrorCode::BadMagic, std::string("png decode: ") + desc.message);
  }
  desc.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(desc));
  if (!png_image_finish_read(&desc, nullptr, rgb.data(), 0, nullptr)) {
    fail(ErrorCode::Truncated, std::string("png decode: ") + desc.message);
  }
  ScalarMap gray(desc.width, desc.height, 1);
  auto values = gray.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = (0.299 * rgb[3 * i] + 0.587 * rgb[3 * i + 1] + 0.114 * rgb[3 * i + 2]) / 255.0;
  }
  return gray;
}

ScalarMap read_png_gray(const std::filesystem::path& path) { return decode_png_gray(read_bytes(path)); }

}  // namespace varflow
