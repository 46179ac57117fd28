#include "varflow/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

namespace varflow {
namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

template <typename T>
T load_le(const std::uint8_t* p) {
  std::uint32_t raw = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                      (static_cast<std::uint32_t>(p[2]) << 16) |
                      (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<T>(raw);
}

template <typename T>
void store_le(Bytes& out, T value) {
  const auto raw = std::bit_cast<std::uint32_t>(value);
  out.push_back(static_cast<std::uint8_t>(raw));
  out.push_back(static_cast<std::uint8_t>(raw >> 8));
  out.push_back(static_cast<std::uint8_t>(raw >> 16));
  out.push_back(static_cast<std::uint8_t>(raw >> 24));
}

float to_f32(double v) {
  if (!std::isfinite(v)) fail(ErrorCode::NonFinite, "cannot encode a non-finite value");
  return static_cast<float>(v);
}

double from_f32(float v) {
  if (!std::isfinite(v)) fail(ErrorCode::OutOfRange, "file holds a non-finite value");
  return static_cast<double>(v);
}

}  // namespace

FlowField decode_flo(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) fail(ErrorCode::Truncated, ".flo header shorter than 12 bytes");
  if (load_le<float>(bytes.data()) != kFloSentinel) fail(ErrorCode::BadMagic, ".flo sentinel mismatch");
  const auto width = load_le<std::int32_t>(bytes.data() + 4);
  const auto height = load_le<std::int32_t>(bytes.data() + 8);
  if (width <= 0 || height <= 0) fail(ErrorCode::NonPositiveDims, ".flo dimensions must be positive");
  const std::uint64_t pixels = static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height);
  if (bytes.size() != 12 + 8 * pixels) {
    fail(ErrorCode::Truncated, ".flo expected " + std::to_string(12 + 8 * pixels) + " bytes, got " +
                                   std::to_string(bytes.size()));
  }
  FlowField flow(static_cast<std::size_t>(width), static_cast<std::size_t>(height));
  const std::uint8_t* p = bytes.data() + 12;
  for (std::size_t i = 0; i < pixels; ++i, p += 8) {
    flow.u0[i] = from_f32(load_le<float>(p));
    flow.u1[i] = from_f32(load_le<float>(p + 4));
  }
  return flow;
}

Bytes encode_flo(const FlowField& flow) {
  if (flow.width() == 0 || flow.height() == 0) fail(ErrorCode::NonPositiveDims, "flow has a zero dimension");
  require_same_shape(flow.u0, flow.u1, "flow components");
  Bytes out;
  out.reserve(12 + 8 * flow.u0.size());
  store_le(out, kFloSentinel);
  store_le(out, static_cast<std::int32_t>(flow.width()));
  store_le(out, static_cast<std::int32_t>(flow.height()));
  for (std::size_t i = 0; i < flow.u0.size(); ++i) {
    store_le(out, to_f32(flow.u0[i]));
    store_le(out, to_f32(flow.u1[i]));
  }
  return out;
}

ScalarMap decode_map(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16) fail(ErrorCode::Truncated, "F32M header shorter than 16 bytes");
  if (std::memcmp(bytes.data(), kMapMagic, 4) != 0) fail(ErrorCode::BadMagic, "F32M magic mismatch");
  const auto width = load_le<std::uint32_t>(bytes.data() + 4);
  const auto height = load_le<std::uint32_t>(bytes.data() + 8);
  const auto channels = load_le<std::uint32_t>(bytes.data() + 12);
  if (width == 0 || height == 0 || channels == 0) {
    fail(ErrorCode::NonPositiveDims, "F32M dimensions must be positive");
  }
  const std::uint64_t count = std::uint64_t{width} * height * channels;
  if (bytes.size() != 16 + 4 * count) {
    fail(ErrorCode::Truncated, "F32M expected " + std::to_string(16 + 4 * count) + " bytes, got " +
                                   std::to_string(bytes.size()));
  }
  std::vector<double> values(count);
  const std::uint8_t* p = bytes.data() + 16;
  for (std::size_t i = 0; i < count; ++i, p += 4) values[i] = from_f32(load_le<float>(p));
  return {width, height, channels, std::move(values)};
}

Bytes encode_map(const ScalarMap& map) {
  if (map.width() == 0 || map.height() == 0 || map.channels() == 0) {
    fail(ErrorCode::NonPositiveDims, "map has a zero dimension");
  }
  Bytes out(std::begin(kMapMagic), std::end(kMapMagic));
  out.reserve(16 + 4 * map.values().size());
  store_le(out, static_cast<std::uint32_t>(map.width()));
  store_le(out, static_cast<std::uint32_t>(map.height()));
  store_le(out, static_cast<std::uint32_t>(map.channels()));
  for (double v : map.values()) store_le(out, to_f32(v));
  return out;
}

Bytes read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::IoFailure, "cannot read " + path.string());
  return bytes;
}

void write_bytes(std::span<const std::uint8_t> bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::IoFailure, "cannot write " + path.string());
}

FlowField read_flo(const std::filesystem::path& path) { return decode_flo(read_bytes(path)); }

void write_flo(const FlowField& flow, const std::filesystem::path& path) {
  write_bytes(encode_flo(flow), path);
}

ScalarMap read_map(const std::filesystem::path& path) { return decode_map(read_bytes(path)); }

void write_map(const ScalarMap& map, const std::filesystem::path& path) {
  write_bytes(encode_map(map), path);
}

}  // namespace varflow
