#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "varflow/grid.hpp"

namespace varflow {

/// Middlebury .flo: float32 sentinel 202021.25, int32 width, int32 height,
/// then row-major interleaved (u0, u1) float32, all little-endian.
inline constexpr float kFloSentinel = 202021.25f;

/// F32M container: "F32M", uint32 width, height, channels, then float32 values
/// row-major and channel-interleaved, all little-endian.
inline constexpr char kMapMagic[4] = {'F', '3', '2', 'M'};

using Bytes = std::vector<std::uint8_t>;

FlowField decode_flo(std::span<const std::uint8_t> bytes);
Bytes encode_flo(const FlowField& flow);
ScalarMap decode_map(std::span<const std::uint8_t> bytes);
Bytes encode_map(const ScalarMap& map);

FlowField read_flo(const std::filesystem::path& path);
void write_flo(const FlowField& flow, const std::filesystem::path& path);
ScalarMap read_map(const std::filesystem::path& path);
void write_map(const ScalarMap& map, const std::filesystem::path& path);

Bytes read_bytes(const std::filesystem::path& path);
void write_bytes(std::span<const std::uint8_t> bytes, const std::filesystem::path& path);

}  // namespace varflow
