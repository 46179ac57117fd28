#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "varflow/error.hpp"

namespace varflow {

/// Dense row-major 2D array; element (x, y) lives at index y * width + x.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t width, std::size_t height, T fill = T{})
      : width_(width), height_(height), data_(width * height, fill) {}

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
  const T& operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  template <typename U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<T> data_;
};

using Field = Grid<double>;
using Mask = Grid<std::uint8_t>;

/// Per-pixel motion (u0 horizontal, u1 vertical), in pixels.
struct FlowField {
  Field u0;
  Field u1;

  FlowField() = default;
  FlowField(std::size_t width, std::size_t height) : u0(width, height), u1(width, height) {}
  FlowField(Field u0_, Field u1_);

  std::size_t width() const noexcept { return u0.width(); }
  std::size_t height() const noexcept { return u0.height(); }

  Field& channel(int i) { return i == 0 ? u0 : u1; }
  const Field& channel(int i) const { return i == 0 ? u0 : u1; }

  friend bool operator==(const FlowField&, const FlowField&) = default;
};

/// Data-term weight c in [0, 1]; c = 0 marks a pixel without a usable estimate.
struct ConfidenceMap {
  Field c;

  ConfidenceMap() = default;
  explicit ConfidenceMap(Field values);
};

/// Diagonal diffusion tensor W = diag(w0, w1), entries in [0, 1].
struct DiffusionTensor {
  Field w0;
  Field w1;

  DiffusionTensor() = default;
  DiffusionTensor(Field w0_, Field w1_);

  static DiffusionTensor uniform(std::size_t width, std::size_t height, double value);

  std::size_t width() const noexcept { return w0.width(); }
  std::size_t height() const noexcept { return w0.height(); }
};

/// Multi-channel map, channel-interleaved per pixel.
class ScalarMap {
 public:
  ScalarMap() = default;
  ScalarMap(std::size_t width, std::size_t height, std::size_t channels, double fill = 0.0);
  ScalarMap(std::size_t width, std::size_t height, std::size_t channels, std::vector<double> values);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t channels() const noexcept { return channels_; }

  double& at(std::size_t x, std::size_t y, std::size_t ch) {
    return values_[(y * width_ + x) * channels_ + ch];
  }
  double at(std::size_t x, std::size_t y, std::size_t ch) const {
    return values_[(y * width_ + x) * channels_ + ch];
  }
  std::span<double> pixel(std::size_t x, std::size_t y) {
    return {values_.data() + (y * width_ + x) * channels_, channels_};
  }
  std::span<const double> pixel(std::size_t x, std::size_t y) const {
    return {values_.data() + (y * width_ + x) * channels_, channels_};
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Copies channel `ch` out as a single-channel field.
  Field channel_field(std::size_t ch) const;
  static ScalarMap from_field(const Field& f);

  friend bool operator==(const ScalarMap&, const ScalarMap&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> values_;
};

/// Per-pixel feature vectors for cost-volume matching.
class FeatureMap : public ScalarMap {
 public:
  FeatureMap() = default;
  using ScalarMap::ScalarMap;
  explicit FeatureMap(ScalarMap map) : ScalarMap(std::move(map)) {}
};

void require_finite(const Field& f, const char* what);
void require_unit_range(const Field& f, const char* what);
void require_same_shape(const Field& a, const Field& b, const char* what);
void validate(const FlowField& flow);
void validate(const ConfidenceMap& conf);
void validate(const DiffusionTensor& tensor);
void validate(const ScalarMap& map);

}  // namespace varflow
