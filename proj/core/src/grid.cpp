#include "varflow/grid.hpp"

#include <cmath>
#include <string>

namespace varflow {

FlowField::FlowField(Field u0_, Field u1_) : u0(std::move(u0_)), u1(std::move(u1_)) {
  require_same_shape(u0, u1, "flow components");
}

ConfidenceMap::ConfidenceMap(Field values) : c(std::move(values)) {}

DiffusionTensor::DiffusionTensor(Field w0_, Field w1_) : w0(std::move(w0_)), w1(std::move(w1_)) {
  require_same_shape(w0, w1, "tensor components");
}

DiffusionTensor DiffusionTensor::uniform(std::size_t width, std::size_t height, double value) {
  return {Field(width, height, value), Field(width, height, value)};
}

ScalarMap::ScalarMap(std::size_t width, std::size_t height, std::size_t channels, double fill)
    : width_(width), height_(height), channels_(channels), values_(width * height * channels, fill) {}

ScalarMap::ScalarMap(std::size_t width, std::size_t height, std::size_t channels,
                     std::vector<double> values)
    : width_(width), height_(height), channels_(channels), values_(std::move(values)) {
  if (values_.size() != width * height * channels) {
    fail(ErrorCode::DimMismatch, "map value count does not match its dimensions");
  }
}

Field ScalarMap::channel_field(std::size_t ch) const {
  if (ch >= channels_) fail(ErrorCode::DimMismatch, "channel index out of range");
  Field out(width_, height_);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i * channels_ + ch];
  return out;
}

ScalarMap ScalarMap::from_field(const Field& f) {
  return {f.width(), f.height(), 1, std::vector<double>(f.values().begin(), f.values().end())};
}

void require_finite(const Field& f, const char* what) {
  for (double v : f.values()) {
    if (!std::isfinite(v)) fail(ErrorCode::NonFinite, std::string(what) + " holds a non-finite value");
  }
}

void require_unit_range(const Field& f, const char* what) {
  for (double v : f.values()) {
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorCode::OutOfRange, std::string(what) + " must lie in [0, 1]");
  }
}

void require_same_shape(const Field& a, const Field& b, const char* what) {
  if (!a.same_shape(b)) fail(ErrorCode::DimMismatch, std::string(what) + " have different shapes");
}

namespace {
void require_dims(std::size_t w, std::size_t h, const char* what) {
  if (w == 0 || h == 0) fail(ErrorCode::NonPositiveDims, std::string(what) + " has a zero dimension");
}
}  // namespace

void validate(const FlowField& flow) {
  require_dims(flow.width(), flow.height(), "flow");
  require_same_shape(flow.u0, flow.u1, "flow components");
  require_finite(flow.u0, "flow u0");
  require_finite(flow.u1, "flow u1");
}

void validate(const ConfidenceMap& conf) {
  require_dims(conf.c.width(), conf.c.height(), "confidence");
  require_unit_range(conf.c, "confidence");
}

void validate(const DiffusionTensor& tensor) {
  require_dims(tensor.width(), tensor.height(), "tensor");
  require_same_shape(tensor.w0, tensor.w1, "tensor components");
  require_unit_range(tensor.w0, "tensor w0");
  require_unit_range(tensor.w1, "tensor w1");
}

void validate(const ScalarMap& map) {
  if (map.width() == 0 || map.height() == 0 || map.channels() == 0) {
    fail(ErrorCode::NonPositiveDims, "map has a zero dimension");
  }
  for (double v : map.values()) {
    if (!std::isfinite(v)) fail(ErrorCode::NonFinite, "map holds a non-finite value");
  }
}

}  // namespace varflow
