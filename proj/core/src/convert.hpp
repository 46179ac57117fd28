#pragma once

#include <vector>

#include "varflow/grid.hpp"

namespace varflow::detail {

template <typename Real>
std::vector<Real> to_vec(const Field& f) {
  return std::vector<Real>(f.values().begin(), f.values().end());
}

template <typename Real>
Field to_field(const std::vector<Real>& v, std::size_t width, std::size_t height) {
  Field f(width, height);
  for (std::size_t i = 0; i < v.size(); ++i) f[i] = static_cast<double>(v[i]);
  return f;
}

inline Field to_field(const std::vector<double>& v, std::size_t width, std::size_t height, double scale) {
  Field f(width, height);
  for (std::size_t i = 0; i < v.size(); ++i) f[i] = v[i] * scale;
  return f;
}

}  // namespace varflow::detail
