#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "garboost/error.hpp"

namespace garboost {

using Vec = std::vector<double>;

struct EmbedResult {
  Vec vector;
  bool is_zero = false;  // projection was exactly zero (caller decides fallback)
};

inline double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw DimMismatch("dot: dimension mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double l2_norm(const Vec& a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

// y += c * x
inline void axpy(double c, const Vec& x, Vec& y) {
  if (x.size() != y.size()) throw DimMismatch("axpy: dimension mismatch");
  for (size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

}  // namespace garboost
