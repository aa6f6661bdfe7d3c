#pragma once

#include <vector>

#include "regext/grid.hpp"

namespace regext {

/// Summed-area table over a grid (n <= 3) for O(1) box sums.
template <class T>
class PrefixSum {
 public:
  PrefixSum() = default;

  template <class Value>
  PrefixSum(const Grid& g, Value&& value) : n_(g.n()), dims_(g.dims()) {
    stride_[0] = static_cast<std::size_t>(dims_[1] + 1) * (dims_[2] + 1);
    stride_[1] = static_cast<std::size_t>(dims_[2] + 1);
    stride_[2] = 1;
    table_.assign(static_cast<std::size_t>(dims_[0] + 1) * (dims_[1] + 1) * (dims_[2] + 1), T{});
    std::size_t flat = 0;
    for (int a = 0; a < dims_[0]; ++a)
      for (int b = 0; b < dims_[1]; ++b)
        for (int c = 0; c < dims_[2]; ++c, ++flat) at(a + 1, b + 1, c + 1) = static_cast<T>(value(flat));
    for (int a = 1; a <= dims_[0]; ++a)
      for (int b = 0; b <= dims_[1]; ++b)
        for (int c = 0; c <= dims_[2]; ++c) at(a, b, c) += at(a - 1, b, c);
    for (int a = 0; a <= dims_[0]; ++a)
      for (int b = 1; b <= dims_[1]; ++b)
        for (int c = 0; c <= dims_[2]; ++c) at(a, b, c) += at(a, b - 1, c);
    for (int a = 0; a <= dims_[0]; ++a)
      for (int b = 0; b <= dims_[1]; ++b)
        for (int c = 1; c <= dims_[2]; ++c) at(a, b, c) += at(a, b, c - 1);
  }

  /// Sum over the inclusive index box [lo, hi]; zero if empty along any axis.
  T sum(const Index& lo, const Index& hi) const {
    Index l{0, 0, 0}, u{0, 0, 0};
    for (int i = 0; i < 3; ++i) {
      if (i < n_) {
        if (lo[i] > hi[i]) return T{};
        l[i] = lo[i];
        u[i] = hi[i] + 1;
      } else {
        l[i] = 0;
        u[i] = 1;
      }
    }
    return at(u[0], u[1], u[2]) - at(l[0], u[1], u[2]) - at(u[0], l[1], u[2]) - at(u[0], u[1], l[2]) +
           at(l[0], l[1], u[2]) + at(l[0], u[1], l[2]) + at(u[0], l[1], l[2]) - at(l[0], l[1], l[2]);
  }

 private:
  T& at(int a, int b, int c) { return table_[a * stride_[0] + b * stride_[1] + c]; }
  const T& at(int a, int b, int c) const { return table_[a * stride_[0] + b * stride_[1] + c]; }

  int n_ = 1;
  Index dims_{1, 1, 1};
  std::size_t stride_[3]{1, 1, 1};
  std::vector<T> table_;
};

}  // namespace regext
