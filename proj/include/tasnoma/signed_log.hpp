#pragma once

// Sign / log-magnitude reals and compensated accumulation over them.
//
// Series coefficients for the combined-branch distributions span thousands
// of orders of magnitude, so they are stored as sign * exp(log_magnitude)
// with the log held in long double.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

namespace tasnoma {

using log_real = long double;

struct signed_log {
  int sign = 0;  // -1, 0, +1
  log_real log_magnitude = -std::numeric_limits<log_real>::infinity();

  static signed_log zero() noexcept { return {}; }

  static signed_log from_value(log_real v) noexcept {
    if (v == 0) return zero();
    return {v < 0 ? -1 : 1, std::log(std::fabs(v))};
  }

  bool is_zero() const noexcept { return sign == 0; }

  log_real value() const noexcept { return sign == 0 ? log_real(0) : sign * std::exp(log_magnitude); }

  friend signed_log operator*(signed_log a, signed_log b) noexcept {
    if (a.sign == 0 || b.sign == 0) return zero();
    return {a.sign * b.sign, a.log_magnitude + b.log_magnitude};
  }
  friend signed_log operator/(signed_log a, signed_log b) noexcept {
    if (a.sign == 0) return zero();
    return {a.sign * b.sign, a.log_magnitude - b.log_magnitude};
  }
  signed_log scaled_by_log(log_real log_factor) const noexcept {
    if (sign == 0) return zero();
    return {sign, log_magnitude + log_factor};
  }
};

// Neumaier (improved Kahan-Babuska) running sum.
template <class T>
class compensated_sum {
 public:
  void add(T x) noexcept {
    const T t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
    abs_ += std::fabs(x);
  }
  T value() const noexcept { return sum_ + comp_; }
  T abs_total() const noexcept { return abs_; }

 private:
  T sum_{0};
  T comp_{0};
  T abs_{0};
};

struct signed_log_sum {
  signed_log total;
  // max |term| / |sum|; infinity when the terms cancel exactly.
  log_real cancellation = 1;
};

// Sums terms given in sign/log form. Terms are rescaled by the largest
// magnitude, then accumulated in order with compensation.
inline signed_log_sum accumulate(std::span<const signed_log> terms) {
  log_real peak = -std::numeric_limits<log_real>::infinity();
  for (const auto& t : terms)
    if (t.sign != 0) peak = std::max(peak, t.log_magnitude);
  if (!std::isfinite(peak)) return {signed_log::zero(), 1};

  compensated_sum<log_real> acc;
  for (const auto& t : terms)
    if (t.sign != 0) acc.add(t.sign * std::exp(t.log_magnitude - peak));
  const log_real s = acc.value();
  if (s == 0) return {signed_log::zero(), std::numeric_limits<log_real>::infinity()};
  return {{s < 0 ? -1 : 1, peak + std::log(std::fabs(s))}, 1 / std::fabs(s)};
}

}  // namespace tasnoma
