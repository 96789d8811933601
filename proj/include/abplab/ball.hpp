#pragma once

#include <numbers>
#include <stdexcept>

namespace abp {

/// Volume of the unit ball in R^d, d >= 1, from |B^0| = 1, |B^1| = 2 and
/// |B^d| = (2 pi / d) |B^{d-2}|.
template <typename Scalar = double>
Scalar ball_volume(int d) {
  if (d < 1) throw std::invalid_argument("ball_volume: dimension must be at least 1");
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  Scalar volume = d % 2 == 0 ? Scalar(1) : Scalar(2);
  for (int k = d % 2 == 0 ? 2 : 3; k <= d; k += 2) volume *= two_pi / Scalar(k);
  return volume;
}

}  // namespace abp
