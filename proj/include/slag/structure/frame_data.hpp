// SPDX-License-Identifier: MIT
//
// Reduced connection/shape scalars of the adapted frame and their
// directional derivatives along X₁…X₄.
#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace slag {

enum class Coef : std::size_t { a1, a2, a3, a6, b1, b2, b6, c6, d6, r };
inline constexpr std::size_t kCoefCount = 10;

inline const char* to_string(Coef c) {
  static constexpr const char* names[] = {"a1", "a2", "a3", "a6", "b1", "b2", "b6", "c6", "d6", "r"};
  return names[static_cast<std::size_t>(c)];
}

struct FrameCoefficients {
  double a1 = 0, a2 = 0, a3 = 0, a6 = 0, b1 = 0, b2 = 0, b6 = 0, c6 = 0, d6 = 0, r = 0;

  double& operator[](Coef c) {
    switch (c) {
      case Coef::a1: return a1;
      case Coef::a2: return a2;
      case Coef::a3: return a3;
      case Coef::a6: return a6;
      case Coef::b1: return b1;
      case Coef::b2: return b2;
      case Coef::b6: return b6;
      case Coef::c6: return c6;
      case Coef::d6: return d6;
      case Coef::r: return r;
    }
    return r;
  }
  double operator[](Coef c) const { return const_cast<FrameCoefficients&>(*this)[c]; }
};

/// Coefficients plus X_i(coefficient) for i = 0..3 (X₁…X₄).
struct FieldSample {
  FrameCoefficients c;
  std::array<std::array<double, 4>, kCoefCount> d{};

  double X(int i, Coef k) const { return d[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]; }
  double& X(int i, Coef k) { return d[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]; }
};

}  // namespace slag
