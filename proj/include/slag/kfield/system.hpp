// SPDX-License-Identifier: MIT
//
// The seven constraint systems of the generic branch and their metadata.
#pragma once

#include <array>
#include <string>
#include <string_view>

#include "slag/error.hpp"

namespace slag {

enum class SystemId { constraa, constrab, cpk1, cpk2, kh, kh2, kh3 };

inline constexpr std::array<SystemId, 7> kAllSystems = {SystemId::constraa, SystemId::constrab, SystemId::cpk1,
                                                        SystemId::cpk2,     SystemId::kh,       SystemId::kh2,
                                                        SystemId::kh3};

inline const char* to_string(SystemId s) {
  switch (s) {
    case SystemId::constraa: return "constraa";
    case SystemId::constrab: return "constrab";
    case SystemId::cpk1: return "cpk1";
    case SystemId::cpk2: return "cpk2";
    case SystemId::kh: return "kh";
    case SystemId::kh2: return "kh2";
    case SystemId::kh3: return "kh3";
  }
  return "?";
}

inline SystemId parse_system(std::string_view name) {
  for (SystemId s : kAllSystems)
    if (name == to_string(s)) return s;
  throw Error(ErrorCode::Configuration, "unknown system '" + std::string(name) + "'");
}

inline int system_epsilon(SystemId s) {
  switch (s) {
    case SystemId::constraa:
    case SystemId::constrab: return 0;
    case SystemId::cpk1:
    case SystemId::cpk2: return 1;
    default: return -1;
  }
}

/// Systems where z² = −ε̃ (a₂ = 0, b₂ = ±√|ε + a₃²|); they carry only k₁, k₂.
inline bool z_singular(SystemId s) {
  return s == SystemId::constrab || s == SystemId::cpk2 || s == SystemId::kh3;
}

/// Number of unknown fields: 4, or 2 for the z-singular systems.
inline int field_count(SystemId s) { return z_singular(s) ? 2 : 4; }

}  // namespace slag
