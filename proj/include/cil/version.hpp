#pragma once

namespace cil {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cil
