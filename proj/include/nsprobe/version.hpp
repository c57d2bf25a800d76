#pragma once

namespace nsprobe {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace nsprobe
