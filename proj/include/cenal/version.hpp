#pragma once

namespace cenal {
inline constexpr const char* kVersion = "0.1.0";
}
