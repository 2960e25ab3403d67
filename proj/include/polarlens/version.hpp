#pragma once

namespace polarlens {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace polarlens
