#pragma once

namespace grosslab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace grosslab
