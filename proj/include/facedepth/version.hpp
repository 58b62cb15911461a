#pragma once

namespace facedepth {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace facedepth
