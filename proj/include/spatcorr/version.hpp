#pragma once

namespace spatcorr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace spatcorr
