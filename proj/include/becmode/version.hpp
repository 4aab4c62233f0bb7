#pragma once

namespace becmode {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace becmode
