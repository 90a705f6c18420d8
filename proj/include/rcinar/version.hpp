#pragma once

namespace rcinar {

inline constexpr const char* kVersion = "rcinar 0.1.0";

}  // namespace rcinar
