#pragma once

namespace supeval {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace supeval
