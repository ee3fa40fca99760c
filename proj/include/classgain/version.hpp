#pragma once

namespace classgain {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace classgain
