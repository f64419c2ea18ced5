#pragma once

namespace msmac {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace msmac
