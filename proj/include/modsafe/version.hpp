#pragma once

namespace modsafe {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace modsafe
