#pragma once

namespace ellsos {

inline constexpr const char* version = "0.1.0";

}  // namespace ellsos
