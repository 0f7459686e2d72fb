#pragma once

namespace uld {
inline constexpr const char* kVersion = "0.1.0";
}
