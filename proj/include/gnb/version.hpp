#pragma once

namespace gnb {
inline constexpr const char* kVersion = "0.1.0";
}
