#pragma once

namespace qilab {
inline constexpr const char* kVersion = "0.1.0";
}
