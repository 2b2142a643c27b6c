#pragma once

namespace wxpipe {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace wxpipe
