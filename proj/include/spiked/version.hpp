#pragma once

namespace spiked {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace spiked
