#pragma once

namespace pimbs {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace pimbs
