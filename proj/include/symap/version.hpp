#pragma once

namespace symap {

inline constexpr int version_major = 0;
inline constexpr int version_minor = 3;
inline constexpr int version_patch = 0;
inline constexpr const char* version_string = "0.3.0";

// Bumped whenever an on-disk layout changes incompatibly.
inline constexpr int format_version = 1;

}  // namespace symap
