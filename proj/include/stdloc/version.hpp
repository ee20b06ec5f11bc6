#pragma once

namespace stdloc {

inline constexpr const char* kArtifactName = "stdloc";
inline constexpr const char* kArtifactVersion = "1.0.0";

// Bumped whenever the on-disk layout of JSON/CSV artifacts changes.
inline constexpr int kSchemaVersion = 1;

} // namespace stdloc
