#pragma once

#include <string>

#include "symdet/scene.hpp"

namespace symdet {

/// Writes `scene.json` (header with intrinsics, optional gt_normal, blob
/// name and SHA-256) plus a sibling `.f32` blob of little-endian floats,
/// row-major [height][width][channels].
void write_scene(const Scene& scene, const std::string& json_path);

/// Reads and validates a scene written by write_scene. Throws SceneIoError
/// on malformed headers, truncated blobs, shape mismatches, or checksum
/// failures.
Scene read_scene(const std::string& json_path);

/// SHA-256 hex digest, used for blob integrity checks.
std::string sha256_hex(const void* data, std::size_t size);

}  // namespace symdet
