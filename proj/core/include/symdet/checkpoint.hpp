#pragma once

#include <string>

#include "symdet/scorer.hpp"
#include "symdet/volume.hpp"

namespace symdet {

/// Everything the learned scoring path needs: the volume downscaler and
/// the EdgeConv head.
struct DetectorWeights {
  ConvStack conv_stack;
  ScoringHead head;

  static DetectorWeights create(int descriptor_width, std::uint64_t seed);
};

/// Writes a JSON manifest (parameter names, shapes, byte offsets) next to a
/// flat blob of little-endian 32-bit floats.
void save_checkpoint(const DetectorWeights& weights, const std::string& json_path);

/// Throws CheckpointError on missing files, malformed manifests, or
/// inconsistent shapes.
DetectorWeights load_checkpoint(const std::string& json_path);

}  // namespace symdet
