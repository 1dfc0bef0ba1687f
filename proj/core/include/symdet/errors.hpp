#pragma once

#include <stdexcept>
#include <string>

namespace symdet {

/// Scene file could not be read, parsed, or validated.
struct SceneIoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Synthetic scene generation ran out of rejection-sampling budget.
struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Every candidate plane of a search stage scored as empty evidence.
struct NoEvidenceError : std::runtime_error {
  explicit NoEvidenceError(int stage)
      : std::runtime_error("no evidence at search stage " + std::to_string(stage)),
        stage(stage) {}
  int stage;
};

/// Checkpoint file missing, malformed, or incompatible with the request.
struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The two benchmark paths disagreed on scores; refusing to report timings.
struct BenchGateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace symdet
