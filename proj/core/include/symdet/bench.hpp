#pragma once

#include <cstdint>
#include <vector>

namespace symdet {

struct BenchShape {
  int height = 64;
  int width = 64;
  int channels = 64;
  int depth = 64;
};

struct BenchPathStats {
  double one_time_ms = 0.0;
  double per_plane_ms = 0.0;
  double total_ms = 0.0;
  double planes_per_second = 0.0;
  std::uint64_t one_time_bytes = 0;
  std::uint64_t per_plane_bytes = 0;
};

struct BenchRun {
  int plane_count = 0;
  BenchPathStats correlation;
  BenchPathStats baseline;
  double speedup = 0.0;  // correlation throughput / baseline throughput
};

struct AffineFit {
  double slope_ms_per_plane = 0.0;
  double intercept_ms = 0.0;
  double r2 = 0.0;
};

struct BenchReport {
  BenchShape shape;
  int repeats = 0;
  int threads = 1;
  std::uint64_t element_ratio = 0;            // (2C*D*H*W) / (D*H*W) = 2C
  std::uint64_t correlation_elements = 0;     // H*W*H*W, one-time
  std::uint64_t volume_elements = 0;          // D*H*W per plane
  std::uint64_t baseline_elements = 0;        // 2C*D*H*W per plane
  std::uint64_t baseline_elements_c32 = 0;    // hypothetical 32-channel variant
  double max_score_difference = 0.0;
  std::vector<BenchRun> runs;
  AffineFit correlation_fit;  // populated when >= 3 plane counts are swept
  AffineFit baseline_fit;
};

/// Times the compact correlation-volume path against the 4D gather
/// baseline at matched shapes. Both paths are first verified to produce
/// the same plane scores (within 1e-4) and the same argmax; a mismatch
/// throws BenchGateError and nothing is reported. Timings are the median
/// of `repeats` runs after one warm-up.
BenchReport run_bench(const BenchShape& shape, const std::vector<int>& plane_counts, int repeats,
                      int threads);

}  // namespace symdet
