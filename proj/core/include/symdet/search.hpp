#pragma once

#include <vector>

#include "symdet/checkpoint.hpp"
#include "symdet/hemisphere.hpp"
#include "symdet/scene.hpp"
#include "symdet/volume.hpp"

namespace symdet {

enum class ScorerKind { kReducer, kEdgeConv };

struct SearchConfig {
  std::vector<int> stage_counts{128, 64, 64};
  std::vector<double> deltas_deg{90.0, 12.86, 3.28};
  Reducer reducer = Reducer::kMaxDepth;
  ScorerKind scorer = ScorerKind::kReducer;
  DepthSweep sweep{0.64, 1.23, 64};
  int threads = 0;  // 0 picks the hardware concurrency
  int knn_neighbors = 16;

  void validate() const;
};

struct StageRecord {
  SphericalLattice lattice;
  std::vector<double> scores;
  int argmax_index;
};

struct DetectionResult {
  MirrorPlane plane;
  double confidence;
  std::vector<StageRecord> per_stage;
};

/// Coarse-to-fine hemisphere search: stage 0 covers the hemisphere with a
/// 90-degree cap around (0,0,-1); each later stage samples a shrinking cap
/// around the previous argmax. Candidates are scored concurrently against
/// the shared correlation tensor; argmax ties break to the lowest index.
DetectionResult multi_stage_detect(const Scene& scene, const SearchConfig& config,
                                   const DetectorWeights* weights = nullptr);

}  // namespace symdet
