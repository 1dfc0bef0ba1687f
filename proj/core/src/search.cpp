#include "symdet/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "symdet/errors.hpp"
#include "threading.hpp"

namespace symdet {

void SearchConfig::validate() const {
  if (stage_counts.empty() || stage_counts.size() != deltas_deg.size()) {
    throw std::invalid_argument("stage counts and deltas must have equal, nonzero length");
  }
  for (int count : stage_counts) {
    if (count < 1) throw std::invalid_argument("every stage needs at least one candidate");
  }
  if (deltas_deg.front() != 90.0) {
    throw std::invalid_argument("the first stage delta must be 90 degrees");
  }
  for (std::size_t i = 1; i < deltas_deg.size(); ++i) {
    if (!(deltas_deg[i] < deltas_deg[i - 1]) || !(deltas_deg[i] > 0.0)) {
      throw std::invalid_argument("stage deltas must be strictly decreasing and positive");
    }
  }
  if (knn_neighbors < 1) {
    throw std::invalid_argument("knn_neighbors must be positive");
  }
}

namespace {

int argmax_lowest_index(const std::vector<double>& scores) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(scores.size()); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

}  // namespace

DetectionResult multi_stage_detect(const Scene& scene, const SearchConfig& config,
                                   const DetectorWeights* weights) {
  config.validate();
  if (config.scorer == ScorerKind::kEdgeConv && weights == nullptr) {
    throw std::invalid_argument("EdgeConv scoring needs detector weights");
  }

  const FeatureMap normalized = normalize(scene.features);
  const CorrelationTensor tensor = build_correlation(normalized);
  const CameraIntrinsics& intrinsics = scene.intrinsics;

  const int stages = static_cast<int>(config.stage_counts.size());
  std::vector<StageRecord> records;
  records.reserve(stages);
  Eigen::Vector3d center(0.0, 0.0, -1.0);

  for (int stage = 0; stage < stages; ++stage) {
    SphericalLattice lattice = cap_lattice(center, config.deltas_deg[stage],
                                           config.stage_counts[stage]);
    lattice.stage_index = stage;
    const int count = lattice.size();

    std::vector<double> scores(count, -std::numeric_limits<double>::infinity());
    if (config.scorer == ScorerKind::kReducer) {
      parallel_for(count, config.threads, [&](int i) {
        const MirrorPlane plane = MirrorPlane::canonicalized(lattice.normals[i]);
        const CorrelationVolume volume = build_volume(tensor, intrinsics, plane, config.sweep);
        scores[i] = reduce_score(volume, config.reducer);
      });
    } else {
      lattice.knn = knn_graph(lattice, config.knn_neighbors);
      const int descriptor_width = static_cast<int>(
          static_cast<long>(tensor.height() / 8) * (tensor.width() / 8) * (config.sweep.count / 4));
      if (weights->head.input_width() != descriptor_width) {
        throw CheckpointError("checkpoint expects descriptor width " +
                              std::to_string(weights->head.input_width()) + " but the scene yields " +
                              std::to_string(descriptor_width));
      }
      Eigen::MatrixXd descriptors(count, descriptor_width);
      parallel_for(count, config.threads, [&](int i) {
        const MirrorPlane plane = MirrorPlane::canonicalized(lattice.normals[i]);
        const CorrelationVolume volume = build_volume(tensor, intrinsics, plane, config.sweep);
        const std::vector<double> descriptor = downscale3d(volume, weights->conv_stack);
        for (int k = 0; k < descriptor_width; ++k) descriptors(i, k) = descriptor[k];
      });
      const Eigen::VectorXd confidences =
          head_forward(weights->head, descriptors, lattice.knn, NormMode::kEvaluation);
      for (int i = 0; i < count; ++i) scores[i] = confidences[i];
    }

    const bool any_evidence =
        std::any_of(scores.begin(), scores.end(), [](double s) { return std::isfinite(s); });
    if (!any_evidence) {
      throw NoEvidenceError(stage);
    }

    const int best = argmax_lowest_index(scores);
    center = lattice.normals[best];
    records.push_back(StageRecord{std::move(lattice), std::move(scores), best});
  }

  const StageRecord& final_stage = records.back();
  const MirrorPlane plane =
      MirrorPlane::canonicalized(final_stage.lattice.normals[final_stage.argmax_index]);
  const double confidence = final_stage.scores[final_stage.argmax_index];
  return DetectionResult{plane, confidence, std::move(records)};
}

}  // namespace symdet
