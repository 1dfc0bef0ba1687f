#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "symdet/hemisphere.hpp"

namespace symdet {

class RngStream;

enum class NormMode { kTraining, kEvaluation };

/// Graph convolution over the candidate-plane lattice. Edge features are
/// [h_i ; h_j - h_i], mapped by one affine layer, normalized per output
/// feature (batch statistics over all edges in training mode, running
/// statistics in evaluation mode), leaky-rectified, and max-aggregated
/// over each node's out-neighbors.
struct EdgeConvLayer {
  Eigen::MatrixXd weight;        // F_out x 2*F_in
  Eigen::VectorXd bias;          // F_out
  Eigen::VectorXd running_mean;  // F_out
  Eigen::VectorXd running_var;   // F_out
  double leaky_slope = 0.2;
  double norm_eps = 1e-5;
  double norm_momentum = 0.1;

  int in_features() const { return static_cast<int>(weight.cols()) / 2; }
  int out_features() const { return static_cast<int>(weight.rows()); }

  static EdgeConvLayer create(int f_in, int f_out, RngStream& rng);
};

Eigen::MatrixXd edgeconv_forward(const EdgeConvLayer& layer, const Eigen::MatrixXd& node_features,
                                 const std::vector<std::vector<int>>& graph, NormMode mode);

struct EdgeConvGrad {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
  Eigen::MatrixXd input;  // gradient wrt node features
};

/// Analytic gradients of sum(upstream .* output) wrt the layer parameters
/// and its input.
EdgeConvGrad edgeconv_param_grad(const EdgeConvLayer& layer, const Eigen::MatrixXd& node_features,
                                 const std::vector<std::vector<int>>& graph, NormMode mode,
                                 const Eigen::MatrixXd& upstream);

/// Three stacked EdgeConv blocks followed by a per-node logit and sigmoid.
struct ScoringHead {
  std::vector<EdgeConvLayer> layers;
  Eigen::RowVectorXd logit_weight;
  double logit_bias = 0.0;

  int input_width() const { return layers.empty() ? 0 : layers.front().in_features(); }

  /// Default widths input -> 256 -> 128 -> 64 -> 1.
  static ScoringHead create(int input_width, std::uint64_t seed);
  static ScoringHead create(const std::vector<int>& widths, std::uint64_t seed);
};

/// Per-node confidences in (0, 1).
Eigen::VectorXd head_forward(const ScoringHead& head, const Eigen::MatrixXd& descriptors,
                             const std::vector<std::vector<int>>& graph, NormMode mode);

/// Positive / negative node index sets over one stage lattice.
struct StageLabels {
  std::vector<int> positives;
  std::vector<int> negatives;
};

/// Single positive: the lattice node nearest the ground-truth normal.
StageLabels stage_labels(const SphericalLattice& lattice, const Eigen::Vector3d& gt_normal);

/// 0.5 * mean_pos(-log c) + 0.5 * mean_neg(-log(1 - c)), confidences
/// clamped to [1e-7, 1 - 1e-7]. Both classes must be nonempty.
double class_balanced_bce(const Eigen::VectorXd& confidences, const StageLabels& labels);

struct HeadGradients {
  std::vector<EdgeConvGrad> layers;
  Eigen::RowVectorXd logit_weight;
  double logit_bias = 0.0;
};

HeadGradients zero_gradients(const ScoringHead& head);
void accumulate(HeadGradients& into, const HeadGradients& item);

/// Batch statistics observed by one training-mode forward, used to update
/// running normalization statistics.
struct BatchStats {
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::VectorXd> vars;  // unbiased
};

/// Forward + class-balanced BCE + full backward in one pass. Pure; running
/// statistics are not touched (train_step applies them from `stats_out`).
HeadGradients head_loss_grad(const ScoringHead& head, const Eigen::MatrixXd& descriptors,
                             const std::vector<std::vector<int>>& graph, const StageLabels& labels,
                             NormMode mode, double* loss_out, BatchStats* stats_out = nullptr);

struct TrainItem {
  Eigen::MatrixXd descriptors;
  std::vector<std::vector<int>> graph;
  StageLabels labels;
};

struct TrainOptions {
  double learning_rate = 3e-4;
  double weight_decay = 1e-7;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam first/second-moment state, decoupled weight decay.
struct AdamState {
  HeadGradients first_moment;
  HeadGradients second_moment;
  long step = 0;

  static AdamState create(const ScoringHead& head);
};

/// One adaptive update over the summed batch loss; returns the pre-update
/// loss. Throws DivergenceError on a non-finite loss.
double train_step(ScoringHead& head, const std::vector<TrainItem>& batch, AdamState& state,
                  const TrainOptions& options = {});

}  // namespace symdet
