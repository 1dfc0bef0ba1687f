#include "symdet/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "symdet/errors.hpp"
#include "symdet/rng.hpp"

namespace symdet {

namespace {

struct EdgeList {
  std::vector<int> src;
  std::vector<int> dst;
  std::vector<int> first_edge;  // per node, index of its first edge
  std::vector<int> degree;

  int edge_count() const { return static_cast<int>(src.size()); }
};

EdgeList build_edges(const std::vector<std::vector<int>>& graph, int node_count) {
  if (static_cast<int>(graph.size()) != node_count) {
    throw std::invalid_argument("adjacency size does not match the node count");
  }
  EdgeList edges;
  edges.first_edge.resize(node_count);
  edges.degree.resize(node_count);
  for (int i = 0; i < node_count; ++i) {
    if (graph[i].empty()) {
      throw std::invalid_argument("every node needs at least one out-neighbor");
    }
    edges.first_edge[i] = edges.edge_count();
    edges.degree[i] = static_cast<int>(graph[i].size());
    for (int j : graph[i]) {
      if (j < 0 || j >= node_count) {
        throw std::invalid_argument("adjacency index out of range");
      }
      edges.src.push_back(i);
      edges.dst.push_back(j);
    }
  }
  return edges;
}

double leaky(double x, double slope) { return x > 0.0 ? x : slope * x; }

struct LayerTrace {
  Eigen::MatrixXd xhat;           // E x F_out, normalized pre-activations
  Eigen::MatrixXd output;         // K x F_out
  std::vector<int> argmax_edge;   // K * F_out
  Eigen::VectorXd inv_std;        // F_out, for the mode actually used
  Eigen::VectorXd batch_mean;     // training mode only
  Eigen::VectorXd batch_var;      // biased, training mode only
  bool training = false;
};

LayerTrace layer_forward(const EdgeConvLayer& layer, const Eigen::MatrixXd& features,
                         const EdgeList& edges, NormMode mode) {
  const int f_in = layer.in_features();
  const int f_out = layer.out_features();
  if (features.cols() != f_in) {
    throw std::invalid_argument("node feature width does not match the layer");
  }
  const int nodes = static_cast<int>(features.rows());
  const int edge_count = edges.edge_count();

  const auto w_self = layer.weight.leftCols(f_in);
  const auto w_diff = layer.weight.rightCols(f_in);
  // z_e = W_self h_src + W_diff (h_dst - h_src) + b, from per-node products.
  const Eigen::MatrixXd self_term = features * (w_self - w_diff).transpose();
  const Eigen::MatrixXd dst_term = features * w_diff.transpose();

  LayerTrace trace;
  trace.training = (mode == NormMode::kTraining);
  Eigen::MatrixXd pre(edge_count, f_out);
  for (int e = 0; e < edge_count; ++e) {
    pre.row(e) =
        self_term.row(edges.src[e]) + dst_term.row(edges.dst[e]) + layer.bias.transpose();
  }

  Eigen::VectorXd mean(f_out);
  trace.inv_std.resize(f_out);
  if (trace.training) {
    trace.batch_mean = pre.colwise().mean().transpose();
    trace.batch_var.resize(f_out);
    for (int f = 0; f < f_out; ++f) {
      trace.batch_var[f] = (pre.col(f).array() - trace.batch_mean[f]).square().mean();
    }
    mean = trace.batch_mean;
    for (int f = 0; f < f_out; ++f) {
      trace.inv_std[f] = 1.0 / std::sqrt(trace.batch_var[f] + layer.norm_eps);
    }
  } else {
    mean = layer.running_mean;
    for (int f = 0; f < f_out; ++f) {
      trace.inv_std[f] = 1.0 / std::sqrt(layer.running_var[f] + layer.norm_eps);
    }
  }
  trace.xhat.resize(edge_count, f_out);
  for (int f = 0; f < f_out; ++f) {
    trace.xhat.col(f) = ((pre.col(f).array() - mean[f]) * trace.inv_std[f]).matrix();
  }

  trace.output.setZero(nodes, f_out);
  trace.argmax_edge.assign(static_cast<std::size_t>(nodes) * f_out, -1);
  for (int i = 0; i < nodes; ++i) {
    const int begin = edges.first_edge[i];
    const int end = begin + edges.degree[i];
    for (int f = 0; f < f_out; ++f) {
      double best = -std::numeric_limits<double>::infinity();
      int best_edge = begin;
      for (int e = begin; e < end; ++e) {
        const double value = leaky(trace.xhat(e, f), layer.leaky_slope);
        if (value > best) {
          best = value;
          best_edge = e;
        }
      }
      trace.output(i, f) = best;
      trace.argmax_edge[static_cast<std::size_t>(i) * f_out + f] = best_edge;
    }
  }
  return trace;
}

/// Backward through one layer. Returns gradients and writes dL/d(features).
EdgeConvGrad layer_backward(const EdgeConvLayer& layer, const Eigen::MatrixXd& features,
                            const EdgeList& edges, const LayerTrace& trace,
                            const Eigen::MatrixXd& upstream) {
  const int f_in = layer.in_features();
  const int f_out = layer.out_features();
  const int nodes = static_cast<int>(features.rows());
  const int edge_count = edges.edge_count();

  // Max aggregation routes each (node, feature) gradient to its argmax edge.
  Eigen::MatrixXd d_act = Eigen::MatrixXd::Zero(edge_count, f_out);
  for (int i = 0; i < nodes; ++i) {
    for (int f = 0; f < f_out; ++f) {
      d_act(trace.argmax_edge[static_cast<std::size_t>(i) * f_out + f], f) += upstream(i, f);
    }
  }

  Eigen::MatrixXd d_xhat(edge_count, f_out);
  for (int f = 0; f < f_out; ++f) {
    for (int e = 0; e < edge_count; ++e) {
      d_xhat(e, f) = d_act(e, f) * (trace.xhat(e, f) > 0.0 ? 1.0 : layer.leaky_slope);
    }
  }

  Eigen::MatrixXd d_pre(edge_count, f_out);
  if (trace.training) {
    for (int f = 0; f < f_out; ++f) {
      const double mean_d = d_xhat.col(f).mean();
      const double mean_dx = (d_xhat.col(f).array() * trace.xhat.col(f).array()).mean();
      d_pre.col(f) = (trace.inv_std[f] *
                      (d_xhat.col(f).array() - mean_d - trace.xhat.col(f).array() * mean_dx))
                         .matrix();
    }
  } else {
    for (int f = 0; f < f_out; ++f) {
      d_pre.col(f) = d_xhat.col(f) * trace.inv_std[f];
    }
  }

  Eigen::MatrixXd sum_src = Eigen::MatrixXd::Zero(nodes, f_out);
  Eigen::MatrixXd sum_dst = Eigen::MatrixXd::Zero(nodes, f_out);
  for (int e = 0; e < edge_count; ++e) {
    sum_src.row(edges.src[e]) += d_pre.row(e);
    sum_dst.row(edges.dst[e]) += d_pre.row(e);
  }

  const auto w_self = layer.weight.leftCols(f_in);
  const auto w_diff = layer.weight.rightCols(f_in);

  EdgeConvGrad grad;
  grad.weight.resize(f_out, 2 * f_in);
  grad.weight.leftCols(f_in) = sum_src.transpose() * features;
  grad.weight.rightCols(f_in) = (sum_dst - sum_src).transpose() * features;
  grad.bias = d_pre.colwise().sum().transpose();
  grad.input = sum_src * (w_self - w_diff) + sum_dst * w_diff;
  return grad;
}

double sigmoid(double logit) {
  if (logit >= 0.0) return 1.0 / (1.0 + std::exp(-logit));
  const double e = std::exp(logit);
  return e / (1.0 + e);
}

}  // namespace

EdgeConvLayer EdgeConvLayer::create(int f_in, int f_out, RngStream& rng) {
  if (f_in < 1 || f_out < 1) {
    throw std::invalid_argument("layer widths must be positive");
  }
  EdgeConvLayer layer;
  const double bound = std::sqrt(1.0 / (2.0 * f_in));
  layer.weight.resize(f_out, 2 * f_in);
  for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      layer.weight(r, c) = rng.uniform(-bound, bound);
    }
  }
  layer.bias.resize(f_out);
  for (Eigen::Index i = 0; i < f_out; ++i) layer.bias[i] = rng.uniform(-bound, bound);
  layer.running_mean = Eigen::VectorXd::Zero(f_out);
  layer.running_var = Eigen::VectorXd::Ones(f_out);
  return layer;
}

Eigen::MatrixXd edgeconv_forward(const EdgeConvLayer& layer, const Eigen::MatrixXd& node_features,
                                 const std::vector<std::vector<int>>& graph, NormMode mode) {
  const EdgeList edges = build_edges(graph, static_cast<int>(node_features.rows()));
  return layer_forward(layer, node_features, edges, mode).output;
}

EdgeConvGrad edgeconv_param_grad(const EdgeConvLayer& layer, const Eigen::MatrixXd& node_features,
                                 const std::vector<std::vector<int>>& graph, NormMode mode,
                                 const Eigen::MatrixXd& upstream) {
  const EdgeList edges = build_edges(graph, static_cast<int>(node_features.rows()));
  const LayerTrace trace = layer_forward(layer, node_features, edges, mode);
  if (upstream.rows() != trace.output.rows() || upstream.cols() != trace.output.cols()) {
    throw std::invalid_argument("upstream gradient shape mismatch");
  }
  return layer_backward(layer, node_features, edges, trace, upstream);
}

ScoringHead ScoringHead::create(int input_width, std::uint64_t seed) {
  return create({input_width, 256, 128, 64}, seed);
}

ScoringHead ScoringHead::create(const std::vector<int>& widths, std::uint64_t seed) {
  if (widths.size() < 2) {
    throw std::invalid_argument("head needs at least one EdgeConv layer");
  }
  RngStream rng(seed);
  ScoringHead head;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    head.layers.push_back(EdgeConvLayer::create(widths[i], widths[i + 1], rng));
  }
  const int last = widths.back();
  const double bound = std::sqrt(1.0 / last);
  head.logit_weight.resize(last);
  for (int i = 0; i < last; ++i) head.logit_weight[i] = rng.uniform(-bound, bound);
  head.logit_bias = rng.uniform(-bound, bound);
  return head;
}

Eigen::VectorXd head_forward(const ScoringHead& head, const Eigen::MatrixXd& descriptors,
                             const std::vector<std::vector<int>>& graph, NormMode mode) {
  const EdgeList edges = build_edges(graph, static_cast<int>(descriptors.rows()));
  Eigen::MatrixXd features = descriptors;
  for (const EdgeConvLayer& layer : head.layers) {
    features = layer_forward(layer, features, edges, mode).output;
  }
  Eigen::VectorXd confidences(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    confidences[i] = sigmoid(head.logit_weight.dot(features.row(i)) + head.logit_bias);
  }
  return confidences;
}

StageLabels stage_labels(const SphericalLattice& lattice, const Eigen::Vector3d& gt_normal) {
  if (lattice.size() < 2) {
    throw std::invalid_argument("stage labels need at least two lattice nodes");
  }
  int best = 0;
  double best_angle = angle_between_deg(lattice.normals[0], gt_normal);
  for (int i = 1; i < lattice.size(); ++i) {
    const double angle = angle_between_deg(lattice.normals[i], gt_normal);
    if (angle < best_angle) {
      best_angle = angle;
      best = i;
    }
  }
  StageLabels labels;
  labels.positives.push_back(best);
  labels.negatives.reserve(lattice.size() - 1);
  for (int i = 0; i < lattice.size(); ++i) {
    if (i != best) labels.negatives.push_back(i);
  }
  return labels;
}

double class_balanced_bce(const Eigen::VectorXd& confidences, const StageLabels& labels) {
  if (labels.positives.empty() || labels.negatives.empty()) {
    throw std::invalid_argument("class-balanced BCE needs both positive and negative labels");
  }
  const auto clamp = [](double c) { return std::clamp(c, 1e-7, 1.0 - 1e-7); };
  const auto check = [&](int i) {
    if (i < 0 || i >= confidences.size()) {
      throw std::invalid_argument("label index out of range");
    }
  };
  double pos = 0.0;
  for (int i : labels.positives) {
    check(i);
    pos -= std::log(clamp(confidences[i]));
  }
  double neg = 0.0;
  for (int i : labels.negatives) {
    check(i);
    neg -= std::log(1.0 - clamp(confidences[i]));
  }
  return 0.5 * pos / labels.positives.size() + 0.5 * neg / labels.negatives.size();
}

HeadGradients zero_gradients(const ScoringHead& head) {
  HeadGradients grads;
  for (const EdgeConvLayer& layer : head.layers) {
    EdgeConvGrad g;
    g.weight = Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols());
    g.bias = Eigen::VectorXd::Zero(layer.bias.size());
    grads.layers.push_back(std::move(g));
  }
  grads.logit_weight = Eigen::RowVectorXd::Zero(head.logit_weight.size());
  grads.logit_bias = 0.0;
  return grads;
}

void accumulate(HeadGradients& into, const HeadGradients& item) {
  for (std::size_t l = 0; l < into.layers.size(); ++l) {
    into.layers[l].weight += item.layers[l].weight;
    into.layers[l].bias += item.layers[l].bias;
  }
  into.logit_weight += item.logit_weight;
  into.logit_bias += item.logit_bias;
}

HeadGradients head_loss_grad(const ScoringHead& head, const Eigen::MatrixXd& descriptors,
                             const std::vector<std::vector<int>>& graph, const StageLabels& labels,
                             NormMode mode, double* loss_out, BatchStats* stats_out) {
  const int nodes = static_cast<int>(descriptors.rows());
  const EdgeList edges = build_edges(graph, nodes);

  std::vector<Eigen::MatrixXd> inputs;  // per layer
  std::vector<LayerTrace> traces;
  inputs.push_back(descriptors);
  for (const EdgeConvLayer& layer : head.layers) {
    traces.push_back(layer_forward(layer, inputs.back(), edges, mode));
    inputs.push_back(traces.back().output);
  }
  const Eigen::MatrixXd& last = inputs.back();

  Eigen::VectorXd logits(nodes);
  Eigen::VectorXd confidences(nodes);
  for (int i = 0; i < nodes; ++i) {
    logits[i] = head.logit_weight.dot(last.row(i)) + head.logit_bias;
    confidences[i] = sigmoid(logits[i]);
  }
  const double loss = class_balanced_bce(confidences, labels);
  if (loss_out) *loss_out = loss;

  // d(loss)/d(logit) through the sigmoid, per-class averaged.
  Eigen::VectorXd d_logit = Eigen::VectorXd::Zero(nodes);
  const double pos_scale = 0.5 / labels.positives.size();
  const double neg_scale = 0.5 / labels.negatives.size();
  for (int i : labels.positives) d_logit[i] += pos_scale * (confidences[i] - 1.0);
  for (int i : labels.negatives) d_logit[i] += neg_scale * confidences[i];

  HeadGradients grads = zero_gradients(head);
  grads.logit_weight = d_logit.transpose() * last;
  grads.logit_bias = d_logit.sum();

  Eigen::MatrixXd upstream = d_logit * head.logit_weight;
  for (int l = static_cast<int>(head.layers.size()) - 1; l >= 0; --l) {
    EdgeConvGrad g =
        layer_backward(head.layers[l], inputs[l], edges, traces[l], upstream);
    upstream = g.input;
    grads.layers[l].weight = std::move(g.weight);
    grads.layers[l].bias = std::move(g.bias);
  }

  if (stats_out) {
    stats_out->means.clear();
    stats_out->vars.clear();
    const double n = static_cast<double>(edges.edge_count());
    for (const LayerTrace& trace : traces) {
      stats_out->means.push_back(trace.training ? trace.batch_mean : Eigen::VectorXd());
      if (trace.training) {
        const double correction = n > 1.0 ? n / (n - 1.0) : 1.0;
        stats_out->vars.push_back(trace.batch_var * correction);
      } else {
        stats_out->vars.emplace_back();
      }
    }
  }
  return grads;
}

AdamState AdamState::create(const ScoringHead& head) {
  return AdamState{zero_gradients(head), zero_gradients(head), 0};
}

namespace {

void adam_update(double& param, double& m, double& v, double grad, const TrainOptions& opt,
                 double bias1, double bias2) {
  m = opt.beta1 * m + (1.0 - opt.beta1) * grad;
  v = opt.beta2 * v + (1.0 - opt.beta2) * grad * grad;
  const double m_hat = m / bias1;
  const double v_hat = v / bias2;
  param -= opt.learning_rate * m_hat / (std::sqrt(v_hat) + opt.eps);
  param -= opt.learning_rate * opt.weight_decay * param;
}

template <typename Param, typename Grad>
void adam_update_array(Param& param, Param& m, Param& v, const Grad& grad,
                       const TrainOptions& opt, double bias1, double bias2) {
  for (Eigen::Index c = 0; c < param.cols(); ++c) {
    for (Eigen::Index r = 0; r < param.rows(); ++r) {
      adam_update(param(r, c), m(r, c), v(r, c), grad(r, c), opt, bias1, bias2);
    }
  }
}

}  // namespace

double train_step(ScoringHead& head, const std::vector<TrainItem>& batch, AdamState& state,
                  const TrainOptions& options) {
  if (batch.empty()) {
    throw std::invalid_argument("training batch must not be empty");
  }
  HeadGradients total = zero_gradients(head);
  double total_loss = 0.0;
  for (const TrainItem& item : batch) {
    double loss = 0.0;
    BatchStats stats;
    const HeadGradients grads =
        head_loss_grad(head, item.descriptors, item.graph, item.labels, NormMode::kTraining,
                       &loss, &stats);
    total_loss += loss;
    accumulate(total, grads);
    for (std::size_t l = 0; l < head.layers.size(); ++l) {
      EdgeConvLayer& layer = head.layers[l];
      layer.running_mean =
          (1.0 - layer.norm_momentum) * layer.running_mean + layer.norm_momentum * stats.means[l];
      layer.running_var =
          (1.0 - layer.norm_momentum) * layer.running_var + layer.norm_momentum * stats.vars[l];
    }
  }
  if (!std::isfinite(total_loss)) {
    throw DivergenceError("training loss is not finite");
  }

  ++state.step;
  const double bias1 = 1.0 - std::pow(options.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(options.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < head.layers.size(); ++l) {
    adam_update_array(head.layers[l].weight, state.first_moment.layers[l].weight,
                      state.second_moment.layers[l].weight, total.layers[l].weight, options, bias1,
                      bias2);
    adam_update_array(head.layers[l].bias, state.first_moment.layers[l].bias,
                      state.second_moment.layers[l].bias, total.layers[l].bias, options, bias1,
                      bias2);
  }
  adam_update_array(head.logit_weight, state.first_moment.logit_weight,
                    state.second_moment.logit_weight, total.logit_weight, options, bias1, bias2);
  adam_update(head.logit_bias, state.first_moment.logit_bias, state.second_moment.logit_bias,
              total.logit_bias, options, bias1, bias2);
  return total_loss;
}

}  // namespace symdet
