#include "symdet/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <vector>

#include "symdet/errors.hpp"

namespace symdet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Entry {
  std::string name;
  std::vector<long> shape;
  std::vector<float> data;
};

void push_matrix(std::vector<Entry>& entries, const std::string& name, const Eigen::MatrixXd& m) {
  Entry e{name, {m.rows(), m.cols()}, {}};
  e.data.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      e.data.push_back(static_cast<float>(m(r, c)));
    }
  }
  entries.push_back(std::move(e));
}

void push_vector(std::vector<Entry>& entries, const std::string& name, const Eigen::VectorXd& v) {
  Entry e{name, {v.size()}, {}};
  e.data.reserve(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) e.data.push_back(static_cast<float>(v[i]));
  entries.push_back(std::move(e));
}

void push_scalars(std::vector<Entry>& entries, const std::string& name,
                  const std::vector<double>& values, std::vector<long> shape) {
  Entry e{name, std::move(shape), {}};
  e.data.reserve(values.size());
  for (double v : values) e.data.push_back(static_cast<float>(v));
  entries.push_back(std::move(e));
}

Eigen::MatrixXd to_matrix(const Entry& e) {
  if (e.shape.size() != 2) throw CheckpointError("entry " + e.name + " is not a matrix");
  Eigen::MatrixXd m(e.shape[0], e.shape[1]);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = static_cast<double>(e.data[k++]);
    }
  }
  return m;
}

Eigen::VectorXd to_vector(const Entry& e) {
  if (e.shape.size() != 1) throw CheckpointError("entry " + e.name + " is not a vector");
  Eigen::VectorXd v(e.shape[0]);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = static_cast<double>(e.data[i]);
  return v;
}

}  // namespace

DetectorWeights DetectorWeights::create(int descriptor_width, std::uint64_t seed) {
  return DetectorWeights{ConvStack::random(seed), ScoringHead::create(descriptor_width, seed + 1)};
}

void save_checkpoint(const DetectorWeights& weights, const std::string& json_path) {
  std::vector<Entry> entries;
  for (int b = 0; b < 3; ++b) {
    const ConvBlock& block = weights.conv_stack.blocks[b];
    push_scalars(entries, "conv" + std::to_string(b) + ".weight",
                 {block.weights.begin(), block.weights.end()}, {3, 3, 3});
    push_scalars(entries, "conv" + std::to_string(b) + ".bias", {block.bias}, {1});
  }
  for (std::size_t l = 0; l < weights.head.layers.size(); ++l) {
    const EdgeConvLayer& layer = weights.head.layers[l];
    const std::string prefix = "edgeconv" + std::to_string(l);
    push_matrix(entries, prefix + ".weight", layer.weight);
    push_vector(entries, prefix + ".bias", layer.bias);
    push_vector(entries, prefix + ".running_mean", layer.running_mean);
    push_vector(entries, prefix + ".running_var", layer.running_var);
  }
  push_matrix(entries, "logit.weight", weights.head.logit_weight.transpose());
  push_scalars(entries, "logit.bias", {weights.head.logit_bias}, {1});

  const fs::path header_path(json_path);
  const fs::path blob_name = header_path.stem().string() + ".f32";
  std::vector<float> blob;
  json manifest;
  manifest["version"] = 1;
  manifest["dtype"] = "float32";
  manifest["byte_order"] = "little-endian";
  manifest["blob_path"] = blob_name.string();
  manifest["leaky_slope"] = weights.conv_stack.leaky_slope;
  manifest["norm_eps"] = weights.head.layers.empty() ? 1e-5 : weights.head.layers[0].norm_eps;
  manifest["norm_momentum"] =
      weights.head.layers.empty() ? 0.1 : weights.head.layers[0].norm_momentum;
  json entry_list = json::array();
  for (const Entry& e : entries) {
    json item;
    item["name"] = e.name;
    item["shape"] = e.shape;
    item["offset"] = blob.size() * sizeof(float);
    item["count"] = e.data.size();
    entry_list.push_back(item);
    blob.insert(blob.end(), e.data.begin(), e.data.end());
  }
  manifest["entries"] = entry_list;

  {
    std::ofstream out(header_path.parent_path() / blob_name, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint blob");
    out.write(reinterpret_cast<const char*>(blob.data()),
              static_cast<std::streamsize>(blob.size() * sizeof(float)));
  }
  std::ofstream out(header_path, std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint manifest: " + json_path);
  out << manifest.dump(2) << "\n";
}

DetectorWeights load_checkpoint(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw CheckpointError("cannot open checkpoint manifest: " + json_path);
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint manifest: ") + e.what());
  }

  std::vector<float> blob;
  std::map<std::string, Entry> entries;
  try {
    const fs::path blob_path =
        fs::path(json_path).parent_path() / manifest.at("blob_path").get<std::string>();
    std::ifstream blob_in(blob_path, std::ios::binary);
    if (!blob_in) throw CheckpointError("cannot open checkpoint blob: " + blob_path.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(blob_in)),
                            std::istreambuf_iterator<char>());
    blob.resize(bytes.size() / sizeof(float));
    std::memcpy(blob.data(), bytes.data(), blob.size() * sizeof(float));

    for (const json& item : manifest.at("entries")) {
      Entry e;
      e.name = item.at("name").get<std::string>();
      e.shape = item.at("shape").get<std::vector<long>>();
      const std::size_t offset = item.at("offset").get<std::size_t>() / sizeof(float);
      const std::size_t count = item.at("count").get<std::size_t>();
      long expected = 1;
      for (long s : e.shape) expected *= s;
      if (static_cast<long>(count) != expected || offset + count > blob.size()) {
        throw CheckpointError("checkpoint entry " + e.name + " has inconsistent shape");
      }
      e.data.assign(blob.begin() + offset, blob.begin() + offset + count);
      entries[e.name] = std::move(e);
    }
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint manifest missing fields: ") + e.what());
  }

  const auto get = [&](const std::string& name) -> const Entry& {
    const auto it = entries.find(name);
    if (it == entries.end()) throw CheckpointError("checkpoint is missing entry " + name);
    return it->second;
  };

  DetectorWeights weights{ConvStack{}, ScoringHead{}};
  weights.conv_stack.leaky_slope = manifest.value("leaky_slope", 0.2);
  for (int b = 0; b < 3; ++b) {
    const Entry& w = get("conv" + std::to_string(b) + ".weight");
    if (w.data.size() != 27) throw CheckpointError("conv block weight must have 27 values");
    for (int k = 0; k < 27; ++k) {
      weights.conv_stack.blocks[b].weights[k] = static_cast<double>(w.data[k]);
    }
    weights.conv_stack.blocks[b].bias =
        static_cast<double>(get("conv" + std::to_string(b) + ".bias").data.at(0));
  }

  const double norm_eps = manifest.value("norm_eps", 1e-5);
  const double norm_momentum = manifest.value("norm_momentum", 0.1);
  for (std::size_t l = 0;; ++l) {
    const std::string prefix = "edgeconv" + std::to_string(l);
    if (entries.find(prefix + ".weight") == entries.end()) break;
    EdgeConvLayer layer;
    layer.weight = to_matrix(get(prefix + ".weight"));
    layer.bias = to_vector(get(prefix + ".bias"));
    layer.running_mean = to_vector(get(prefix + ".running_mean"));
    layer.running_var = to_vector(get(prefix + ".running_var"));
    layer.leaky_slope = manifest.value("leaky_slope", 0.2);
    layer.norm_eps = norm_eps;
    layer.norm_momentum = norm_momentum;
    if (layer.bias.size() != layer.weight.rows() ||
        layer.running_mean.size() != layer.weight.rows() ||
        layer.running_var.size() != layer.weight.rows()) {
      throw CheckpointError("layer " + prefix + " has inconsistent shapes");
    }
    weights.head.layers.push_back(std::move(layer));
  }
  if (weights.head.layers.empty()) {
    throw CheckpointError("checkpoint holds no EdgeConv layers");
  }
  weights.head.logit_weight = to_matrix(get("logit.weight")).transpose();
  weights.head.logit_bias = static_cast<double>(get("logit.bias").data.at(0));
  if (weights.head.logit_weight.cols() != weights.head.layers.back().out_features()) {
    throw CheckpointError("logit layer width does not match the last EdgeConv layer");
  }
  return weights;
}

}  // namespace symdet
