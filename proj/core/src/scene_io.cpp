#include "symdet/scene_io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "symdet/errors.hpp"

namespace symdet {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(const void* data, std::size_t size) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data, size, digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out(length * 2, '0');
  for (unsigned int i = 0; i < length; ++i) {
    out[2 * i] = hex[digest[i] >> 4];
    out[2 * i + 1] = hex[digest[i] & 0x0f];
  }
  return out;
}

void write_scene(const Scene& scene, const std::string& json_path) {
  const fs::path header_path(json_path);
  const fs::path blob_name = header_path.stem().string() + ".f32";
  const fs::path blob_path = header_path.parent_path() / blob_name;

  const auto& values = scene.features.values();
  const std::size_t byte_count = values.size() * sizeof(float);
  {
    std::ofstream blob(blob_path, std::ios::binary | std::ios::trunc);
    if (!blob) throw SceneIoError("cannot open blob for writing: " + blob_path.string());
    blob.write(reinterpret_cast<const char*>(values.data()),
               static_cast<std::streamsize>(byte_count));
    if (!blob) throw SceneIoError("failed to write blob: " + blob_path.string());
  }

  json header;
  header["version"] = 1;
  header["height"] = scene.features.height();
  header["width"] = scene.features.width();
  header["channels"] = scene.features.channels();
  header["intrinsics"] = {{"fx", scene.intrinsics.fx},
                          {"fy", scene.intrinsics.fy},
                          {"cx", scene.intrinsics.cx},
                          {"cy", scene.intrinsics.cy}};
  if (scene.gt_normal) {
    header["gt_normal"] = {scene.gt_normal->x(), scene.gt_normal->y(), scene.gt_normal->z()};
  }
  header["blob_path"] = blob_name.string();
  header["blob_sha256"] = sha256_hex(values.data(), byte_count);

  std::ofstream out(header_path, std::ios::trunc);
  if (!out) throw SceneIoError("cannot open scene header for writing: " + json_path);
  out << header.dump(2) << "\n";
}

Scene read_scene(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw SceneIoError("cannot open scene header: " + json_path);
  json header;
  try {
    in >> header;
  } catch (const json::exception& e) {
    throw SceneIoError(std::string("malformed scene header: ") + e.what());
  }

  int height = 0, width = 0, channels = 0;
  CameraIntrinsics intrinsics;
  std::string blob_name, expected_sha;
  try {
    height = header.at("height").get<int>();
    width = header.at("width").get<int>();
    channels = header.at("channels").get<int>();
    const json& k = header.at("intrinsics");
    intrinsics = CameraIntrinsics(k.at("fx").get<double>(), k.at("fy").get<double>(),
                                  k.at("cx").get<double>(), k.at("cy").get<double>());
    blob_name = header.at("blob_path").get<std::string>();
    expected_sha = header.at("blob_sha256").get<std::string>();
  } catch (const json::exception& e) {
    throw SceneIoError(std::string("scene header missing fields: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SceneIoError(std::string("invalid intrinsics: ") + e.what());
  }
  if (height < 1 || width < 1 || channels < 1) {
    throw SceneIoError("scene header declares non-positive dimensions");
  }

  std::optional<Eigen::Vector3d> gt;
  if (header.contains("gt_normal")) {
    const json& n = header.at("gt_normal");
    if (!n.is_array() || n.size() != 3) {
      throw SceneIoError("gt_normal must be a 3-array");
    }
    Eigen::Vector3d normal(n[0].get<double>(), n[1].get<double>(), n[2].get<double>());
    if (std::abs(normal.norm() - 1.0) > 1e-6) {
      throw SceneIoError("gt_normal must be unit length");
    }
    gt = normal;
  }

  const fs::path blob_path = fs::path(json_path).parent_path() / blob_name;
  std::ifstream blob(blob_path, std::ios::binary);
  if (!blob) throw SceneIoError("cannot open blob: " + blob_path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(blob)), std::istreambuf_iterator<char>());

  const std::size_t expected_bytes =
      static_cast<std::size_t>(height) * width * channels * sizeof(float);
  if (bytes.size() < expected_bytes) {
    throw SceneIoError("blob is truncated: " + blob_path.string());
  }
  if (bytes.size() > expected_bytes) {
    throw SceneIoError("blob is larger than the declared shape: " + blob_path.string());
  }
  if (sha256_hex(bytes.data(), bytes.size()) != expected_sha) {
    throw SceneIoError("blob checksum mismatch: " + blob_path.string());
  }

  Scene scene{FeatureMap(height, width, channels), intrinsics, gt};
  std::memcpy(scene.features.values().data(), bytes.data(), expected_bytes);
  return scene;
}

}  // namespace symdet
