#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "symdet/bench.hpp"
#include "symdet/checkpoint.hpp"
#include "symdet/errors.hpp"
#include "symdet/eval.hpp"
#include "symdet/scene_io.hpp"
#include "symdet/search.hpp"
#include "symdet/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitNoEvidence = 3;
constexpr int kExitCheckpoint = 4;
constexpr int kExitBenchGate = 5;

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string token = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    values.push_back(std::stoi(token));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return values;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string token = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
    values.push_back(std::stod(token));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return values;
}

int resolve_thread_flag(int flag_value) {
  if (flag_value >= 0) return flag_value;
  if (const char* env = std::getenv("SYMDET_THREADS")) {
    return std::max(0, std::atoi(env));
  }
  return 0;
}

void write_json(const json& value, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << value.dump(2) << "\n";
}

json normal_to_json(const Eigen::Vector3d& n) { return json::array({n.x(), n.y(), n.z()}); }

struct DetectArgs {
  std::string scene_path;
  std::string stages = "128,64,64";
  std::string deltas = "90,12.86,3.28";
  std::string reducer = "max-depth";
  std::string scorer = "reducer";
  std::string checkpoint;
  double d_min = 0.64;
  double d_max = 1.23;
  int depth_samples = 64;
  std::string out_path;
  int threads = -1;
};

int cmd_detect(const DetectArgs& args) {
  symdet::SearchConfig config;
  config.stage_counts = parse_int_list(args.stages);
  config.deltas_deg = parse_double_list(args.deltas);
  config.sweep = symdet::DepthSweep(args.d_min, args.d_max, args.depth_samples);
  config.threads = resolve_thread_flag(args.threads);
  if (args.reducer == "max-depth") {
    config.reducer = symdet::Reducer::kMaxDepth;
  } else if (args.reducer == "mean") {
    config.reducer = symdet::Reducer::kMean;
  } else {
    throw std::invalid_argument("unknown reducer: " + args.reducer);
  }
  if (args.scorer == "reducer") {
    config.scorer = symdet::ScorerKind::kReducer;
  } else if (args.scorer == "edgeconv") {
    config.scorer = symdet::ScorerKind::kEdgeConv;
  } else {
    throw std::invalid_argument("unknown scorer: " + args.scorer);
  }
  config.validate();

  std::optional<symdet::DetectorWeights> weights;
  if (config.scorer == symdet::ScorerKind::kEdgeConv) {
    if (args.checkpoint.empty() || !fs::exists(args.checkpoint)) {
      throw symdet::CheckpointError("EdgeConv scoring requires --checkpoint pointing to a file");
    }
    weights = symdet::load_checkpoint(args.checkpoint);
  }

  const symdet::Scene scene = symdet::read_scene(args.scene_path);
  const auto start = std::chrono::steady_clock::now();
  const symdet::DetectionResult result =
      symdet::multi_stage_detect(scene, config, weights ? &*weights : nullptr);
  const double timing_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  const fs::path out_path(args.out_path);
  const std::string stem = out_path.stem().string();

  json per_stage = json::array();
  for (std::size_t s = 0; s < result.per_stage.size(); ++s) {
    const symdet::StageRecord& record = result.per_stage[s];
    const std::string scores_name = stem + "_stage" + std::to_string(s) + "_scores.csv";
    const fs::path scores_path = out_path.parent_path() / scores_name;
    std::ofstream csv(scores_path, std::ios::trunc);
    if (!csv) throw std::runtime_error("cannot write " + scores_path.string());
    csv << "index,nx,ny,nz,score\n";
    char line[160];
    for (int i = 0; i < record.lattice.size(); ++i) {
      const Eigen::Vector3d& n = record.lattice.normals[i];
      std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g,%.17g\n", i, n.x(), n.y(), n.z(),
                    record.scores[i]);
      csv << line;
    }
    json stage;
    stage["delta_deg"] = config.deltas_deg[s];
    stage["count"] = record.lattice.size();
    stage["argmax_index"] = record.argmax_index;
    stage["argmax_normal"] = normal_to_json(record.lattice.normals[record.argmax_index]);
    stage["scores_path"] = scores_name;
    per_stage.push_back(stage);
  }

  json out;
  out["predicted_normal"] = normal_to_json(result.plane.normal());
  out["confidence"] = result.confidence;
  out["per_stage"] = per_stage;
  out["timing_ms"] = timing_ms;
  out["config"] = {{"stages", config.stage_counts},
                   {"deltas", config.deltas_deg},
                   {"reducer", args.reducer},
                   {"scorer", args.scorer},
                   {"dmin", config.sweep.d_min},
                   {"dmax", config.sweep.d_max},
                   {"depth_samples", config.sweep.count}};
  std::printf("predicted normal (%.6f, %.6f, %.6f), confidence %.6f\n", result.plane.normal().x(),
              result.plane.normal().y(), result.plane.normal().z(), result.confidence);
  if (scene.gt_normal) {
    const double error = symdet::angle_between_deg(result.plane.normal(), *scene.gt_normal);
    out["gt_error_deg"] = error;
    std::printf("ground-truth angular error: %.4f deg\n", error);
  }
  write_json(out, args.out_path);
  return 0;
}

struct SynthArgs {
  std::uint64_t seed = 1;
  int pairs = 128;
  int distractors = 16;
  double noise = 0.0;
  int count = 1;
  std::string out_dir;
};

int cmd_synth(const SynthArgs& args) {
  if (args.pairs < 1) {
    throw std::invalid_argument("--pairs must be at least 1");
  }
  if (args.count < 1) {
    throw std::invalid_argument("--count must be at least 1");
  }
  fs::create_directories(args.out_dir);
  for (int k = 0; k < args.count; ++k) {
    symdet::SynthParams params;
    params.n_pairs = args.pairs;
    params.n_distractors = args.distractors;
    params.noise_sigma = args.noise;
    params.seed = args.seed + static_cast<std::uint64_t>(k);
    const symdet::SyntheticScene scene = symdet::generate_scene(params);
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%04d.json", k);
    symdet::write_scene(scene.scene, (fs::path(args.out_dir) / name).string());
  }
  std::printf("wrote %d scene(s) to %s\n", args.count, args.out_dir.c_str());
  return 0;
}

struct EvalArgs {
  std::string pred_dir;
  std::string gt_dir;
  std::string thresholds = "1,3,5,10";
  std::string out_path;
};

Eigen::Vector3d read_normal_from_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw symdet::SceneIoError("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw symdet::SceneIoError("malformed JSON in " + path.string() + ": " + e.what());
  }
  const char* key = doc.contains("predicted_normal") ? "predicted_normal"
                    : doc.contains("gt_normal")      ? "gt_normal"
                                                     : nullptr;
  if (key == nullptr) {
    throw symdet::SceneIoError(path.string() + " holds neither predicted_normal nor gt_normal");
  }
  const json& n = doc.at(key);
  if (!n.is_array() || n.size() != 3) {
    throw symdet::SceneIoError(path.string() + " normal must be a 3-array");
  }
  return Eigen::Vector3d(n[0].get<double>(), n[1].get<double>(), n[2].get<double>());
}

std::vector<fs::path> sorted_json_files(const std::string& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) {
    throw symdet::SceneIoError(dir + " is not a directory");
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

int cmd_eval(const EvalArgs& args) {
  const std::vector<fs::path> pred_files = sorted_json_files(args.pred_dir);
  const std::vector<fs::path> gt_files = sorted_json_files(args.gt_dir);
  if (pred_files.size() != gt_files.size() || pred_files.empty()) {
    throw symdet::SceneIoError("prediction and ground-truth directories must hold the same, "
                               "nonzero number of JSON files");
  }
  std::vector<double> errors;
  errors.reserve(pred_files.size());
  for (std::size_t i = 0; i < pred_files.size(); ++i) {
    const Eigen::Vector3d pred = read_normal_from_json(pred_files[i]);
    const Eigen::Vector3d gt = read_normal_from_json(gt_files[i]);
    errors.push_back(symdet::angle_between_deg(pred.normalized(), gt.normalized()));
  }

  const std::vector<double> thresholds = parse_double_list(args.thresholds);
  const symdet::EvalReport report = symdet::evaluate(errors, thresholds);

  json out;
  out["count"] = errors.size();
  out["errors_deg"] = report.errors_deg;
  json aa = json::object();
  for (const auto& [theta, value] : report.aa) {
    char key[32];
    std::snprintf(key, sizeof(key), "%g", theta);
    aa[key] = value;
    std::printf("AA@%g: %.4f\n", theta, value);
  }
  out["aa"] = aa;
  write_json(out, args.out_path);

  const fs::path curve_path = fs::path(args.out_path).replace_extension(".csv");
  std::ofstream csv(curve_path, std::ios::trunc);
  csv << "threshold_deg,accuracy\n";
  char line[80];
  for (const auto& [t, acc] : report.curve) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g\n", t, acc);
    csv << line;
  }
  return 0;
}

struct BenchArgs {
  int h = 64, w = 64, c = 64, d = 64;
  std::string planes = "256";
  int repeats = 3;
  int threads = -1;
  std::string out_path;
};

int cmd_bench(const BenchArgs& args) {
  symdet::BenchShape shape{args.h, args.w, args.c, args.d};
  const std::vector<int> plane_counts = parse_int_list(args.planes);
  const symdet::BenchReport report =
      symdet::run_bench(shape, plane_counts, args.repeats, resolve_thread_flag(args.threads));

  json out;
  out["shape"] = {{"height", shape.height},
                  {"width", shape.width},
                  {"channels", shape.channels},
                  {"depth", shape.depth}};
  out["repeats"] = report.repeats;
  out["threads"] = report.threads;
  out["element_ratio"] = report.element_ratio;
  out["correlation_elements"] = report.correlation_elements;
  out["volume_elements_per_plane"] = report.volume_elements;
  out["baseline_elements_per_plane"] = report.baseline_elements;
  out["baseline_elements_per_plane_c32"] = report.baseline_elements_c32;
  out["max_score_difference"] = report.max_score_difference;
  json runs = json::array();
  for (const symdet::BenchRun& run : report.runs) {
    json r;
    r["planes"] = run.plane_count;
    r["correlation"] = {{"one_time_ms", run.correlation.one_time_ms},
                        {"per_plane_ms", run.correlation.per_plane_ms},
                        {"total_ms", run.correlation.total_ms},
                        {"planes_per_second", run.correlation.planes_per_second},
                        {"one_time_bytes", run.correlation.one_time_bytes},
                        {"per_plane_bytes", run.correlation.per_plane_bytes}};
    r["baseline"] = {{"one_time_ms", run.baseline.one_time_ms},
                     {"per_plane_ms", run.baseline.per_plane_ms},
                     {"total_ms", run.baseline.total_ms},
                     {"planes_per_second", run.baseline.planes_per_second},
                     {"one_time_bytes", run.baseline.one_time_bytes},
                     {"per_plane_bytes", run.baseline.per_plane_bytes}};
    r["speedup"] = run.speedup;
    runs.push_back(r);
    std::printf("planes %4d: correlation %8.1f ms, baseline %10.1f ms, speedup %.2fx\n",
                run.plane_count, run.correlation.total_ms, run.baseline.total_ms, run.speedup);
  }
  out["runs"] = runs;
  if (report.runs.size() >= 3) {
    out["correlation_fit"] = {{"slope_ms_per_plane", report.correlation_fit.slope_ms_per_plane},
                              {"intercept_ms", report.correlation_fit.intercept_ms},
                              {"r2", report.correlation_fit.r2}};
    out["baseline_fit"] = {{"slope_ms_per_plane", report.baseline_fit.slope_ms_per_plane},
                           {"intercept_ms", report.baseline_fit.intercept_ms},
                           {"r2", report.baseline_fit.r2}};
  }
  write_json(out, args.out_path);

  const fs::path csv_path = fs::path(args.out_path).replace_extension(".csv");
  std::ofstream csv(csv_path, std::ios::trunc);
  csv << "planes,correlation_total_ms,correlation_per_plane_ms,baseline_total_ms,"
         "baseline_per_plane_ms,speedup\n";
  char line[200];
  for (const symdet::BenchRun& run : report.runs) {
    std::snprintf(line, sizeof(line), "%d,%.6f,%.6f,%.6f,%.6f,%.6f\n", run.plane_count,
                  run.correlation.total_ms, run.correlation.per_plane_ms, run.baseline.total_ms,
                  run.baseline.per_plane_ms, run.speedup);
    csv << line;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"3D mirror-symmetry plane detection from single-view feature maps"};
  app.require_subcommand(1);

  DetectArgs detect_args;
  CLI::App* detect = app.add_subcommand("detect", "Detect the mirror plane of a scene file");
  detect->add_option("--scene", detect_args.scene_path, "Scene JSON header")->required();
  detect->add_option("--stages", detect_args.stages, "Per-stage candidate counts");
  detect->add_option("--deltas", detect_args.deltas, "Per-stage cap half-angles in degrees");
  detect->add_option("--reducer", detect_args.reducer, "max-depth or mean");
  detect->add_option("--scorer", detect_args.scorer, "reducer or edgeconv");
  detect->add_option("--checkpoint", detect_args.checkpoint, "Weights for --scorer edgeconv");
  detect->add_option("--dmin", detect_args.d_min, "Minimum sweep depth");
  detect->add_option("--dmax", detect_args.d_max, "Maximum sweep depth");
  detect->add_option("--depth-samples", detect_args.depth_samples, "Depth sample count");
  detect->add_option("--out", detect_args.out_path, "Result JSON path")->required();
  detect->add_option("--threads", detect_args.threads, "Worker threads (0 = auto)");

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "Generate synthetic scenes");
  synth->add_option("--seed", synth_args.seed, "Base seed; scene k uses seed+k");
  synth->add_option("--pairs", synth_args.pairs, "Mirror pairs per scene");
  synth->add_option("--distractors", synth_args.distractors, "Unpaired points per scene");
  synth->add_option("--noise", synth_args.noise, "Per-channel Gaussian noise sigma");
  synth->add_option("--count", synth_args.count, "Number of scenes");
  synth->add_option("--out-dir", synth_args.out_dir, "Output directory")->required();

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Angle-accuracy evaluation of predictions");
  eval->add_option("--pred", eval_args.pred_dir, "Directory of result JSON files")->required();
  eval->add_option("--gt", eval_args.gt_dir, "Directory of scene/result JSON files")->required();
  eval->add_option("--thresholds", eval_args.thresholds, "AA thresholds in degrees");
  eval->add_option("--out", eval_args.out_path, "Report JSON path")->required();

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "Correlation path vs 4D baseline benchmark");
  bench->add_option("--h", bench_args.h, "Grid height");
  bench->add_option("--w", bench_args.w, "Grid width");
  bench->add_option("--c", bench_args.c, "Feature channels");
  bench->add_option("--d", bench_args.d, "Depth samples");
  bench->add_option("--planes", bench_args.planes, "Plane count(s), comma separated");
  bench->add_option("--repeats", bench_args.repeats, "Timing repeats (median reported)");
  bench->add_option("--threads", bench_args.threads, "Worker threads (0/unset = single)");
  bench->add_option("--out", bench_args.out_path, "Report JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (detect->parsed()) return cmd_detect(detect_args);
    if (synth->parsed()) return cmd_synth(synth_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (bench->parsed()) return cmd_bench(bench_args);
  } catch (const symdet::NoEvidenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoEvidence;
  } catch (const symdet::CheckpointError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckpoint;
  } catch (const symdet::BenchGateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBenchGate;
  } catch (const symdet::SceneIoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const symdet::GenerationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return 0;
}
