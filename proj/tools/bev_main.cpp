// Command-line front end: scene generation, rendering, the lift-splat
// pipeline, the IPM baseline, metrics, gradient checks and the splat
// micro-benchmark. All subcommands are deterministic given their flags,
// except for the timing column of `bench`.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bev/grad_check.hpp"
#include "bev/loss.hpp"
#include "bev/metrics.hpp"
#include "bev/pipeline.hpp"
#include "bev/rng.hpp"
#include "bev/scene.hpp"
#include "bev/serial.hpp"
#include "bev/splat.hpp"
#include "bev/tensor_io.hpp"

namespace fs = std::filesystem;
using namespace bev;

namespace {

struct GenSceneArgs {
  std::uint64_t seed = 0;
  std::string out;
  std::string rig_out;
  int min_objects = 5;
  int max_objects = 10;
  double radius = 40.0;
  int cameras = 6;
  int width = 640;
  int height = 360;
  double focal = 400.0;
  double road_x_min = -50.0, road_x_max = 50.0, road_y_min = -5.0, road_y_max = 5.0;
};

struct RenderArgs {
  std::string scene_path;
  std::string rig_path;
  std::string out_dir;
};

struct PipelineArgs {
  std::string scene_path;
  std::string inputs_dir;
  std::string rig_path;
  std::string out_tensor;
  std::string objects_path;
  std::string labels_path;
  std::string out_dir;
  std::string detection_depth = "oracle";
  int stride = 8;
};

struct IpmArgs {
  std::string scene_path;
  std::string rig_path;
  std::string out_tensor;
  std::string camera;  // empty = fuse all cameras
  std::string out_dir;
};

struct EvalArgs {
  std::string pred_dir;
  std::string gt_dir;
  double gate = 2.0;
  std::string mask_path;
  std::string out_csv;
  std::string out_json;
};

struct GradArgs {
  std::uint64_t seed = 0;
  int instances = 100;
};

struct BenchArgs {
  int cameras = 7;
  int repeat = 3;
  int channels = 16;
  int width = 1280;
  int height = 720;
  std::string out_csv;
};

Scene load_scene(const std::string& scene_path, const std::string& rig_path) {
  Scene scene = scene_from_json(read_text_file(scene_path));
  if (!rig_path.empty()) {
    scene.rig = rig_from_json(read_text_file(rig_path));
  }
  scene.rig.validate();
  return scene;
}

void write_labels_tensor(const fs::path& path, const SemanticBevMap& labels) {
  write_tensor(path, to_tensor(labels.labels,
                               {static_cast<std::uint32_t>(labels.grid.nx),
                                static_cast<std::uint32_t>(labels.grid.ny)}));
}

void write_mask_tensor(const fs::path& path, const std::vector<std::uint8_t>& mask,
                       const BevGridSpec& grid) {
  const std::vector<int> as_int(mask.begin(), mask.end());
  write_tensor(path, to_tensor(as_int, {static_cast<std::uint32_t>(grid.nx),
                                        static_cast<std::uint32_t>(grid.ny)}));
}

int run_gen_scene(const GenSceneArgs& args) {
  SceneGenParams params;
  params.min_objects = args.min_objects;
  params.max_objects = args.max_objects;
  params.placement_radius = args.radius;
  Scene scene = generate_scene(args.seed, params,
                               make_default_rig(args.cameras, args.width, args.height, args.focal));
  scene.road = {args.road_x_min, args.road_x_max, args.road_y_min, args.road_y_max};
  write_text_file(args.out, scene_to_json(scene));
  if (!args.rig_out.empty()) write_text_file(args.rig_out, rig_to_json(scene.rig));
  return 0;
}

int run_render(const RenderArgs& args) {
  const Scene scene = load_scene(args.scene_path, args.rig_path);
  const fs::path dir(args.out_dir);
  fs::create_directories(dir / "gt");
  fs::create_directories(dir / "masks");

  std::vector<RenderOutput> renders;
  for (const auto& cam : scene.rig.cameras) {
    RenderOutput render = render_camera(scene, cam);
    const auto w = static_cast<std::uint32_t>(cam.intrinsics.width);
    const auto h = static_cast<std::uint32_t>(cam.intrinsics.height);
    write_tensor(dir / (cam.name + "_depth.tensor"), to_tensor(render.depth, {h, w}));
    write_tensor(dir / (cam.name + "_semantic.tensor"), to_tensor(render.semantic.labels, {h, w}));
    write_text_file(dir / (cam.name + "_detections.json"), detections_to_json(render.detections));
    renders.push_back(std::move(render));
  }

  const PipelineOptions opts;
  const auto [gt_labels, gt_objects] = ground_truth_bev(scene, opts.grid);
  write_labels_tensor(dir / "gt" / "labels.tensor", gt_labels);
  write_text_file(dir / "gt" / "objects.json", objects_to_json(gt_objects));

  const GroundVisibility vis = visible_ground_masks(scene, renders, opts);
  write_mask_tensor(dir / "masks" / "lift_mask.tensor", vis.lift_mask, opts.grid);
  write_mask_tensor(dir / "masks" / "ipm_mask.tensor", vis.ipm_mask, opts.grid);
  return 0;
}

int run_pipeline_cmd(const PipelineArgs& args) {
  PipelineOptions opts;
  opts.feature_stride = args.stride;
  if (args.detection_depth == "oracle") {
    opts.detection_depth = DetectionDepthSource::kOracleCenter;
  } else if (args.detection_depth == "surface") {
    opts.detection_depth = DetectionDepthSource::kSurfaceBilinear;
  } else {
    throw std::invalid_argument("--detection-depth must be 'oracle' or 'surface'");
  }

  PipelineResult result;
  if (!args.inputs_dir.empty()) {
    CameraRig rig;
    if (!args.rig_path.empty()) {
      rig = rig_from_json(read_text_file(args.rig_path));
    } else if (!args.scene_path.empty()) {
      rig = load_scene(args.scene_path, "").rig;
    } else {
      throw std::invalid_argument("pipeline --inputs requires --rig or --scene");
    }
    const fs::path dir(args.inputs_dir);
    std::vector<CameraFrame> frames;
    for (const auto& cam : rig.cameras) {
      CameraFrame frame;
      frame.depth = tensor_to_doubles(read_tensor(dir / (cam.name + "_depth.tensor")));
      frame.semantic.height = cam.intrinsics.height;
      frame.semantic.width = cam.intrinsics.width;
      frame.semantic.num_classes = cls::kCount;
      frame.semantic.labels = tensor_to_ints(read_tensor(dir / (cam.name + "_semantic.tensor")));
      frame.detections =
          detections_from_json(read_text_file(dir / (cam.name + "_detections.json")));
      frames.push_back(std::move(frame));
    }
    result = run_pipeline_from_frames(frames, rig, opts);
  } else if (!args.scene_path.empty()) {
    const Scene scene = load_scene(args.scene_path, args.rig_path);
    result = run_pipeline(scene, opts);
  } else {
    throw std::invalid_argument("pipeline requires --scene or --inputs");
  }

  // Combined BEV tensor: per-class splatted mass followed by the object
  // channels (class scores, confidence, log-dimension).
  auto write_combined = [&](const fs::path& path) {
    const int kf = result.features.channels;
    const int ko = result.object_channels.channels();
    const auto& grid = result.features.grid;
    std::vector<double> combined(static_cast<std::size_t>(grid.nx) * grid.ny * (kf + ko));
    const std::size_t cells = static_cast<std::size_t>(grid.nx) * grid.ny;
    for (std::size_t c = 0; c < cells; ++c) {
      for (int k = 0; k < kf; ++k) {
        combined[c * (kf + ko) + k] = result.features.values[c * kf + k];
      }
      for (int k = 0; k < ko; ++k) {
        combined[c * (kf + ko) + kf + k] = result.object_channels.values[c * ko + k];
      }
    }
    write_tensor(path, to_tensor(combined, {static_cast<std::uint32_t>(grid.nx),
                                            static_cast<std::uint32_t>(grid.ny),
                                            static_cast<std::uint32_t>(kf + ko)}));
  };

  if (!args.out_tensor.empty()) write_combined(args.out_tensor);
  if (!args.objects_path.empty()) {
    write_text_file(args.objects_path, objects_to_json(result.objects));
  }
  if (!args.labels_path.empty()) write_labels_tensor(args.labels_path, result.labels);
  if (!args.out_dir.empty()) {
    const fs::path dir(args.out_dir);
    fs::create_directories(dir);
    write_combined(dir / "bev.tensor");
    write_labels_tensor(dir / "labels.tensor", result.labels);
    write_text_file(dir / "objects.json", objects_to_json(result.objects));
  }
  return 0;
}

int run_ipm(const IpmArgs& args) {
  const Scene scene = load_scene(args.scene_path, args.rig_path);
  const BevGridSpec grid = BevGridSpec::standard();
  SemanticBevMap map = SemanticBevMap::empty(grid, cls::kCount);
  if (args.camera.empty()) {
    std::vector<SemanticImage> images;
    for (const auto& cam : scene.rig.cameras) images.push_back(render_semantic(scene, cam));
    map = ipm_rasterize_rig(images, scene.rig, grid);
  } else {
    const CameraModel* cam = scene.rig.find(args.camera);
    if (cam == nullptr) throw std::invalid_argument("unknown camera '" + args.camera + "'");
    map = ipm_rasterize(render_semantic(scene, *cam), *cam, grid);
  }
  if (!args.out_tensor.empty()) write_labels_tensor(args.out_tensor, map);
  if (!args.out_dir.empty()) {
    fs::create_directories(args.out_dir);
    write_labels_tensor(fs::path(args.out_dir) / "labels.tensor", map);
  }
  return 0;
}

int run_eval(const EvalArgs& args) {
  const fs::path pred(args.pred_dir);
  const fs::path gt(args.gt_dir);
  const BevGridSpec grid = BevGridSpec::standard();

  auto load_labels = [&](const fs::path& dir) {
    SemanticBevMap map = SemanticBevMap::empty(grid, cls::kCount);
    const Tensor t = read_tensor(dir / "labels.tensor");
    if (t.dims.size() != 2 || static_cast<int>(t.dims[0]) != grid.nx ||
        static_cast<int>(t.dims[1]) != grid.ny) {
      throw std::invalid_argument("labels tensor is not " + std::to_string(grid.nx) + "x" +
                                  std::to_string(grid.ny));
    }
    map.labels = tensor_to_ints(t);
    return map;
  };
  auto load_objects = [](const fs::path& dir) -> std::vector<BevObject> {
    const fs::path p = dir / "objects.json";
    if (!fs::exists(p)) return {};
    return objects_from_json(read_text_file(p));
  };

  const SemanticBevMap pred_labels = load_labels(pred);
  const SemanticBevMap gt_labels = load_labels(gt);
  const std::vector<BevObject> pred_objects = load_objects(pred);
  const std::vector<BevObject> gt_objects = load_objects(gt);

  std::vector<std::uint8_t> mask;
  const std::vector<std::uint8_t>* mask_ptr = nullptr;
  if (!args.mask_path.empty()) {
    const Tensor t = read_tensor(args.mask_path);
    mask.reserve(t.data.size());
    for (const float v : t.data) mask.push_back(v != 0.0f ? 1 : 0);
    mask_ptr = &mask;
  }

  const MetricsReport report =
      evaluate_metrics(pred_labels, pred_objects, gt_labels, gt_objects, args.gate, mask_ptr);
  const std::string csv = metrics_to_csv(report);
  if (!args.out_csv.empty()) {
    write_text_file(args.out_csv, csv);
  } else {
    std::cout << csv;
  }
  if (!args.out_json.empty()) write_text_file(args.out_json, metrics_to_json(report));
  return 0;
}

int run_grad_check(const GradArgs& args) {
  std::ostringstream out;
  out << "component,instances,checked,skipped,max_rel_err\n";
  for (const auto& r : run_gradient_checks(args.seed, args.instances)) {
    out << r.component << "," << r.instances << "," << r.checked << "," << r.skipped << ","
        << r.max_rel_err << "\n";
  }
  std::cout << out.str();
  return 0;
}

int run_bench(const BenchArgs& args) {
  if (args.width % 8 != 0 || args.height % 8 != 0) {
    throw std::invalid_argument("bench: image dimensions must be divisible by 8");
  }
  const int h = args.height / 8;
  const int w = args.width / 8;
  const int d = 60;
  Rng rng(9);
  std::vector<FrustumGrid> frustums;
  std::vector<LiftedFeatures> lifted;
  for (int c = 0; c < args.cameras; ++c) {
    FrustumGrid f;
    f.h_cells = h;
    f.w_cells = w;
    f.depth_bins = d;
    f.camera_name = "bench" + std::to_string(c);
    f.points.resize(static_cast<std::size_t>(h) * w * d * 3);
    for (std::size_t p = 0; p < f.points.size() / 3; ++p) {
      f.points[3 * p] = rng.uniform(-60.0, 60.0);
      f.points[3 * p + 1] = rng.uniform(-60.0, 60.0);
      f.points[3 * p + 2] = rng.uniform(-1.0, 3.0);
    }
    LiftedFeatures l;
    l.h_cells = h;
    l.w_cells = w;
    l.depth_bins = d;
    l.channels = args.channels;
    l.values.resize(static_cast<std::size_t>(h) * w * d * args.channels);
    for (auto& v : l.values) v = rng.uniform(-1.0, 1.0);
    frustums.push_back(std::move(f));
    lifted.push_back(std::move(l));
  }
  const std::size_t points = static_cast<std::size_t>(args.cameras) * h * w * d;

  auto time_impl = [&](auto&& fn) {
    double best = 1e300;
    for (int r = 0; r < std::max(1, args.repeat); ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      const BevFeatureMap map = fn();
      const auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
      if (map.channels != args.channels) std::abort();
    }
    return best;
  };
  const BevGridSpec grid = BevGridSpec::standard();
  const double ref_ms = time_impl([&] { return splat_reference(frustums, lifted, grid); });
  const double srt_ms = time_impl([&] { return splat_sorted(frustums, lifted, grid); });

  std::ostringstream out;
  out << "impl,cameras,points,channels,millis\n";
  out << "reference," << args.cameras << "," << points << "," << args.channels << "," << ref_ms
      << "\n";
  out << "sorted," << args.cameras << "," << points << "," << args.channels << "," << srt_ms
      << "\n";
  if (!args.out_csv.empty()) {
    write_text_file(args.out_csv, out.str());
  } else {
    std::cout << out.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Camera-only BEV perception toolkit"};
  app.require_subcommand(1);

  GenSceneArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-scene", "Generate a deterministic synthetic scene");
  gen_cmd->add_option("--seed", gen.seed, "Scene seed")->required();
  gen_cmd->add_option("--out", gen.out, "Output scene JSON")->required();
  gen_cmd->add_option("--rig-out", gen.rig_out, "Also write the rig as standalone JSON");
  gen_cmd->add_option("--min-objects", gen.min_objects);
  gen_cmd->add_option("--max-objects", gen.max_objects);
  gen_cmd->add_option("--radius", gen.radius, "Placement radius in meters");
  gen_cmd->add_option("--cameras", gen.cameras, "Rig size (6 or 7)");
  gen_cmd->add_option("--image-width", gen.width);
  gen_cmd->add_option("--image-height", gen.height);
  gen_cmd->add_option("--focal", gen.focal);
  gen_cmd->add_option("--road-x-min", gen.road_x_min);
  gen_cmd->add_option("--road-x-max", gen.road_x_max);
  gen_cmd->add_option("--road-y-min", gen.road_y_min);
  gen_cmd->add_option("--road-y-max", gen.road_y_max);

  RenderArgs render;
  auto* render_cmd = app.add_subcommand(
      "render", "Render depth/semantic tensors, detections, ground truth and masks");
  render_cmd->add_option("--scene", render.scene_path)->required();
  render_cmd->add_option("--rig", render.rig_path, "Optional rig JSON override");
  render_cmd->add_option("--out-dir", render.out_dir)->required();

  PipelineArgs pipe;
  auto* pipe_cmd =
      app.add_subcommand("pipeline", "Lift-splat pipeline: BEV features, labels and objects");
  pipe_cmd->add_option("--scene", pipe.scene_path);
  pipe_cmd->add_option("--inputs", pipe.inputs_dir, "Directory produced by `render`");
  pipe_cmd->add_option("--rig", pipe.rig_path);
  pipe_cmd->add_option("--out", pipe.out_tensor, "Combined BEV feature tensor");
  pipe_cmd->add_option("--objects", pipe.objects_path, "BEV objects JSON");
  pipe_cmd->add_option("--labels", pipe.labels_path, "Argmax label tensor");
  pipe_cmd->add_option("--out-dir", pipe.out_dir, "Write bev/labels/objects set for `eval`");
  pipe_cmd->add_option("--detection-depth", pipe.detection_depth,
                       "oracle (scene mode) or surface (bilinear depth-map lookup)");
  pipe_cmd->add_option("--stride", pipe.stride, "Feature stride in pixels");

  IpmArgs ipm;
  auto* ipm_cmd = app.add_subcommand("ipm", "Inverse-perspective-mapping baseline");
  ipm_cmd->add_option("--scene", ipm.scene_path)->required();
  ipm_cmd->add_option("--rig", ipm.rig_path);
  ipm_cmd->add_option("--out", ipm.out_tensor, "BEV label tensor");
  ipm_cmd->add_option("--camera", ipm.camera, "Use a single camera instead of fusing all");
  ipm_cmd->add_option("--out-dir", ipm.out_dir, "Write labels.tensor for `eval`");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Metrics report from prediction and GT directories");
  eval_cmd->add_option("--pred", eval.pred_dir, "Directory with labels.tensor [+ objects.json]")
      ->required();
  eval_cmd->add_option("--gt", eval.gt_dir, "Directory with labels.tensor [+ objects.json]")
      ->required();
  eval_cmd->add_option("--gate", eval.gate, "Matching gate in meters");
  eval_cmd->add_option("--mask", eval.mask_path, "Cell mask tensor restricting segmentation IoU");
  eval_cmd->add_option("--out", eval.out_csv, "Metrics CSV (stdout when omitted)");
  eval_cmd->add_option("--json", eval.out_json, "Also write metrics JSON");

  GradArgs grad;
  auto* grad_cmd =
      app.add_subcommand("loss-grad-check", "Finite-difference check of every loss gradient");
  grad_cmd->add_option("--seed", grad.seed)->required();
  grad_cmd->add_option("--instances", grad.instances);

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Splat kernel micro-benchmark");
  bench_cmd->add_option("--cameras", bench.cameras);
  bench_cmd->add_option("--repeat", bench.repeat);
  bench_cmd->add_option("--channels", bench.channels);
  bench_cmd->add_option("--width", bench.width);
  bench_cmd->add_option("--height", bench.height);
  bench_cmd->add_option("--out", bench.out_csv, "CSV path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (gen_cmd->parsed()) return run_gen_scene(gen);
    if (render_cmd->parsed()) return run_render(render);
    if (pipe_cmd->parsed()) return run_pipeline_cmd(pipe);
    if (ipm_cmd->parsed()) return run_ipm(ipm);
    if (eval_cmd->parsed()) return run_eval(eval);
    if (grad_cmd->parsed()) return run_grad_check(grad);
    if (bench_cmd->parsed()) return run_bench(bench);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
