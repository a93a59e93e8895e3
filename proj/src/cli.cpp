#include "poselift/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "poselift/archive.hpp"
#include "poselift/augment.hpp"
#include "poselift/clustering.hpp"
#include "poselift/error.hpp"
#include "poselift/geometry.hpp"
#include "poselift/metrics.hpp"
#include "poselift/report_io.hpp"
#include "poselift/representations.hpp"
#include "poselift/retarget.hpp"
#include "poselift/skeleton.hpp"

namespace poselift {

namespace {

namespace fs = std::filesystem;

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("POSELIFT_LOG");
  if (!env) return LogLevel::Info;
  const std::string value(env);
  if (value == "quiet") return LogLevel::Quiet;
  if (value == "debug") return LogLevel::Debug;
  return LogLevel::Info;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::Info) std::cout << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::Debug) std::cerr << "[debug] " << msg << "\n";
}

CameraIntrinsics load_camera(const std::string& calib_path, const std::string& camera_id) {
  const auto cameras = load_calibration(calib_path);
  if (camera_id.empty() && cameras.size() == 1) return cameras.begin()->second;
  auto it = cameras.find(camera_id);
  if (it == cameras.end())
    fail(ErrorKind::InvalidArgument, "camera '" + camera_id + "' not found in " + calib_path);
  return it->second;
}

struct AucRange {
  double min = 0, max = 150, step = 5;
};

AucRange parse_auc_range(const std::string& text) {
  AucRange range;
  if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &range.min, &range.max, &range.step) != 3)
    fail(ErrorKind::InvalidArgument, "expected --auc-range min:max:step, got '" + text + "'");
  return range;
}

AlignMode parse_align(const std::string& text) {
  if (text == "none") return AlignMode::None;
  if (text == "T") return AlignMode::T;
  if (text == "ST") return AlignMode::ST;
  if (text == "RST") return AlignMode::RST;
  fail(ErrorKind::InvalidArgument, "unknown alignment mode '" + text + "'");
}

// per-frame seed derived from the run seed; splitmix64 step
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct ProjectArgs {
  std::string pose3d, calib, camera, out;
};

int cmd_project(const ProjectArgs& args) {
  const PoseArchive input = read_pose_archive(args.pose3d);
  if (input.kind != ArchiveKind::Global3D)
    fail(ErrorKind::InvalidArgument, "project expects a camera-global 3D archive");
  const CameraIntrinsics cam = load_camera(args.calib, args.camera);

  PoseArchive output;
  output.skeleton = input.skeleton;
  output.kind = ArchiveKind::Points2D;
  output.camera = args.camera;
  long failures = 0;
  for (const auto& record : input.records) {
    try {
      const Pose3D pose = make_pose3d(record.values, PoseFrame::CameraGlobal, input.skeleton);
      const Pose2D projected = pinhole_project(pose, cam);
      PoseArchive::Record out_record;
      out_record.frame = record.frame;
      out_record.values = projected.points;
      output.records.push_back(std::move(out_record));
    } catch (const Error& e) {
      ++failures;
      log_debug("frame " + std::to_string(record.frame) + " skipped: " + e.what());
    }
  }
  if (output.records.empty()) {
    std::cerr << "project: all " << input.records.size() << " frames failed\n";
    return 2;
  }
  write_pose_archive(output, args.out);
  log_info("projected " + std::to_string(output.records.size()) + " frames, " +
           std::to_string(failures) + " failures -> " + args.out);
  return 0;
}

struct LiftArgs {
  std::string pose3d, pose2d, calib, camera, crops, out;
  std::string depth_mode = "exact";
  std::string correction = "centroid";
  int threads = 0;
};

int cmd_lift(const LiftArgs& args) {
  const PoseArchive poses_in = read_pose_archive(args.pose3d);
  const PoseArchive keypoints_in = read_pose_archive(args.pose2d);
  if (poses_in.kind != ArchiveKind::RootRelative3D)
    fail(ErrorKind::InvalidArgument, "lift expects a root-relative 3D archive");
  if (keypoints_in.kind != ArchiveKind::Points2D)
    fail(ErrorKind::InvalidArgument, "lift expects a 2D keypoint archive");
  if (poses_in.records.size() != keypoints_in.records.size())
    fail(ErrorKind::ShapeMismatch, "3D and 2D archives differ in frame count");
  if (poses_in.records.empty()) fail(ErrorKind::InvalidArgument, "empty archive");
  const CameraIntrinsics cam = load_camera(args.calib, args.camera);

  LiftOptions options;
  if (args.depth_mode == "exact") options.depth_mode = DepthMode::Exact;
  else if (args.depth_mode == "approx") options.depth_mode = DepthMode::Approx;
  else fail(ErrorKind::InvalidArgument, "unknown depth mode '" + args.depth_mode + "'");
  if (args.correction == "centroid") options.correction = CorrectionSource::Centroid;
  else if (args.correction == "crop") options.correction = CorrectionSource::Crop;
  else if (args.correction == "off") options.correction = CorrectionSource::Off;
  else fail(ErrorKind::InvalidArgument, "unknown correction source '" + args.correction + "'");

  std::map<long, CropBox> crops;
  if (options.correction == CorrectionSource::Crop) {
    if (args.crops.empty()) fail(ErrorKind::InvalidArgument, "--correction crop needs --crops");
    crops = read_crops(args.crops, cam);
  }

  PoseArchive output;
  output.skeleton = poses_in.skeleton;
  output.kind = ArchiveKind::Global3D;
  output.camera = args.camera;
  long failures = 0;

  if (options.correction == CorrectionSource::Crop) {
    for (size_t i = 0; i < poses_in.records.size(); ++i) {
      const auto& record = poses_in.records[i];
      try {
        auto crop_it = crops.find(record.frame);
        if (crop_it == crops.end())
          fail(ErrorKind::InvalidArgument, "no crop box for frame " + std::to_string(record.frame));
        const Pose3D pose = make_pose3d(record.values, PoseFrame::RootRelative, poses_in.skeleton);
        const Pose2D k2d =
            make_pose2d(keypoints_in.records[i].values, keypoints_in.skeleton);
        const LiftResult lifted = lift_frame(pose, k2d, cam, options, &crop_it->second);
        PoseArchive::Record out_record;
        out_record.frame = record.frame;
        out_record.values = lifted.global.joints;
        output.records.push_back(std::move(out_record));
      } catch (const Error& e) {
        ++failures;
        log_debug("frame " + std::to_string(record.frame) + " skipped: " + e.what());
      }
    }
  } else {
    const std::vector<Pose3D> poses = to_poses(poses_in);
    const std::vector<Pose2D> keypoints = to_keypoints(keypoints_in);
    const BatchLiftResult batch = lift_batch(poses, keypoints, cam, options, args.threads);
    for (size_t i = 0; i < batch.frames.size(); ++i) {
      if (!batch.frames[i]) {
        ++failures;
        continue;
      }
      PoseArchive::Record out_record;
      out_record.frame = poses_in.records[i].frame;
      out_record.values = batch.frames[i]->global.joints;
      output.records.push_back(std::move(out_record));
    }
    for (const auto& message : batch.failures) log_debug(message);
  }

  if (output.records.empty()) {
    std::cerr << "lift: all " << poses_in.records.size() << " frames failed\n";
    return 2;
  }
  write_pose_archive(output, args.out);
  log_info("lifted " + std::to_string(output.records.size()) + " frames, " +
           std::to_string(failures) + " failures -> " + args.out);
  return 0;
}

struct EvaluateArgs {
  std::string pred, gt, skeleton, clusters, out;
  double threshold = 150.0;
  std::string auc_range = "0:150:5";
  long stride = 1;
  std::string align = "none";
  int threads = 0;
};

int cmd_evaluate(const EvaluateArgs& args) {
  const SkeletonDef def = load_skeleton(args.skeleton);
  const KinematicTree tree = build_skeleton(def);
  const PoseArchive pred = read_pose_archive(args.pred);
  const PoseArchive gt = read_pose_archive(args.gt);
  if (pred.records.size() != gt.records.size())
    fail(ErrorKind::ShapeMismatch, "prediction and ground-truth archives differ in frame count");
  if (pred.kind != gt.kind)
    fail(ErrorKind::FrameMismatch, "archives must share the same frame kind");
  if (pred.kind != ArchiveKind::RootRelative3D && pred.kind != ArchiveKind::Global3D)
    fail(ErrorKind::InvalidArgument, "evaluate expects 3D pose archives");
  const auto frame_of = [&](ArchiveKind kind) {
    return kind == ArchiveKind::Global3D ? PoseFrame::CameraGlobal : PoseFrame::RootRelative;
  };

  std::optional<PoseClusters> clusters;
  if (!args.clusters.empty()) {
    clusters = load_clusters(args.clusters);
    if (clusters->assignments.size() != gt.records.size())
      fail(ErrorKind::ShapeMismatch, "cluster assignments do not cover the archive");
    if (clusters->class_map.empty())
      fail(ErrorKind::IncompleteMap, "cluster file has no class map; run assign-classes first");
  }

  std::vector<FrameSample> samples;
  samples.reserve(pred.records.size());
  for (size_t i = 0; i < pred.records.size(); ++i) {
    const auto& rp = pred.records[i];
    const auto& rg = gt.records[i];
    if (rp.frame != rg.frame)
      fail(ErrorKind::ShapeMismatch, "frame index mismatch at position " + std::to_string(i));
    if (pred.has_labels && gt.has_labels &&
        (rp.activity != rg.activity || rp.scene != rg.scene || rp.subject != rg.subject))
      fail(ErrorKind::LabelMismatch, "labels disagree at frame " + std::to_string(rp.frame));
    FrameSample sample;
    sample.pred = make_pose3d(rp.values, frame_of(pred.kind), pred.skeleton);
    sample.gt = make_pose3d(rg.values, frame_of(gt.kind), gt.skeleton);
    const auto& labeled = gt.has_labels ? rg : rp;
    sample.labels.activity = labeled.activity;
    sample.labels.scene = labeled.scene;
    sample.labels.subject = labeled.subject;
    sample.labels.frame_index = rg.frame;
    if (clusters) {
      auto it = clusters->class_map.find(clusters->assignments[i]);
      if (it == clusters->class_map.end())
        fail(ErrorKind::IncompleteMap,
             "no class for cluster " + std::to_string(clusters->assignments[i]));
      sample.labels.activity = it->second;
    }
    samples.push_back(std::move(sample));
  }

  EvalConfig config;
  config.pck_threshold = args.threshold;
  const AucRange range = parse_auc_range(args.auc_range);
  config.auc_min = range.min;
  config.auc_max = range.max;
  config.auc_step = range.step;
  config.stride = args.stride;
  config.align = parse_align(args.align);

  const EvalReport report = evaluate(samples, tree, config, args.threads);
  write_report_json(report, args.out + ".json");
  write_report_csv(report, args.out + ".csv");
  log_info("evaluated " + std::to_string(report.total.frames) + " frames: MPJPE " +
           format_double(report.total.mpjpe) + " mm, PCK " + format_double(report.total.pck) +
           ", AUC " + format_double(report.total.auc) + " -> " + args.out + ".{json,csv}");
  return 0;
}

struct ClusterArgs {
  std::string poses, class_map, out;
  int k = 20;
  std::uint64_t seed = 0;
  int max_iters = 300;
  double tol = 1e-4;
  int threads = 0;
};

int cmd_cluster(const ClusterArgs& args) {
  const PoseArchive archive = read_pose_archive(args.poses);
  const std::vector<Pose3D> poses = to_poses(archive);
  KMeansOptions options;
  options.seed = args.seed;
  options.max_iters = args.max_iters;
  options.tol = args.tol;
  PoseClusters clusters = kmeans_poses(poses, args.k, options, args.threads);
  if (!args.class_map.empty()) {
    std::ifstream in(args.class_map);
    if (!in) fail(ErrorKind::IoError, "cannot open class map " + args.class_map);
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::ParseError, args.class_map + ": " + e.what());
    }
    std::map<int, std::string> class_map;
    for (const auto& [key, value] : doc.items())
      class_map[std::stoi(key)] = value.get<std::string>();
    clusters = assign_classes(std::move(clusters), class_map);
  }
  save_clusters(clusters, args.out);
  log_info("clustered " + std::to_string(poses.size()) + " poses into " + std::to_string(args.k) +
           " clusters, inertia " + format_double(clusters.inertia) + " -> " + args.out);
  return 0;
}

struct RetargetArgs {
  std::string src, tgt, map, out;
  double ridge = 0.0;
  bool affine = false;
};

int cmd_retarget(const RetargetArgs& args) {
  if (!args.tgt.empty()) {  // fit
    const std::vector<Pose3D> src = to_poses(read_pose_archive(args.src));
    const std::vector<Pose3D> tgt = to_poses(read_pose_archive(args.tgt));
    const RetargetMap map = fit_retarget_map(src, tgt, args.ridge, args.affine);
    save_retarget_map(map, args.out);
    log_info("fitted " + std::to_string(map.target_joints()) + "x" +
             std::to_string(map.matrix.cols()) + " retarget map from " +
             std::to_string(src.size()) + " frames -> " + args.out);
    return 0;
  }
  if (args.map.empty()) fail(ErrorKind::InvalidArgument, "retarget needs --tgt (fit) or --map (apply)");
  const RetargetMap map = load_retarget_map(args.map);
  const PoseArchive input = read_pose_archive(args.src);
  if (input.kind != ArchiveKind::RootRelative3D && input.kind != ArchiveKind::Global3D)
    fail(ErrorKind::InvalidArgument, "retarget expects a 3D pose archive");
  PoseArchive output = input;
  output.skeleton = map.target;
  for (auto& record : output.records) {
    Pose3D pose;
    pose.joints = record.values;
    pose.frame = input.kind == ArchiveKind::Global3D ? PoseFrame::CameraGlobal
                                                     : PoseFrame::RootRelative;
    pose.skeleton = input.skeleton;
    record.values = apply_retarget_map(map, pose).joints;
  }
  write_pose_archive(output, args.out);
  log_info("retargeted " + std::to_string(output.records.size()) + " frames -> " + args.out);
  return 0;
}

struct AugmentArgs {
  std::string manifest, out_dir;
  std::string proportions = "0.25,0.40,0.35";
  std::uint64_t seed = 0;
  double gain = 1.0;
  int threads = 0;
};

int cmd_augment(const AugmentArgs& args) {
  std::ifstream in(args.manifest);
  if (!in) fail(ErrorKind::IoError, "cannot open manifest " + args.manifest);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, args.manifest + ": " + e.what());
  }
  const fs::path base = fs::path(args.manifest).parent_path();
  const auto resolve = [&](const std::string& p) { return (base / p).string(); };

  TierProportions proportions;
  if (std::sscanf(args.proportions.c_str(), "%lf,%lf,%lf", &proportions.none,
                  &proportions.bg_chair, &proportions.full) != 3)
    fail(ErrorKind::InvalidArgument, "expected --proportions none,bg_chair,full");

  AugmentAssets assets;
  try {
    const auto& asset_doc = doc.at("assets");
    assets.background = load_png(resolve(asset_doc.at("background").get<std::string>()));
    assets.chair_texture = load_png(resolve(asset_doc.at("chair").get<std::string>()));
    assets.upper_body_texture = load_png(resolve(asset_doc.at("upper_body").get<std::string>()));
    assets.lower_body_texture = load_png(resolve(asset_doc.at("lower_body").get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, args.manifest + ": assets: " + e.what());
  }

  const auto& frames = doc.at("frames");
  std::vector<std::string> ids;
  for (const auto& frame : frames) ids.push_back(frame.at("id").get<std::string>());
  const AugmentPlan plan = plan_augmentation(ids, proportions, args.seed);

  fs::create_directories(args.out_dir);
  save_plan(plan, ids, (fs::path(args.out_dir) / "plan.json").string());

  long counts[3] = {0, 0, 0};
  for (size_t i = 0; i < frames.size(); ++i) {
    const auto& frame_doc = frames[i];
    const std::string image_path = resolve(frame_doc.at("image").get<std::string>());
    const std::string out_name =
        frame_doc.contains("out") ? frame_doc.at("out").get<std::string>() : ids[i] + ".png";
    const fs::path out_path = fs::path(args.out_dir) / out_name;
    const AugmentTier tier = plan.tiers[i];
    ++counts[static_cast<int>(tier)];

    if (tier == AugmentTier::None) {
      fs::copy_file(image_path, out_path, fs::copy_options::overwrite_existing);
      continue;
    }
    const Image frame = load_png(image_path);
    const auto& mask_doc = frame_doc.at("masks");
    const MaskSet masks = make_mask_set(
        load_png(resolve(mask_doc.at("background").get<std::string>())),
        load_png(resolve(mask_doc.at("chair").get<std::string>())),
        load_png(resolve(mask_doc.at("upper_body").get<std::string>())),
        load_png(resolve(mask_doc.at("lower_body").get<std::string>())), frame.width,
        frame.height);
    CompositeOptions options;
    options.seed = mix_seed(args.seed, i);
    options.shading_gain = args.gain;
    if (tier == AugmentTier::BgChair) {
      options.upper_body = false;
      options.lower_body = false;
    }
    const Image result = composite(frame, masks, assets, options, args.threads);
    save_png(result, out_path.string());
  }
  log_info("augmented " + std::to_string(frames.size()) + " frames (none " +
           std::to_string(counts[0]) + ", bg+chair " + std::to_string(counts[1]) + ", full " +
           std::to_string(counts[2]) + ") -> " + args.out_dir);
  return 0;
}

struct FuseArgs {
  std::string pose, o1, o2, weights, gt, weights_out, out;
  bool fit = false;
  double ridge = 0.0;
  std::string skeleton;
};

int cmd_fuse(const FuseArgs& args) {
  const SkeletonDef def = load_skeleton(args.skeleton);
  const KinematicTree tree = build_skeleton(def);
  const PoseArchive pose_in = read_pose_archive(args.pose);
  const PoseArchive o1_in = read_pose_archive(args.o1);
  const PoseArchive o2_in = read_pose_archive(args.o2);
  if (pose_in.kind != ArchiveKind::RootRelative3D)
    fail(ErrorKind::InvalidArgument, "fuse expects a root-relative pose archive");
  const std::vector<Pose3D> poses = to_poses(pose_in);
  const std::vector<RelPose> o1 = to_relposes(o1_in);
  const std::vector<RelPose> o2 = to_relposes(o2_in);
  if (poses.size() != o1.size() || poses.size() != o2.size())
    fail(ErrorKind::ShapeMismatch, "pose and relative archives differ in frame count");

  FusionWeights weights = uniform_fusion_weights(tree.joint_count());
  if (args.fit) {
    if (args.gt.empty()) fail(ErrorKind::InvalidArgument, "--fit needs --gt");
    const std::vector<Pose3D> gts = to_poses(read_pose_archive(args.gt));
    if (gts.size() != poses.size())
      fail(ErrorKind::ShapeMismatch, "ground-truth archive differs in frame count");
    std::vector<FusionSample> samples;
    for (size_t i = 0; i < poses.size(); ++i)
      samples.push_back(FusionSample{poses[i], o1[i], o2[i], gts[i]});
    weights = fit_fusion_weights(samples, tree, args.ridge);
    if (!args.weights_out.empty()) save_fusion_weights(weights, def.name, args.weights_out);
  } else if (!args.weights.empty()) {
    weights = load_fusion_weights(args.weights);
  }

  PoseArchive output = pose_in;
  for (size_t i = 0; i < poses.size(); ++i)
    output.records[i].values = fuse(poses[i], o1[i], o2[i], weights, tree).joints;
  write_pose_archive(output, args.out);
  log_info("fused " + std::to_string(poses.size()) + " frames -> " + args.out);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"poselift: kinematic pose representations, closed-form 3D localization, "
               "evaluation metrics, clustering, retargeting and chroma-key augmentation",
               "poselift"};
  app.require_subcommand(1);

  ProjectArgs project_args;
  auto* project = app.add_subcommand("project", "Pinhole-project a global 3D archive to 2D");
  project->add_option("--pose3d", project_args.pose3d, "camera-global 3D archive")->required();
  project->add_option("--calib", project_args.calib, "calibration JSON")->required();
  project->add_option("--camera", project_args.camera, "camera id");
  project->add_option("--out", project_args.out, "output 2D archive")->required();

  LiftArgs lift_args;
  auto* lift = app.add_subcommand("lift", "Recover global 3D poses from root-relative 3D + 2D");
  lift->add_option("--pose3d", lift_args.pose3d, "root-relative 3D archive")->required();
  lift->add_option("--pose2d", lift_args.pose2d, "2D keypoint archive")->required();
  lift->add_option("--calib", lift_args.calib, "calibration JSON")->required();
  lift->add_option("--camera", lift_args.camera, "camera id");
  lift->add_option("--depth-mode", lift_args.depth_mode, "exact | approx (default exact)");
  lift->add_option("--correction", lift_args.correction, "centroid | crop | off (default centroid)");
  lift->add_option("--crops", lift_args.crops, "crop CSV (frame,cx,cy,w,h) for --correction crop");
  lift->add_option("--threads", lift_args.threads, "worker threads (0 = all cores)");
  lift->add_option("--out", lift_args.out, "output global 3D archive")->required();

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "MPJPE / 3DPCK / AUC report");
  evaluate->add_option("--pred", eval_args.pred, "predicted pose archive")->required();
  evaluate->add_option("--gt", eval_args.gt, "ground-truth pose archive")->required();
  evaluate->add_option("--skeleton", eval_args.skeleton, "skeleton config JSON")->required();
  evaluate->add_option("--threshold", eval_args.threshold, "PCK threshold, mm (default 150)");
  evaluate->add_option("--auc-range", eval_args.auc_range, "AUC thresholds min:max:step (default 0:150:5)");
  evaluate->add_option("--stride", eval_args.stride, "evaluate every Nth frame (default 1)");
  evaluate->add_option("--align", eval_args.align, "none | T | ST | RST (default none)");
  evaluate->add_option("--clusters", eval_args.clusters, "cluster file supplying activity classes");
  evaluate->add_option("--threads", eval_args.threads, "worker threads (0 = all cores)");
  evaluate->add_option("--out", eval_args.out, "output prefix (.json and .csv)")->required();

  ClusterArgs cluster_args;
  auto* cluster = app.add_subcommand("cluster", "K-means pose clustering");
  cluster->add_option("--poses", cluster_args.poses, "root-relative pose archive")->required();
  cluster->add_option("--k", cluster_args.k, "cluster count (default 20)");
  cluster->add_option("--seed", cluster_args.seed, "RNG seed");
  cluster->add_option("--max-iters", cluster_args.max_iters, "Lloyd iteration cap (default 300)");
  cluster->add_option("--tol", cluster_args.tol, "centroid shift tolerance, mm (default 1e-4)");
  cluster->add_option("--class-map", cluster_args.class_map, "JSON cluster->class map to attach");
  cluster->add_option("--threads", cluster_args.threads, "worker threads (0 = all cores)");
  cluster->add_option("--out", cluster_args.out, "output cluster file")->required();

  RetargetArgs retarget_args;
  auto* retarget = app.add_subcommand("retarget", "Fit or apply a linear joint map");
  retarget->add_option("--src", retarget_args.src, "source pose archive")->required();
  retarget->add_option("--tgt", retarget_args.tgt, "target pose archive (fit mode)");
  retarget->add_option("--map", retarget_args.map, "retarget map JSON (apply mode)");
  retarget->add_option("--ridge", retarget_args.ridge, "ridge strength (default 0)");
  retarget->add_flag("--affine", retarget_args.affine, "include a constant bias column");
  retarget->add_option("--out", retarget_args.out, "output map or archive")->required();

  AugmentArgs augment_args;
  auto* augment = app.add_subcommand("augment", "Chroma-key appearance augmentation");
  augment->add_option("--manifest", augment_args.manifest, "frame/mask/asset manifest JSON")->required();
  augment->add_option("--proportions", augment_args.proportions,
                      "tier proportions none,bg_chair,full (default 0.25,0.40,0.35)");
  augment->add_option("--seed", augment_args.seed, "RNG seed");
  augment->add_option("--gain", augment_args.gain, "shading gain (default 1)");
  augment->add_option("--threads", augment_args.threads, "worker threads (0 = all cores)");
  augment->add_option("--out-dir", augment_args.out_dir, "output directory")->required();

  FuseArgs fuse_args;
  auto* fuse = app.add_subcommand("fuse", "Affine per-joint fusion of P / O1 / O2 estimates");
  fuse->add_option("--pose", fuse_args.pose, "root-relative pose archive (P)")->required();
  fuse->add_option("--o1", fuse_args.o1, "order-1 relative archive")->required();
  fuse->add_option("--o2", fuse_args.o2, "order-2 relative archive")->required();
  fuse->add_option("--skeleton", fuse_args.skeleton, "skeleton config JSON")->required();
  fuse->add_option("--weights", fuse_args.weights, "fusion weights JSON");
  fuse->add_flag("--fit", fuse_args.fit, "fit weights against --gt before fusing");
  fuse->add_option("--gt", fuse_args.gt, "ground-truth archive for --fit");
  fuse->add_option("--ridge", fuse_args.ridge, "ridge strength for --fit (default 0)");
  fuse->add_option("--weights-out", fuse_args.weights_out, "write fitted weights here");
  fuse->add_option("--out", fuse_args.out, "output fused archive")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (project->parsed()) return cmd_project(project_args);
    if (lift->parsed()) return cmd_lift(lift_args);
    if (evaluate->parsed()) return cmd_evaluate(eval_args);
    if (cluster->parsed()) return cmd_cluster(cluster_args);
    if (retarget->parsed()) return cmd_retarget(retarget_args);
    if (augment->parsed()) return cmd_augment(augment_args);
    if (fuse->parsed()) return cmd_fuse(fuse_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace poselift
