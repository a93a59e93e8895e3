// Benchmark comparing the serial reference implementations against the
// OpenMP kernels: evaluation, k-means, lifting, compositing.

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <omp.h>

#include "poselift/augment.hpp"
#include "poselift/clustering.hpp"
#include "poselift/geometry.hpp"
#include "poselift/metrics.hpp"
#include "poselift/skeleton.hpp"

using namespace poselift;

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

Pose3D random_pose(std::mt19937_64& rng, double spread) {
  Eigen::Matrix3Xd joints(3, 17);
  for (int j = 0; j < 17; ++j)
    for (int axis = 0; axis < 3; ++axis) joints(axis, j) = uniform(rng, -spread, spread);
  joints.colwise() -= Eigen::Vector3d(joints.col(14));
  return make_pose3d(joints, PoseFrame::RootRelative, "h36m17");
}

template <typename F>
double time_ms(F&& body) {
  const auto start = std::chrono::steady_clock::now();
  body();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

void row(const std::string& name, double serial_ms, double parallel_ms, int threads) {
  std::printf("%-28s %10.1f ms %10.1f ms   x%.2f (%d threads)\n", name.c_str(), serial_ms,
              parallel_ms, serial_ms / parallel_ms, threads);
}

KinematicTree make_tree() {
  SkeletonDef def;
  def.name = "h36m17";
  const char* names[] = {"head_top", "neck", "rsh", "rel", "rwr", "lsh", "lel", "lwr", "rhip",
                         "rkn", "ran", "lhip", "lkn", "lan", "pelvis", "spine", "head"};
  const int parents[] = {16, 15, 1, 2, 3, 1, 5, 6, 14, 8, 9, 14, 11, 12, 14, 14, 1};
  for (int i = 0; i < 17; ++i) def.joints.push_back({names[i], parents[i]});
  def.root_index = 14;
  for (int i = 0; i < 14; ++i) def.eval_subset.push_back(i);
  return build_skeleton(def);
}

}  // namespace

int main(int argc, char** argv) {
  const int threads = argc > 1 ? std::atoi(argv[1]) : omp_get_max_threads();
  std::printf("serial reference vs OpenMP kernels (%d threads)\n\n", threads);
  std::printf("%-28s %13s %13s\n", "kernel", "serial", "parallel");

  const KinematicTree tree = make_tree();
  std::mt19937_64 rng(1);

  {  // evaluation: 50k frames, alignment enabled
    std::vector<FrameSample> frames(50000);
    for (auto& sample : frames) {
      sample.gt = random_pose(rng, 500);
      sample.pred = sample.gt;
      for (int j = 0; j < 17; ++j)
        for (int axis = 0; axis < 3; ++axis)
          sample.pred.joints(axis, j) += uniform(rng, -60, 60);
    }
    EvalConfig config;
    config.align = AlignMode::RST;
    EvalReport a, b;
    const double serial = time_ms([&] { a = evaluate_reference(frames, tree, config); });
    const double parallel = time_ms([&] { b = evaluate(frames, tree, config, threads); });
    row("evaluate 50k frames (RST)", serial, parallel, threads);
    if (a.total.mpjpe != b.total.mpjpe) std::printf("  !! mismatch\n");
  }

  {  // k-means: 20k poses, k=20
    std::vector<Pose3D> poses;
    poses.reserve(20000);
    for (int i = 0; i < 20000; ++i) poses.push_back(random_pose(rng, 600));
    KMeansOptions options;
    options.seed = 9;
    options.max_iters = 20;
    PoseClusters a, b;
    const double serial = time_ms([&] { a = kmeans_poses_reference(poses, 20, options); });
    const double parallel = time_ms([&] { b = kmeans_poses(poses, 20, options, threads); });
    row("kmeans 20k poses, k=20", serial, parallel, threads);
    if (a.assignments != b.assignments) std::printf("  !! mismatch\n");
  }

  {  // lifting: 200k frames
    const CameraIntrinsics cam = make_intrinsics(1000, 0, 0, 2048, 2048);
    std::vector<Pose3D> poses;
    std::vector<Pose2D> keypoints;
    for (int i = 0; i < 200000; ++i) {
      const Pose3D pose = random_pose(rng, 500);
      const Eigen::Vector3d t(uniform(rng, -500, 500), uniform(rng, -500, 500),
                              uniform(rng, 2500, 7000));
      keypoints.push_back(weak_perspective_project(pose, t, cam));
      poses.push_back(pose);
    }
    BatchLiftResult a, b;
    const double serial =
        time_ms([&] { a = lift_batch_reference(poses, keypoints, cam, LiftOptions{}); });
    const double parallel =
        time_ms([&] { b = lift_batch(poses, keypoints, cam, LiftOptions{}, threads); });
    row("lift 200k frames", serial, parallel, threads);
  }

  {  // compositing: 1920x1080 frame, 20 repetitions
    const int w = 1920, h = 1080;
    Image frame = make_image(w, h, 3);
    for (auto& value : frame.data) value = static_cast<std::uint8_t>(rng() % 256);
    Image bg_mask = make_image(w, h, 1);
    Image upper = make_image(w, h, 1);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (y < h / 3) bg_mask.at(x, y, 0) = 255;
        else if (x > w / 3 && x < 2 * w / 3) upper.at(x, y, 0) = 230;
      }
    const MaskSet masks =
        make_mask_set(bg_mask, make_image(w, h, 1), upper, make_image(w, h, 1), w, h);
    Image bg = make_image(w, h, 3);
    for (auto& value : bg.data) value = static_cast<std::uint8_t>(rng() % 256);
    Image tex = make_image(64, 64, 3);
    for (auto& value : tex.data) value = static_cast<std::uint8_t>(rng() % 256);
    const AugmentAssets assets{bg, tex, tex, tex};
    CompositeOptions options;
    options.seed = 4;
    Image a, b;
    const double serial = time_ms([&] {
      for (int i = 0; i < 20; ++i) a = composite_reference(frame, masks, assets, options);
    });
    const double parallel = time_ms([&] {
      for (int i = 0; i < 20; ++i) b = composite(frame, masks, assets, options, threads);
    });
    row("composite 1080p x20", serial, parallel, threads);
    if (a.data != b.data) std::printf("  !! mismatch\n");
  }

  return 0;
}
