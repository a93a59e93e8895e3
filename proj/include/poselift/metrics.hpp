#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "poselift/pose.hpp"
#include "poselift/skeleton.hpp"

namespace poselift {

enum class AlignMode { None, T, ST, RST };

struct FrameLabels {
  std::string activity;
  std::string scene;    // GS / noGS / outdoor
  std::string subject;
  long frame_index = 0;
};

/// Per-frame evaluation record: joint errors over the eval subset, in mm.
struct FrameEval {
  Eigen::VectorXd per_joint_error;
  FrameLabels labels;
};

/// PCK as a function of threshold; values are nondecreasing.
struct PckCurve {
  std::vector<double> thresholds;
  std::vector<double> values;
};

struct EvalConfig {
  double pck_threshold = 150.0;
  double auc_min = 0.0;
  double auc_max = 150.0;
  double auc_step = 5.0;
  long stride = 1;
  AlignMode align = AlignMode::None;
};

struct EvalBucket {
  std::string type;  // total | joint_group | activity | scene
  std::string name;
  long frames = 0;
  long joints = 0;
  double mpjpe = 0;
  double pck = 0;  // at the configured threshold
  double auc = 0;
};

struct EvalReport {
  EvalBucket total;
  std::vector<EvalBucket> joint_groups;
  std::vector<EvalBucket> activities;
  std::vector<EvalBucket> scenes;
  PckCurve total_curve;
  long stride = 1;
  EvalConfig config;
};

/// Mean Euclidean joint distance over the subset, mm. Both poses must share
/// the skeleton and frame type.
double mpjpe(const Pose3D& pred, const Pose3D& gt, std::span<const int> subset);

/// Fraction of subset joints with error strictly below the threshold.
double pck3d(const Pose3D& pred, const Pose3D& gt, std::span<const int> subset, double threshold);

/// PCK sampled at t_min, t_min+step, ..., t_max.
PckCurve pck_curve(const Pose3D& pred, const Pose3D& gt, std::span<const int> subset,
                   double t_min, double t_max, double step);

/// Mean of the sampled curve values (rectangle rule), in [0, 1].
double auc(const PckCurve& curve);

/// Least-squares alignment of pred onto gt. T matches centroids, ST adds a
/// uniform scale, RST is the full similarity (orthogonal Procrustes with
/// det+1 sign correction and least-squares optimal scale). When `subset` is
/// nonempty the transform is fitted on those joints and applied to all.
Pose3D align(const Pose3D& pred, const Pose3D& gt, AlignMode mode,
             std::span<const int> subset = {});

struct FrameSample {
  Pose3D pred;
  Pose3D gt;
  FrameLabels labels;
};

/// Per-joint errors for one sample under the configured alignment.
FrameEval evaluate_frame(const FrameSample& sample, const KinematicTree& tree,
                         const EvalConfig& config);

/// Stride-samples the stream (positions 0, stride, 2*stride, ...), computes
/// per-frame errors in an OpenMP-parallel loop, then merges bucket
/// accumulators in stream order. evaluate_reference is the plain serial
/// implementation kept for testing.
EvalReport evaluate(std::span<const FrameSample> frames, const KinematicTree& tree,
                    const EvalConfig& config, int threads);
EvalReport evaluate_reference(std::span<const FrameSample> frames, const KinematicTree& tree,
                              const EvalConfig& config);

/// Aggregates already-computed frame evals; shared by both implementations.
EvalReport aggregate_frame_evals(std::span<const FrameEval> evals, const KinematicTree& tree,
                                 const EvalConfig& config);

}  // namespace poselift
