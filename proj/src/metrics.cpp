#include "poselift/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <omp.h>

#include "poselift/error.hpp"
#include "poselift/parallel.hpp"

namespace poselift {

namespace {

std::vector<int> all_joints(int n) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

void require_comparable(const Pose3D& pred, const Pose3D& gt) {
  require_same_skeleton(pred, gt);
  if (pred.frame != gt.frame)
    fail(ErrorKind::FrameMismatch, "poses must both be root-relative or both global");
}

Eigen::VectorXd joint_errors(const Pose3D& pred, const Pose3D& gt, std::span<const int> subset) {
  Eigen::VectorXd errors(subset.size());
  for (size_t i = 0; i < subset.size(); ++i) {
    const int j = subset[i];
    if (j < 0 || j >= pred.joint_count())
      fail(ErrorKind::IndexOutOfRange, "subset joint " + std::to_string(j));
    errors[static_cast<Eigen::Index>(i)] = (pred.joints.col(j) - gt.joints.col(j)).norm();
  }
  return errors;
}

struct Similarity {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return scale * (rotation * p) + translation;
  }
};

// second singular value of a point set from its 3x3 scatter matrix
double second_singular_value(const Eigen::Matrix3d& scatter) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eigen(scatter);
  return std::sqrt(std::max(eigen.eigenvalues()(1), 0.0));
}

// fits the transform on the subset joints (all joints when empty) using only
// fixed-size temporaries; the hot evaluation loop calls this per frame
Similarity fit_similarity(const Eigen::Matrix3Xd& pred, const Eigen::Matrix3Xd& gt,
                          std::span<const int> subset, AlignMode mode) {
  const Eigen::Index count =
      subset.empty() ? pred.cols() : static_cast<Eigen::Index>(subset.size());
  const auto joint = [&](Eigen::Index i) {
    return subset.empty() ? static_cast<int>(i) : subset[static_cast<size_t>(i)];
  };

  Similarity out;
  Eigen::Vector3d pred_mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d gt_mean = Eigen::Vector3d::Zero();
  for (Eigen::Index i = 0; i < count; ++i) {
    pred_mean += pred.col(joint(i));
    gt_mean += gt.col(joint(i));
  }
  pred_mean /= static_cast<double>(count);
  gt_mean /= static_cast<double>(count);
  if (mode == AlignMode::T) {
    out.translation = gt_mean - pred_mean;
    return out;
  }

  double pred_var = 0;
  double cross = 0;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();        // sum dg * dp^T
  Eigen::Matrix3d pred_scatter = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d gt_scatter = Eigen::Matrix3d::Zero();
  for (Eigen::Index i = 0; i < count; ++i) {
    const Eigen::Vector3d dp = pred.col(joint(i)) - pred_mean;
    const Eigen::Vector3d dg = gt.col(joint(i)) - gt_mean;
    pred_var += dp.squaredNorm();
    cross += dp.dot(dg);
    cov.noalias() += dg * dp.transpose();
    pred_scatter.noalias() += dp * dp.transpose();
    gt_scatter.noalias() += dg * dg.transpose();
  }
  if (pred_var < 1e-12)
    fail(ErrorKind::DegenerateConfiguration, "prediction joints are coincident");

  if (mode == AlignMode::ST) {
    out.scale = cross / pred_var;
    out.translation = gt_mean - out.scale * pred_mean;
    return out;
  }

  if (count < 3) fail(ErrorKind::DegenerateConfiguration, "RST needs at least 3 joints");
  // collinear point sets leave the rotation underdetermined
  if (second_singular_value(pred_scatter) <= 1e-9 * std::max(std::sqrt(pred_var), 1.0) ||
      second_singular_value(gt_scatter) <= 1e-9 * std::max(std::sqrt(gt_scatter.trace()), 1.0))
    fail(ErrorKind::DegenerateConfiguration, "collinear or coincident joints");

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d sign_fix = Eigen::Vector3d::Ones();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) sign_fix(2) = -1.0;
  out.rotation = svd.matrixU() * sign_fix.asDiagonal() * svd.matrixV().transpose();
  out.scale = svd.singularValues().dot(sign_fix) / pred_var;
  out.translation = gt_mean - out.scale * out.rotation * pred_mean;
  return out;
}

// bucket accumulator; merged in deterministic stream order
struct Accumulator {
  long frames = 0;
  long joints = 0;
  double error_sum = 0;
  long below_threshold = 0;
  std::vector<long> below_curve;

  void add(const Eigen::VectorXd& errors, double threshold, const std::vector<double>& curve_ts) {
    if (below_curve.empty()) below_curve.assign(curve_ts.size(), 0);
    ++frames;
    joints += errors.size();
    for (Eigen::Index i = 0; i < errors.size(); ++i) {
      error_sum += errors[i];
      if (errors[i] < threshold) ++below_threshold;
      for (size_t t = 0; t < curve_ts.size(); ++t)
        if (errors[i] < curve_ts[t]) ++below_curve[t];
    }
  }

  EvalBucket finish(const std::string& type, const std::string& name) const {
    EvalBucket bucket;
    bucket.type = type;
    bucket.name = name;
    bucket.frames = frames;
    bucket.joints = joints;
    bucket.mpjpe = joints > 0 ? error_sum / static_cast<double>(joints) : 0.0;
    bucket.pck = joints > 0 ? static_cast<double>(below_threshold) / static_cast<double>(joints) : 0.0;
    double auc_sum = 0;
    for (long b : below_curve)
      auc_sum += joints > 0 ? static_cast<double>(b) / static_cast<double>(joints) : 0.0;
    bucket.auc = below_curve.empty() ? 0.0 : auc_sum / static_cast<double>(below_curve.size());
    return bucket;
  }
};

std::vector<double> curve_thresholds(const EvalConfig& config) {
  if (config.auc_min > config.auc_max || config.auc_step <= 0)
    fail(ErrorKind::BadRange, "invalid AUC threshold range");
  std::vector<double> ts;
  for (long i = 0;; ++i) {
    const double t = config.auc_min + static_cast<double>(i) * config.auc_step;
    if (t > config.auc_max + 1e-12) break;
    ts.push_back(t);
  }
  return ts;
}

}  // namespace

double mpjpe(const Pose3D& pred, const Pose3D& gt, std::span<const int> subset) {
  require_comparable(pred, gt);
  std::vector<int> fallback;
  if (subset.empty()) {
    fallback = all_joints(pred.joint_count());
    subset = fallback;
  }
  return joint_errors(pred, gt, subset).mean();
}

double pck3d(const Pose3D& pred, const Pose3D& gt, std::span<const int> subset, double threshold) {
  require_comparable(pred, gt);
  if (threshold < 0) fail(ErrorKind::BadRange, "threshold must be >= 0");
  std::vector<int> fallback;
  if (subset.empty()) {
    fallback = all_joints(pred.joint_count());
    subset = fallback;
  }
  const Eigen::VectorXd errors = joint_errors(pred, gt, subset);
  // strict inequality: an error exactly at the threshold does not count
  const long below = (errors.array() < threshold).count();
  return static_cast<double>(below) / static_cast<double>(errors.size());
}

PckCurve pck_curve(const Pose3D& pred, const Pose3D& gt, std::span<const int> subset,
                   double t_min, double t_max, double step) {
  if (t_min > t_max || step <= 0) fail(ErrorKind::BadRange, "invalid threshold range");
  PckCurve curve;
  for (long i = 0;; ++i) {
    const double t = t_min + static_cast<double>(i) * step;
    if (t > t_max + 1e-12) break;
    curve.thresholds.push_back(t);
    curve.values.push_back(pck3d(pred, gt, subset, t));
  }
  return curve;
}

double auc(const PckCurve& curve) {
  if (curve.values.empty()) fail(ErrorKind::BadRange, "empty curve");
  double sum = 0;
  for (double v : curve.values) sum += v;
  return sum / static_cast<double>(curve.values.size());
}

Pose3D align(const Pose3D& pred, const Pose3D& gt, AlignMode mode, std::span<const int> subset) {
  require_comparable(pred, gt);
  if (mode == AlignMode::None) return pred;
  const Similarity sim = fit_similarity(pred.joints, gt.joints, subset, mode);
  Pose3D out = pred;
  out.joints = (sim.scale * (sim.rotation * pred.joints)).colwise() + sim.translation;
  return out;
}

namespace {

// writes per-joint errors into preallocated storage; no heap traffic, so the
// parallel evaluation loop scales
void evaluate_frame_into(const FrameSample& sample, std::span<const int> subset,
                         AlignMode mode, FrameEval& out) {
  require_comparable(sample.pred, sample.gt);
  Similarity sim;
  if (mode != AlignMode::None)
    sim = fit_similarity(sample.pred.joints, sample.gt.joints, subset, mode);
  for (size_t i = 0; i < subset.size(); ++i) {
    const int j = subset[i];
    out.per_joint_error[static_cast<Eigen::Index>(i)] =
        (sim.apply(sample.pred.joints.col(j)) - Eigen::Vector3d(sample.gt.joints.col(j))).norm();
  }
  out.labels = sample.labels;
}

std::vector<int> eval_subset_of(const KinematicTree& tree) {
  return tree.def.eval_subset.empty() ? all_joints(tree.joint_count()) : tree.def.eval_subset;
}

}  // namespace

FrameEval evaluate_frame(const FrameSample& sample, const KinematicTree& tree,
                         const EvalConfig& config) {
  require_same_skeleton(sample.pred, tree);
  require_same_skeleton(sample.gt, tree);
  const std::vector<int> subset = eval_subset_of(tree);
  FrameEval eval;
  eval.per_joint_error.resize(static_cast<Eigen::Index>(subset.size()));
  evaluate_frame_into(sample, subset, config.align, eval);
  return eval;
}

EvalReport aggregate_frame_evals(std::span<const FrameEval> evals, const KinematicTree& tree,
                                 const EvalConfig& config) {
  if (evals.empty()) fail(ErrorKind::EmptyAfterSampling, "no frames to aggregate");
  const std::vector<double> curve_ts = curve_thresholds(config);

  std::span<const int> subset = tree.def.eval_subset;
  std::vector<int> fallback;
  if (subset.empty()) {
    fallback = all_joints(tree.joint_count());
    subset = fallback;
  }
  // map skeleton joint index -> position within the eval subset
  std::vector<int> position(tree.joint_count(), -1);
  for (size_t i = 0; i < subset.size(); ++i) position[subset[i]] = static_cast<int>(i);

  Accumulator total;
  std::map<std::string, Accumulator> by_activity;
  std::map<std::string, Accumulator> by_scene;
  std::vector<Accumulator> by_group(tree.def.symmetry_groups.size());

  for (const FrameEval& eval : evals) {
    total.add(eval.per_joint_error, config.pck_threshold, curve_ts);
    const std::string activity = eval.labels.activity.empty() ? "unlabeled" : eval.labels.activity;
    const std::string scene = eval.labels.scene.empty() ? "unlabeled" : eval.labels.scene;
    by_activity[activity].add(eval.per_joint_error, config.pck_threshold, curve_ts);
    by_scene[scene].add(eval.per_joint_error, config.pck_threshold, curve_ts);
    for (size_t g = 0; g < tree.def.symmetry_groups.size(); ++g) {
      Eigen::VectorXd group_errors(2 * tree.def.symmetry_groups[g].pairs.size());
      Eigen::Index k = 0;
      for (auto [a, b] : tree.def.symmetry_groups[g].pairs) {
        group_errors[k++] = eval.per_joint_error[position[a]];
        group_errors[k++] = eval.per_joint_error[position[b]];
      }
      by_group[g].add(group_errors, config.pck_threshold, curve_ts);
    }
  }

  EvalReport report;
  report.config = config;
  report.stride = config.stride;
  report.total = total.finish("total", "all");
  for (size_t g = 0; g < by_group.size(); ++g)
    report.joint_groups.push_back(by_group[g].finish("joint_group", tree.def.symmetry_groups[g].name));
  for (const auto& [name, acc] : by_activity)
    report.activities.push_back(acc.finish("activity", name));
  for (const auto& [name, acc] : by_scene)
    report.scenes.push_back(acc.finish("scene", name));

  report.total_curve.thresholds = curve_ts;
  for (size_t t = 0; t < curve_ts.size(); ++t)
    report.total_curve.values.push_back(static_cast<double>(total.below_curve[t]) /
                                        static_cast<double>(total.joints));
  return report;
}

namespace {

// stream positions 0, stride, 2*stride, ...
std::vector<size_t> stride_indices(size_t count, long stride) {
  if (stride <= 0) fail(ErrorKind::BadRange, "stride must be positive");
  std::vector<size_t> indices;
  for (size_t i = 0; i < count; i += static_cast<size_t>(stride)) indices.push_back(i);
  if (indices.empty()) fail(ErrorKind::EmptyAfterSampling, "stream empty after stride sampling");
  return indices;
}

}  // namespace

EvalReport evaluate_reference(std::span<const FrameSample> frames, const KinematicTree& tree,
                              const EvalConfig& config) {
  const std::vector<size_t> indices = stride_indices(frames.size(), config.stride);
  std::vector<FrameEval> evals;
  evals.reserve(indices.size());
  for (size_t idx : indices) evals.push_back(evaluate_frame(frames[idx], tree, config));
  return aggregate_frame_evals(evals, tree, config);
}

EvalReport evaluate(std::span<const FrameSample> frames, const KinematicTree& tree,
                    const EvalConfig& config, int threads) {
  const std::vector<size_t> indices = stride_indices(frames.size(), config.stride);
  const int n = static_cast<int>(indices.size());
  const int n_threads = resolve_threads(threads);
  const std::vector<int> subset = eval_subset_of(tree);
  for (size_t idx : indices) {
    require_same_skeleton(frames[idx].pred, tree);
    require_same_skeleton(frames[idx].gt, tree);
  }

  // error storage is preallocated; the parallel loop is allocation-free
  std::vector<FrameEval> evals(indices.size());
  for (auto& eval : evals)
    eval.per_joint_error.resize(static_cast<Eigen::Index>(subset.size()));
  std::vector<std::exception_ptr> errors(indices.size());

#pragma omp parallel for schedule(static) num_threads(n_threads)
  for (int i = 0; i < n; ++i) {
    try {
      evaluate_frame_into(frames[indices[i]], subset, config.align, evals[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (int i = 0; i < n; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);
  return aggregate_frame_evals(evals, tree, config);
}

}  // namespace poselift
