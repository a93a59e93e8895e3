#include "poselift/representations.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "poselift/error.hpp"

namespace poselift {

namespace {

constexpr double kAffineTol = 1e-9;

void require_rel_matches(const RelPose& rel, const KinematicTree& tree, int expected_order) {
  if (rel.joint_count() != tree.joint_count() ||
      (!rel.skeleton.empty() && rel.skeleton != tree.def.name))
    fail(ErrorKind::SkeletonMismatch, "relative pose does not match the skeleton");
  if (rel.order != expected_order)
    fail(ErrorKind::SkeletonMismatch,
         "expected order-" + std::to_string(expected_order) + " encoding, got order-" +
             std::to_string(rel.order));
}

}  // namespace

FusionWeights make_fusion_weights(Eigen::MatrixX3d w) {
  if (!w.allFinite()) fail(ErrorKind::NonAffineWeights, "weights have non-finite entries");
  for (Eigen::Index j = 0; j < w.rows(); ++j) {
    if (std::abs(w.row(j).sum() - 1.0) > kAffineTol)
      fail(ErrorKind::NonAffineWeights,
           "row " + std::to_string(j) + " sums to " + std::to_string(w.row(j).sum()));
  }
  return FusionWeights{std::move(w)};
}

FusionWeights uniform_fusion_weights(int joint_count) {
  Eigen::MatrixX3d w(joint_count, 3);
  w.setConstant(1.0 / 3.0);
  return FusionWeights{std::move(w)};
}

Pose3D to_root_relative(const Pose3D& pose, const KinematicTree& tree) {
  require_frame(pose, PoseFrame::CameraGlobal);
  require_same_skeleton(pose, tree);
  Pose3D out = pose;
  out.joints.colwise() -= pose.joints.col(tree.root());
  out.frame = PoseFrame::RootRelative;
  return out;
}

RelPose encode_relative(const Pose3D& pose, const KinematicTree& tree, int order) {
  require_frame(pose, PoseFrame::RootRelative);
  require_same_skeleton(pose, tree);
  if (order != 1 && order != 2) fail(ErrorKind::InvalidArgument, "order must be 1 or 2");
  const auto& parents = order == 1 ? tree.parent1 : tree.parent2;
  RelPose rel;
  rel.order = order;
  rel.skeleton = pose.skeleton;
  rel.deltas.resize(3, pose.joint_count());
  for (int j = 0; j < pose.joint_count(); ++j)
    rel.deltas.col(j) = pose.joints.col(j) - pose.joints.col(parents[j]);
  return rel;
}

Pose3D decode_relative(const RelPose& rel, const KinematicTree& tree) {
  if (rel.order != 1 && rel.order != 2) fail(ErrorKind::InvalidArgument, "order must be 1 or 2");
  require_rel_matches(rel, tree, rel.order);
  const auto& parents = rel.order == 1 ? tree.parent1 : tree.parent2;
  Pose3D out;
  out.frame = PoseFrame::RootRelative;
  out.skeleton = rel.skeleton;
  out.joints.setZero(3, rel.joint_count());
  // depth order guarantees both ancestor tables are resolved before j
  for (int j : tree.topological_order) {
    if (j == tree.root()) {
      out.joints.col(j).setZero();
    } else {
      out.joints.col(j) = rel.deltas.col(j) + out.joints.col(parents[j]);
    }
  }
  return out;
}

Pose3D fuse(const Pose3D& p, const RelPose& o1, const RelPose& o2,
            const FusionWeights& weights, const KinematicTree& tree) {
  require_frame(p, PoseFrame::RootRelative);
  require_same_skeleton(p, tree);
  require_rel_matches(o1, tree, 1);
  require_rel_matches(o2, tree, 2);
  if (weights.joint_count() != tree.joint_count())
    fail(ErrorKind::SkeletonMismatch, "weights joint count mismatch");
  make_fusion_weights(weights.w);  // revalidate affinity

  const Pose3D d1 = decode_relative(o1, tree);
  const Pose3D d2 = decode_relative(o2, tree);
  Pose3D out;
  out.frame = PoseFrame::RootRelative;
  out.skeleton = p.skeleton;
  out.joints.resize(3, p.joint_count());
  for (int j = 0; j < p.joint_count(); ++j) {
    out.joints.col(j) = weights.w(j, 0) * p.joints.col(j) + weights.w(j, 1) * d1.joints.col(j) +
                        weights.w(j, 2) * d2.joints.col(j);
  }
  out.joints.col(tree.root()) = p.joints.col(tree.root());
  return out;
}

FusionWeights fit_fusion_weights(const std::vector<FusionSample>& samples,
                                 const KinematicTree& tree, double ridge_lambda) {
  if (samples.size() < 2)
    fail(ErrorKind::InsufficientSamples,
         "need at least 2 samples, got " + std::to_string(samples.size()));
  if (ridge_lambda < 0) fail(ErrorKind::InvalidArgument, "ridge_lambda must be >= 0");

  const int n_joints = tree.joint_count();
  const int n_samples = static_cast<int>(samples.size());

  std::vector<Pose3D> dec1, dec2;
  dec1.reserve(samples.size());
  dec2.reserve(samples.size());
  for (const auto& s : samples) {
    require_frame(s.p, PoseFrame::RootRelative);
    require_same_skeleton(s.p, tree);
    require_same_skeleton(s.ground_truth, tree);
    dec1.push_back(decode_relative(s.o1, tree));
    dec2.push_back(decode_relative(s.o2, tree));
  }

  const Eigen::Vector3d uniform = Eigen::Vector3d::Constant(1.0 / 3.0);
  const double sqrt_lambda = std::sqrt(ridge_lambda);
  Eigen::MatrixX3d w(n_joints, 3);

  for (int j = 0; j < n_joints; ++j) {
    if (j == tree.root()) {
      // every mode is exactly zero at the root; pass it through with the prior
      w.row(j) = uniform.transpose();
      continue;
    }
    Eigen::MatrixXd a(3 * n_samples + 3, 3);
    Eigen::VectorXd b(3 * n_samples + 3);
    for (int s = 0; s < n_samples; ++s) {
      for (int axis = 0; axis < 3; ++axis) {
        const int row = 3 * s + axis;
        a(row, 0) = samples[s].p.joints(axis, j);
        a(row, 1) = dec1[s].joints(axis, j);
        a(row, 2) = dec2[s].joints(axis, j);
        b(row) = samples[s].ground_truth.joints(axis, j);
      }
    }
    // ridge rows pull toward the uniform prior
    a.bottomRows(3) = sqrt_lambda * Eigen::Matrix3d::Identity();
    b.tail(3) = sqrt_lambda * uniform;
    Eigen::Vector3d solution = a.colPivHouseholderQr().solve(b);
    const double sum = solution.sum();
    if (std::abs(sum) < 1e-12)
      fail(ErrorKind::DegenerateConfiguration,
           "fitted weights for joint " + std::to_string(j) + " sum to zero");
    w.row(j) = (solution / sum).transpose();
  }
  return make_fusion_weights(std::move(w));
}

}  // namespace poselift
