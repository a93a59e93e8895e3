#pragma once

#include <vector>

#include <Eigen/Core>

#include "poselift/pose.hpp"
#include "poselift/skeleton.hpp"

namespace poselift {

/// Joint offsets relative to order-1 or order-2 parents. The root entry is
/// zero for encodings of root-relative poses (the root is its own ancestor).
struct RelPose {
  Eigen::Matrix3Xd deltas;
  int order = 1;  // 1 or 2
  std::string skeleton;

  int joint_count() const { return static_cast<int>(deltas.cols()); }
};

/// Per-joint affine combination weights over the three decoded estimates
/// (root-relative, order-1, order-2). Every row sums to 1 within 1e-9.
struct FusionWeights {
  Eigen::MatrixX3d w;

  int joint_count() const { return static_cast<int>(w.rows()); }
};

FusionWeights make_fusion_weights(Eigen::MatrixX3d w);
FusionWeights uniform_fusion_weights(int joint_count);

/// Shifts a camera-global pose so the root sits at the origin.
Pose3D to_root_relative(const Pose3D& pose, const KinematicTree& tree);

/// deltas[j] = joints[j] - joints[parent_order(j)].
RelPose encode_relative(const Pose3D& pose, const KinematicTree& tree, int order);

/// Exact inverse of encode_relative; resolves joints in topological order.
Pose3D decode_relative(const RelPose& rel, const KinematicTree& tree);

/// P_fused[j] = w0*p[j] + w1*decode(o1)[j] + w2*decode(o2)[j].
Pose3D fuse(const Pose3D& p, const RelPose& o1, const RelPose& o2,
            const FusionWeights& weights, const KinematicTree& tree);

struct FusionSample {
  Pose3D p;
  RelPose o1;
  RelPose o2;
  Pose3D ground_truth;
};

/// Per joint, ridge least squares for the affine combination minimizing
/// squared error against ground truth; the regularizer pulls toward the
/// uniform (1/3,1/3,1/3) prior so lambda -> inf degrades to plain averaging.
/// Rows are renormalized to sum to exactly 1.
FusionWeights fit_fusion_weights(const std::vector<FusionSample>& samples,
                                 const KinematicTree& tree, double ridge_lambda);

}  // namespace poselift
