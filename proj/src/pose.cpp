#include "poselift/pose.hpp"

#include "poselift/error.hpp"

namespace poselift {

Pose3D make_pose3d(Eigen::Matrix3Xd joints, PoseFrame frame, std::string skeleton) {
  if (!joints.allFinite()) fail(ErrorKind::InvariantViolation, "pose has non-finite coordinates");
  return Pose3D{std::move(joints), frame, std::move(skeleton)};
}

Pose2D make_pose2d(Eigen::Matrix2Xd points, std::string skeleton) {
  if (!points.allFinite()) fail(ErrorKind::InvariantViolation, "keypoints have non-finite coordinates");
  return Pose2D{std::move(points), std::move(skeleton)};
}

void require_same_skeleton(const Pose3D& pose, const KinematicTree& tree) {
  if (pose.joint_count() != tree.joint_count() ||
      (!pose.skeleton.empty() && pose.skeleton != tree.def.name))
    fail(ErrorKind::SkeletonMismatch,
         "pose skeleton '" + pose.skeleton + "' (" + std::to_string(pose.joint_count()) +
             " joints) vs tree '" + tree.def.name + "' (" + std::to_string(tree.joint_count()) +
             " joints)");
}

void require_same_skeleton(const Pose3D& a, const Pose3D& b) {
  if (a.joint_count() != b.joint_count() ||
      (!a.skeleton.empty() && !b.skeleton.empty() && a.skeleton != b.skeleton))
    fail(ErrorKind::SkeletonMismatch, "poses use different skeletons");
}

void require_frame(const Pose3D& pose, PoseFrame expected) {
  if (pose.frame != expected)
    fail(ErrorKind::WrongFrame,
         expected == PoseFrame::RootRelative ? "expected a root-relative pose"
                                             : "expected a camera-global pose");
}

}  // namespace poselift
