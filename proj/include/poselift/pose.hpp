#pragma once

#include <string>

#include <Eigen/Core>

#include "poselift/skeleton.hpp"

namespace poselift {

enum class PoseFrame { RootRelative, CameraGlobal };

/// 3D joint positions in millimeters, one column per joint, camera coordinates
/// (x right, y down, z forward). Root-relative poses have the root column at
/// exactly (0,0,0).
struct Pose3D {
  Eigen::Matrix3Xd joints;
  PoseFrame frame = PoseFrame::RootRelative;
  std::string skeleton;

  int joint_count() const { return static_cast<int>(joints.cols()); }
};

/// 2D keypoints in pixels, one column per joint.
struct Pose2D {
  Eigen::Matrix2Xd points;
  std::string skeleton;

  int joint_count() const { return static_cast<int>(points.cols()); }
};

/// Validating constructors; reject non-finite coordinates.
Pose3D make_pose3d(Eigen::Matrix3Xd joints, PoseFrame frame, std::string skeleton);
Pose2D make_pose2d(Eigen::Matrix2Xd points, std::string skeleton);

/// Throws SkeletonMismatch unless the pose matches the tree's skeleton name
/// and joint count.
void require_same_skeleton(const Pose3D& pose, const KinematicTree& tree);
void require_same_skeleton(const Pose3D& a, const Pose3D& b);

/// Throws WrongFrame unless the pose carries the expected tag.
void require_frame(const Pose3D& pose, PoseFrame expected);

}  // namespace poselift
