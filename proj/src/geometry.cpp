#include "poselift/geometry.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <omp.h>

#include "poselift/error.hpp"
#include "poselift/parallel.hpp"

namespace poselift {

namespace {

// centered spreads below this are treated as degenerate (px^2 / mm^2)
constexpr double kSpreadTol = 1e-6;

// centered second-order statistics of the 2D/3D correspondence; computed in
// two passes with fixed-size temporaries only, so per-frame lifting does not
// touch the heap
struct CenteredCorrespondence {
  Eigen::Vector2d keypoint_mean;  // after principal-point shift
  Eigen::Vector2d pose_xy_mean;
  double pose_spread = 0;      // sum |dP_xy|^2
  double keypoint_spread = 0;  // sum |dK|^2
  double cross = 0;            // sum dK . dP_xy
};

CenteredCorrespondence center_raw(const Eigen::Matrix3Xd& joints,
                                  const Eigen::Matrix2Xd& points, const CameraIntrinsics& cam) {
  const Eigen::Index n = joints.cols();
  if (n != points.cols()) fail(ErrorKind::SkeletonMismatch, "2D/3D joint counts differ");
  CenteredCorrespondence c;
  c.keypoint_mean = points.rowwise().mean() - cam.principal_point;
  c.pose_xy_mean = joints.topRows(2).rowwise().mean();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector2d dk = points.col(i) - cam.principal_point - c.keypoint_mean;
    const Eigen::Vector2d dp = joints.col(i).head<2>() - c.pose_xy_mean;
    c.pose_spread += dp.squaredNorm();
    c.keypoint_spread += dk.squaredNorm();
    c.cross += dk.dot(dp);
  }
  return c;
}

CenteredCorrespondence center(const Pose3D& pose, const Pose2D& keypoints,
                              const CameraIntrinsics& cam) {
  return center_raw(pose.joints, keypoints.points, cam);
}

double depth_from(const CenteredCorrespondence& c, const CameraIntrinsics& cam, DepthMode mode) {
  if (c.pose_spread < kSpreadTol)
    fail(ErrorKind::DegenerateSpread, "3D pose has no lateral spread");
  if (c.keypoint_spread < kSpreadTol)
    fail(ErrorKind::DegenerateSpread, "2D keypoints have no spread");
  if (mode == DepthMode::Approx) return cam.f * std::sqrt(c.pose_spread / c.keypoint_spread);
  if (c.cross <= 0) fail(ErrorKind::NonPositiveDepth, "anti-correlated 2D/3D correspondence");
  return cam.f * c.pose_spread / c.cross;
}

}  // namespace

CameraIntrinsics make_intrinsics(double f, double cx, double cy, double width, double height) {
  if (!(f > 0)) fail(ErrorKind::InvalidArgument, "focal length must be positive");
  if (!(width > 0) || !(height > 0)) fail(ErrorKind::InvalidArgument, "image size must be positive");
  return CameraIntrinsics{f, {cx, cy}, {width, height}};
}

CropBox make_crop_box(const Eigen::Vector2d& center, double width, double height,
                      const CameraIntrinsics& cam) {
  if (!(width > 0) || !(height > 0)) fail(ErrorKind::InvalidArgument, "crop extent must be positive");
  if (center.x() < 0 || center.x() > cam.image_size.x() || center.y() < 0 ||
      center.y() > cam.image_size.y())
    fail(ErrorKind::InvalidArgument, "crop center outside image bounds");
  return CropBox{center, width, height};
}

RigidTransform make_rigid_transform(const Eigen::Matrix3d& rotation,
                                    const Eigen::Vector3d& translation) {
  const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).norm();
  if (ortho > 1e-9 || std::abs(rotation.determinant() - 1.0) > 1e-9)
    fail(ErrorKind::InvariantViolation, "rotation is not a proper orthonormal matrix");
  return RigidTransform{rotation, translation};
}

Eigen::Vector2d pinhole_project(const Eigen::Vector3d& point, const CameraIntrinsics& cam) {
  if (point.z() <= 0) fail(ErrorKind::BehindCamera, "point at z = " + std::to_string(point.z()));
  return cam.f * point.head<2>() / point.z() + cam.principal_point;
}

Pose2D pinhole_project(const Pose3D& pose, const CameraIntrinsics& cam) {
  Pose2D out;
  out.skeleton = pose.skeleton;
  out.points.resize(2, pose.joint_count());
  for (int j = 0; j < pose.joint_count(); ++j)
    out.points.col(j) = pinhole_project(Eigen::Vector3d(pose.joints.col(j)), cam);
  return out;
}

Pose2D weak_perspective_project(const Pose3D& pose, const Eigen::Vector3d& translation,
                                const CameraIntrinsics& cam) {
  require_frame(pose, PoseFrame::RootRelative);
  const double z0 = translation.z();
  if (z0 <= 0) fail(ErrorKind::BehindCamera, "reference depth z0 = " + std::to_string(z0));
  Pose2D out;
  out.skeleton = pose.skeleton;
  const double scale = cam.f / z0;
  out.points = (scale * (pose.joints.topRows(2).colwise() + translation.head<2>())).colwise() +
               cam.principal_point;
  return out;
}

double estimate_depth(const Pose3D& pose, const Pose2D& keypoints, const CameraIntrinsics& cam,
                      DepthMode mode) {
  require_frame(pose, PoseFrame::RootRelative);
  return depth_from(center(pose, keypoints, cam), cam, mode);
}

Eigen::Vector3d estimate_global_translation(const Pose3D& pose, const Pose2D& keypoints,
                                            const CameraIntrinsics& cam, DepthMode mode) {
  require_frame(pose, PoseFrame::RootRelative);
  const CenteredCorrespondence c = center(pose, keypoints, cam);
  const double z = depth_from(c, cam, mode);
  return {c.keypoint_mean.x() * z / cam.f - c.pose_xy_mean.x(),
          c.keypoint_mean.y() * z / cam.f - c.pose_xy_mean.y(), z};
}

RigidTransform perspective_correction_from_u(double u, const CameraIntrinsics& cam) {
  const double alpha = std::atan2(u - cam.principal_point.x(), cam.f);
  // Rotation about the up axis (-y) taking the virtual view direction back to
  // the principal axis; written out so the sign convention is explicit.
  const double c = std::cos(alpha);
  const double s = std::sin(alpha);
  Eigen::Matrix3d rotation;
  rotation << c, 0, s,  //
      0, 1, 0,          //
      -s, 0, c;
  return RigidTransform{rotation, Eigen::Vector3d::Zero()};
}

RigidTransform perspective_correction(const Pose2D& keypoints, const CameraIntrinsics& cam) {
  if (keypoints.joint_count() == 0) fail(ErrorKind::InvalidArgument, "no keypoints");
  return perspective_correction_from_u(keypoints.points.row(0).mean(), cam);
}

RigidTransform perspective_correction(const CropBox& crop, const CameraIntrinsics& cam) {
  return perspective_correction_from_u(crop.center.x(), cam);
}

Pose3D compose_global(const RigidTransform& transform, const Eigen::Vector3d& translation,
                      const Pose3D& pose) {
  require_frame(pose, PoseFrame::RootRelative);
  Pose3D out;
  out.skeleton = pose.skeleton;
  out.frame = PoseFrame::CameraGlobal;
  out.joints = (transform.rotation * pose.joints).colwise() + translation;
  return out;
}

double reprojection_objective(const Pose3D& pose, const Pose2D& keypoints,
                              const CameraIntrinsics& cam, const Eigen::Vector3d& translation) {
  const double scale = cam.f / translation.z();
  Eigen::Matrix2Xd shifted = keypoints.points.colwise() - cam.principal_point;
  Eigen::Matrix2Xd projected =
      scale * (pose.joints.topRows(2).colwise() + translation.head<2>());
  return (shifted - projected).squaredNorm();
}

LiftResult lift_frame(const Pose3D& root_relative, const Pose2D& keypoints,
                      const CameraIntrinsics& cam, const LiftOptions& options,
                      const CropBox* crop) {
  require_frame(root_relative, PoseFrame::RootRelative);
  RigidTransform correction;
  switch (options.correction) {
    case CorrectionSource::Centroid:
      correction = perspective_correction(keypoints, cam);
      break;
    case CorrectionSource::Crop:
      if (crop == nullptr) fail(ErrorKind::InvalidArgument, "crop correction needs a crop box");
      correction = perspective_correction(*crop, cam);
      break;
    case CorrectionSource::Off:
      break;
  }
  LiftResult result;
  result.correction = correction;
  result.global.skeleton = root_relative.skeleton;
  result.global.frame = PoseFrame::CameraGlobal;
  result.global.joints.noalias() = correction.rotation * root_relative.joints;
  const Pose3D corrected{result.global.joints, PoseFrame::RootRelative, root_relative.skeleton};
  result.translation = estimate_global_translation(corrected, keypoints, cam, options.depth_mode);
  result.global.joints.colwise() += result.translation;
  return result;
}

BatchLiftResult lift_batch_reference(const std::vector<Pose3D>& poses,
                                     const std::vector<Pose2D>& keypoints,
                                     const CameraIntrinsics& cam, const LiftOptions& options) {
  if (poses.size() != keypoints.size())
    fail(ErrorKind::ShapeMismatch, "pose and keypoint batches differ in length");
  BatchLiftResult out;
  out.frames.resize(poses.size());
  for (size_t i = 0; i < poses.size(); ++i) {
    try {
      out.frames[i] = lift_frame(poses[i], keypoints[i], cam, options);
    } catch (const Error& e) {
      out.failures.push_back("frame " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

BatchLiftResult lift_batch(const std::vector<Pose3D>& poses, const std::vector<Pose2D>& keypoints,
                           const CameraIntrinsics& cam, const LiftOptions& options, int threads) {
  if (poses.size() != keypoints.size())
    fail(ErrorKind::ShapeMismatch, "pose and keypoint batches differ in length");
  if (options.correction == CorrectionSource::Crop)
    fail(ErrorKind::InvalidArgument, "crop correction needs per-frame boxes; use lift_frame");
  const int n = static_cast<int>(poses.size());
  const int n_threads = resolve_threads(threads);

  // result storage is preallocated up front; the parallel loop itself never
  // touches the heap (the allocator serializes badly under contention)
  BatchLiftResult out;
  out.frames.resize(poses.size());
  std::vector<std::string> errors(poses.size());
  for (int i = 0; i < n; ++i) {
    require_frame(poses[i], PoseFrame::RootRelative);
    LiftResult& slot = out.frames[i].emplace();
    slot.global.frame = PoseFrame::CameraGlobal;
    slot.global.skeleton = poses[i].skeleton;
    slot.global.joints.resize(3, poses[i].joint_count());
  }

#pragma omp parallel for schedule(static) num_threads(n_threads)
  for (int i = 0; i < n; ++i) {
    try {
      LiftResult& slot = *out.frames[i];
      if (options.correction == CorrectionSource::Centroid)
        slot.correction = perspective_correction(keypoints[i], cam);
      slot.global.joints.noalias() = slot.correction.rotation * poses[i].joints;
      const CenteredCorrespondence c = center_raw(slot.global.joints, keypoints[i].points, cam);
      const double z = depth_from(c, cam, options.depth_mode);
      slot.translation = {c.keypoint_mean.x() * z / cam.f - c.pose_xy_mean.x(),
                          c.keypoint_mean.y() * z / cam.f - c.pose_xy_mean.y(), z};
      slot.global.joints.colwise() += slot.translation;
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      out.frames[i].reset();
      out.failures.push_back("frame " + std::to_string(i) + ": " + errors[i]);
    }
  }
  return out;
}

}  // namespace poselift
