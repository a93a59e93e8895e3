#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "poselift/pose.hpp"

namespace poselift {

/// Pinhole intrinsics. Camera convention throughout the project:
/// right-handed, x right, y down, z forward; the camera up axis is -y.
struct CameraIntrinsics {
  double f = 0;                      // focal length, pixels
  Eigen::Vector2d principal_point;   // (cx, cy), pixels
  Eigen::Vector2d image_size;        // (width, height), pixels
};

CameraIntrinsics make_intrinsics(double f, double cx, double cy, double width, double height);

struct CropBox {
  Eigen::Vector2d center;  // (u, v), pixels
  double width = 0;
  double height = 0;
};

CropBox make_crop_box(const Eigen::Vector2d& center, double width, double height,
                      const CameraIntrinsics& cam);

/// Proper rigid motion: R orthonormal with det +1, translation in mm.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

RigidTransform make_rigid_transform(const Eigen::Matrix3d& rotation,
                                    const Eigen::Vector3d& translation);

enum class DepthMode { Exact, Approx };

/// (f*x/z + cx, f*y/z + cy). Throws BehindCamera for z <= 0.
Eigen::Vector2d pinhole_project(const Eigen::Vector3d& point, const CameraIntrinsics& cam);

/// Projects every joint of a camera-global pose. Throws BehindCamera if any
/// joint has z <= 0.
Pose2D pinhole_project(const Pose3D& pose, const CameraIntrinsics& cam);

/// Weak-perspective projection linearized at depth z0 = T.z:
/// (f/z0) * (xy + T.xy) + principal_point.
Pose2D weak_perspective_project(const Pose3D& pose, const Eigen::Vector3d& translation,
                                const CameraIntrinsics& cam);

/// Depth of the subject from 2D/3D correspondences. Exact mode returns the
/// stationary depth of the reprojection objective,
///   z = f * sum|dP_xy|^2 / sum(dK . dP_xy),
/// Approx the ratio-of-norms form f * sqrt(sum|dP_xy|^2) / sqrt(sum|dK|^2).
/// 2D points are shifted by -principal_point internally.
double estimate_depth(const Pose3D& pose, const Pose2D& keypoints, const CameraIntrinsics& cam,
                      DepthMode mode);

/// Closed-form global translation: z from estimate_depth, then
/// x = mean(Kc_x)*z/f - mean(P_x), y analogous. In Exact mode the result
/// minimizes the weak-perspective least-squares objective.
Eigen::Vector3d estimate_global_translation(const Pose3D& pose, const Pose2D& keypoints,
                                            const CameraIntrinsics& cam, DepthMode mode);

/// Rotation about the camera up axis compensating the virtual-camera view
/// direction induced by cropping; horizontal only. The returned transform
/// maps virtual-camera coordinates into the original camera frame,
/// alpha = atan2(u_mean - cx, f). Identity when the centroid sits on the
/// principal axis.
RigidTransform perspective_correction(const Pose2D& keypoints, const CameraIntrinsics& cam);
RigidTransform perspective_correction(const CropBox& crop, const CameraIntrinsics& cam);
RigidTransform perspective_correction_from_u(double u, const CameraIntrinsics& cam);

/// joints[j] = R * pose[j] + T; tags the result camera-global.
Pose3D compose_global(const RigidTransform& transform, const Eigen::Vector3d& translation,
                      const Pose3D& pose);

/// Reprojection objective E(T) = sum_i |Kc_i - (f/T.z)(T.xy + P_i.xy)|^2.
double reprojection_objective(const Pose3D& pose, const Pose2D& keypoints,
                              const CameraIntrinsics& cam, const Eigen::Vector3d& translation);

enum class CorrectionSource { Centroid, Crop, Off };

struct LiftOptions {
  DepthMode depth_mode = DepthMode::Exact;
  CorrectionSource correction = CorrectionSource::Centroid;
};

struct LiftResult {
  Pose3D global;
  RigidTransform correction;
  Eigen::Vector3d translation;
};

/// Full single-frame lift: perspective correction, closed-form translation on
/// the corrected pose, then composition into camera-global coordinates.
LiftResult lift_frame(const Pose3D& root_relative, const Pose2D& keypoints,
                      const CameraIntrinsics& cam, const LiftOptions& options,
                      const CropBox* crop = nullptr);

struct BatchLiftResult {
  std::vector<std::optional<LiftResult>> frames;  // nullopt where the frame failed
  std::vector<std::string> failures;              // one message per failed frame
};

/// Per-frame lifting across a batch; frames are independent, loop is
/// OpenMP-parallel. Failed frames (degenerate spread etc.) are recorded and
/// skipped. lift_batch_reference is the serial implementation kept for
/// testing and benchmarking.
BatchLiftResult lift_batch(const std::vector<Pose3D>& poses, const std::vector<Pose2D>& keypoints,
                           const CameraIntrinsics& cam, const LiftOptions& options, int threads);
BatchLiftResult lift_batch_reference(const std::vector<Pose3D>& poses,
                                     const std::vector<Pose2D>& keypoints,
                                     const CameraIntrinsics& cam, const LiftOptions& options);

}  // namespace poselift
