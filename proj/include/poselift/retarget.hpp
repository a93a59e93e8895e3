#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "poselift/pose.hpp"

namespace poselift {

/// Linear joint-position map between skeleton structures. One shared matrix
/// applies to each coordinate axis; the optional affine variant appends a
/// constant column (matrix is then J_tgt x (J_src + 1)).
struct RetargetMap {
  Eigen::MatrixXd matrix;
  std::string source;
  std::string target;
  bool affine = false;

  int source_joints() const {
    return static_cast<int>(matrix.cols()) - (affine ? 1 : 0);
  }
  int target_joints() const { return static_cast<int>(matrix.rows()); }
};

/// Fits M minimizing sum over frames and axes of |M s - t|^2 + lambda |M|^2.
/// With lambda == 0 the source Gram matrix must have full rank (RankDeficient
/// otherwise) and at least J paired frames are required (InsufficientFrames).
RetargetMap fit_retarget_map(const std::vector<Pose3D>& src_frames,
                             const std::vector<Pose3D>& tgt_frames, double ridge_lambda,
                             bool affine = false);

/// Applies the map per coordinate axis. Frame tag and root convention carry
/// over from the input.
Pose3D apply_retarget_map(const RetargetMap& map, const Pose3D& pose);

void save_retarget_map(const RetargetMap& map, const std::string& path);
RetargetMap load_retarget_map(const std::string& path);

}  // namespace poselift
