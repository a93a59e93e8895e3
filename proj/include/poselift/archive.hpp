#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "poselift/geometry.hpp"
#include "poselift/pose.hpp"
#include "poselift/representations.hpp"

namespace poselift {

enum class ArchiveKind { RootRelative3D, Global3D, Points2D, Relative1, Relative2 };

const char* to_string(ArchiveKind kind);
ArchiveKind archive_kind_from_string(const std::string& name);

/// Frame-indexed pose storage. CSV and JSON serializations round-trip
/// losslessly (shortest round-trip decimal formatting); frame indices are
/// strictly increasing and every record carries the full joint set.
struct PoseArchive {
  struct Record {
    long frame = 0;
    Eigen::MatrixXd values;  // dims x J
    std::string activity;
    std::string scene;
    std::string subject;
  };

  std::string skeleton;
  std::string units = "millimeters";
  ArchiveKind kind = ArchiveKind::RootRelative3D;
  std::string camera;
  bool has_labels = false;
  std::vector<Record> records;

  int dims() const { return kind == ArchiveKind::Points2D ? 2 : 3; }
  int joint_count() const {
    return records.empty() ? 0 : static_cast<int>(records.front().values.cols());
  }
};

/// Format chosen by extension: .json reads/writes JSON, anything else CSV.
/// Writes go to a temp file followed by an atomic rename.
PoseArchive read_pose_archive(const std::string& path);
void write_pose_archive(const PoseArchive& archive, const std::string& path);

bool archives_equal(const PoseArchive& a, const PoseArchive& b);

/// Conversions between archives and in-memory pose types.
std::vector<Pose3D> to_poses(const PoseArchive& archive);
std::vector<Pose2D> to_keypoints(const PoseArchive& archive);
std::vector<RelPose> to_relposes(const PoseArchive& archive);
PoseArchive from_poses(const std::vector<Pose3D>& poses, const std::string& skeleton,
                       ArchiveKind kind, const std::vector<long>* frames = nullptr);
PoseArchive from_keypoints(const std::vector<Pose2D>& keypoints, const std::string& skeleton,
                           const std::vector<long>* frames = nullptr);

/// Calibration file: JSON object keyed by camera id with
/// {f, cx, cy, width, height} entries.
std::map<std::string, CameraIntrinsics> load_calibration(const std::string& path);

/// Crop boxes for crop-based perspective correction: CSV frame,cx,cy,w,h.
std::map<long, CropBox> read_crops(const std::string& path, const CameraIntrinsics& cam);

/// Fusion weights file: JSON {skeleton, weights: [[w_p, w_o1, w_o2], ...]}.
void save_fusion_weights(const FusionWeights& weights, const std::string& skeleton,
                         const std::string& path);
FusionWeights load_fusion_weights(const std::string& path);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

}  // namespace poselift
