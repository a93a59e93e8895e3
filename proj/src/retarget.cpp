#include "poselift/retarget.hpp"

#include <fstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "poselift/error.hpp"

namespace poselift {

RetargetMap fit_retarget_map(const std::vector<Pose3D>& src_frames,
                             const std::vector<Pose3D>& tgt_frames, double ridge_lambda,
                             bool affine) {
  if (src_frames.size() != tgt_frames.size())
    fail(ErrorKind::ShapeMismatch, "source and target frame counts differ");
  if (src_frames.empty()) fail(ErrorKind::InsufficientFrames, "no frames");
  if (ridge_lambda < 0) fail(ErrorKind::InvalidArgument, "ridge_lambda must be >= 0");

  const int j_src = src_frames.front().joint_count();
  const int j_tgt = tgt_frames.front().joint_count();
  const int cols = j_src + (affine ? 1 : 0);
  if (ridge_lambda == 0 && static_cast<int>(src_frames.size()) < j_src)
    fail(ErrorKind::InsufficientFrames,
         std::to_string(src_frames.size()) + " frames for " + std::to_string(j_src) + " joints");

  // normal equations accumulated over frames and axes; the same map applies
  // to x, y and z coordinate vectors
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(cols, cols);
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(j_tgt, cols);
  Eigen::VectorXd s(cols);
  for (size_t i = 0; i < src_frames.size(); ++i) {
    if (src_frames[i].joint_count() != j_src || tgt_frames[i].joint_count() != j_tgt)
      fail(ErrorKind::ShapeMismatch, "inconsistent joint counts at frame " + std::to_string(i));
    for (int axis = 0; axis < 3; ++axis) {
      s.head(j_src) = src_frames[i].joints.row(axis).transpose();
      if (affine) s(j_src) = 1.0;
      const Eigen::VectorXd t = tgt_frames[i].joints.row(axis).transpose();
      gram.noalias() += s * s.transpose();
      cross.noalias() += t * s.transpose();
    }
  }
  gram.diagonal().array() += ridge_lambda;

  if (ridge_lambda == 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(gram);
    const auto& values = eigen.eigenvalues();
    if (values(0) <= 1e-9 * std::max(values(values.size() - 1), 1.0))
      fail(ErrorKind::RankDeficient, "source frames do not span the joint space");
  }

  RetargetMap map;
  map.source = src_frames.front().skeleton;
  map.target = tgt_frames.front().skeleton;
  map.affine = affine;
  map.matrix = gram.ldlt().solve(cross.transpose()).transpose();
  return map;
}

Pose3D apply_retarget_map(const RetargetMap& map, const Pose3D& pose) {
  if (pose.joint_count() != map.source_joints() ||
      (!map.source.empty() && !pose.skeleton.empty() && pose.skeleton != map.source))
    fail(ErrorKind::SkeletonMismatch, "pose does not match the map's source skeleton");
  Pose3D out;
  out.frame = pose.frame;
  out.skeleton = map.target;
  out.joints.resize(3, map.target_joints());
  Eigen::VectorXd s(map.matrix.cols());
  for (int axis = 0; axis < 3; ++axis) {
    s.head(pose.joint_count()) = pose.joints.row(axis).transpose();
    if (map.affine) s(pose.joint_count()) = 1.0;
    out.joints.row(axis) = (map.matrix * s).transpose();
  }
  return out;
}

void save_retarget_map(const RetargetMap& map, const std::string& path) {
  nlohmann::json doc;
  doc["source"] = map.source;
  doc["target"] = map.target;
  doc["affine"] = map.affine;
  doc["rows"] = map.matrix.rows();
  doc["cols"] = map.matrix.cols();
  auto& m = doc["matrix"] = nlohmann::json::array();  // row-major
  for (Eigen::Index r = 0; r < map.matrix.rows(); ++r)
    for (Eigen::Index c = 0; c < map.matrix.cols(); ++c) m.push_back(map.matrix(r, c));

  std::ofstream out(path + ".tmp");
  if (!out) fail(ErrorKind::IoError, "cannot write " + path);
  out << doc.dump(2) << "\n";
  out.close();
  std::rename((path + ".tmp").c_str(), path.c_str());
}

RetargetMap load_retarget_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open retarget map " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
  RetargetMap map;
  try {
    map.source = doc.at("source").get<std::string>();
    map.target = doc.at("target").get<std::string>();
    map.affine = doc.value("affine", false);
    const Eigen::Index rows = doc.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = doc.at("cols").get<Eigen::Index>();
    const auto& m = doc.at("matrix");
    if (static_cast<Eigen::Index>(m.size()) != rows * cols)
      fail(ErrorKind::ParseError, path + ": matrix size mismatch");
    map.matrix.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        map.matrix(r, c) = m[static_cast<size_t>(r * cols + c)].get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
  if (!map.matrix.allFinite()) fail(ErrorKind::ParseError, path + ": non-finite entries");
  return map;
}

}  // namespace poselift
