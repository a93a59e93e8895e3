#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "poselift/geometry.hpp"
#include "poselift/pose.hpp"
#include "poselift/skeleton.hpp"

namespace testsupport {

// uniform double in [lo, hi) from the generator's top 53 bits
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline double gaussian(std::mt19937_64& rng) {
  // Box-Muller; two uniforms per call keeps the stream simple to reason about
  const double u1 = std::max(uniform(rng, 0.0, 1.0), 1e-300);
  const double u2 = uniform(rng, 0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline poselift::SkeletonDef h36m17_def() {
  poselift::SkeletonDef def;
  def.name = "h36m17";
  const std::vector<std::pair<const char*, int>> joints = {
      {"head_top", 16},      {"neck", 15},          {"right_shoulder", 1},
      {"right_elbow", 2},    {"right_wrist", 3},    {"left_shoulder", 1},
      {"left_elbow", 5},     {"left_wrist", 6},     {"right_hip", 14},
      {"right_knee", 8},     {"right_ankle", 9},    {"left_hip", 14},
      {"left_knee", 11},     {"left_ankle", 12},    {"pelvis", 14},
      {"spine", 14},         {"head", 1},
  };
  for (const auto& [name, parent] : joints) def.joints.push_back({name, parent});
  def.root_index = 14;
  for (int j = 0; j < 14; ++j) def.eval_subset.push_back(j);
  def.symmetry_groups = {{"head_neck", {{0, 1}}}, {"shoulders", {{2, 5}}}, {"elbows", {{3, 6}}},
                         {"wrists", {{4, 7}}},    {"hips", {{8, 11}}},     {"knees", {{9, 12}}},
                         {"ankles", {{10, 13}}}};
  return def;
}

/// Random root-relative pose with RMS centered radius `spread`. z_aniso < 1
/// compresses the depth extent (fronto-parallel subjects).
inline poselift::Pose3D random_pose(std::mt19937_64& rng, int joints, int root, double spread,
                                    double z_aniso = 1.0) {
  Eigen::Matrix3Xd p(3, joints);
  for (int j = 0; j < joints; ++j) {
    p(0, j) = gaussian(rng);
    p(1, j) = gaussian(rng);
    p(2, j) = gaussian(rng) * z_aniso;
  }
  p.colwise() -= Eigen::Vector3d(p.col(root));
  const Eigen::Vector3d mean = p.rowwise().mean();
  const double rms = std::sqrt((p.colwise() - mean).squaredNorm() / joints);
  p *= spread / rms;
  p.colwise() -= Eigen::Vector3d(p.col(root));
  return poselift::make_pose3d(p, poselift::PoseFrame::RootRelative, "h36m17");
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  Eigen::Vector4d q;
  for (int i = 0; i < 4; ++i) q[i] = gaussian(rng);
  q.normalize();
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Eigen::Matrix3d r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

inline Eigen::Matrix3d rotation_about(std::mt19937_64& rng, double angle) {
  Eigen::Vector3d axis;
  for (int i = 0; i < 3; ++i) axis[i] = gaussian(rng);
  axis.normalize();
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

/// Minimizes E by solving the reparameterized linear least squares system in
/// (a, b, w) = (f x / z, f y / z, f / z); never touches the closed-form
/// means/ratios path it is used to check.
inline Eigen::Vector3d translation_lls_oracle(const poselift::Pose3D& pose,
                                              const poselift::Pose2D& keypoints,
                                              const poselift::CameraIntrinsics& cam) {
  const int n = pose.joint_count();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 3);
  Eigen::VectorXd b(2 * n);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d k = keypoints.points.col(i) - cam.principal_point;
    a(2 * i, 0) = 1.0;
    a(2 * i, 2) = pose.joints(0, i);
    b(2 * i) = k.x();
    a(2 * i + 1, 1) = 1.0;
    a(2 * i + 1, 2) = pose.joints(1, i);
    b(2 * i + 1) = k.y();
  }
  const Eigen::Vector3d abw = a.colPivHouseholderQr().solve(b);
  const double w = abw[2];
  return {abw[0] / w, abw[1] / w, cam.f / w};
}

/// Plain Nelder-Mead on R^dim; tolerance on simplex function spread.
inline Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                   Eigen::VectorXd start, double step, int max_iters = 20000,
                                   double tol = 1e-14) {
  const int dim = static_cast<int>(start.size());
  std::vector<Eigen::VectorXd> simplex(dim + 1, start);
  for (int i = 0; i < dim; ++i) simplex[i + 1][i] += step;
  std::vector<double> values(dim + 1);
  for (int i = 0; i <= dim; ++i) values[i] = f(simplex[i]);

  for (int iter = 0; iter < max_iters; ++iter) {
    std::vector<int> order(dim + 1);
    for (int i = 0; i <= dim; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
    const int best = order[0], worst = order[dim], second_worst = order[dim - 1];
    if (std::abs(values[worst] - values[best]) <=
        tol * (std::abs(values[best]) + std::abs(values[worst]) + 1e-300))
      break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i <= dim; ++i)
      if (i != worst) centroid += simplex[i];
    centroid /= dim;

    const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
    const double fr = f(reflected);
    if (fr < values[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
    } else if (fr < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = fr;
    } else {
      const Eigen::VectorXd contracted = centroid + 0.5 * (simplex[worst] - centroid);
      const double fc = f(contracted);
      if (fc < values[worst]) {
        simplex[worst] = contracted;
        values[worst] = fc;
      } else {
        for (int i = 0; i <= dim; ++i) {
          if (i == best) continue;
          simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
          values[i] = f(simplex[i]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i <= dim; ++i)
    if (values[i] < values[best]) best = i;
  return simplex[best];
}

/// Gauss-Jordan solve; independent of Eigen's decompositions for use in
/// normal-equations oracles.
inline Eigen::VectorXd gauss_solve(Eigen::MatrixXd a, Eigen::VectorXd b) {
  const int n = static_cast<int>(a.rows());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    a.row(col).swap(a.row(pivot));
    std::swap(b[col], b[pivot]);
    const double d = a(col, col);
    a.row(col) /= d;
    b[col] /= d;
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = a(r, col);
      a.row(r) -= factor * a.row(col);
      b[r] -= factor * b[col];
    }
  }
  return b;
}

}  // namespace testsupport
