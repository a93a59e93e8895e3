#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "poselift/pose.hpp"

namespace poselift {

struct KMeansOptions {
  std::uint64_t seed = 0;
  int max_iters = 300;
  double tol = 1e-4;  // max centroid shift, mm
};

/// Lloyd clustering result on flattened root-relative poses. Centroids are
/// the means of their members at convergence; inertia is the total
/// within-cluster squared distance in mm^2.
struct PoseClusters {
  int k = 0;
  std::uint64_t seed = 0;
  std::string skeleton;
  Eigen::MatrixXd centroids;  // k x 3J, row per cluster
  std::vector<int> assignments;
  double inertia = 0;
  std::vector<double> iteration_inertia;  // one entry per Lloyd iteration
  std::map<int, std::string> class_map;
};

/// k-means++ seeding driven by the seed, then Lloyd iterations until the max
/// centroid shift drops below tol or max_iters is hit. Empty clusters are
/// reseeded from the point farthest from its centroid. Deterministic given
/// the seed and thread-count independent (fixed-chunk reductions).
/// kmeans_poses_reference is the plain serial implementation kept for
/// testing.
PoseClusters kmeans_poses(const std::vector<Pose3D>& poses, int k, const KMeansOptions& options,
                          int threads);
PoseClusters kmeans_poses_reference(const std::vector<Pose3D>& poses, int k,
                                    const KMeansOptions& options);

/// Attaches a cluster -> class name map; every cluster id must be covered.
PoseClusters assign_classes(PoseClusters clusters, const std::map<int, std::string>& class_map);

/// Cluster file round trip (JSON; schema in the README).
void save_clusters(const PoseClusters& clusters, const std::string& path);
PoseClusters load_clusters(const std::string& path);

}  // namespace poselift
