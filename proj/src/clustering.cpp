#include "poselift/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <json.hpp>
#include <omp.h>

#include "poselift/error.hpp"
#include "poselift/parallel.hpp"

namespace poselift {

namespace {

// uniform double in [0, 1) from the top 53 bits; pinned here so files stay
// byte-identical across standard-library implementations
double next_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// one column per pose so distance loops touch contiguous memory
Eigen::MatrixXd flatten(const std::vector<Pose3D>& poses) {
  const int dim = 3 * poses.front().joint_count();
  Eigen::MatrixXd data(dim, poses.size());
  for (size_t i = 0; i < poses.size(); ++i) {
    require_frame(poses[i], PoseFrame::RootRelative);
    if (poses[i].joint_count() * 3 != dim || poses[i].skeleton != poses.front().skeleton)
      fail(ErrorKind::SkeletonMismatch, "poses use different skeletons");
    data.col(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::VectorXd>(poses[i].joints.data(), dim);
  }
  return data;
}

Eigen::MatrixXd kmeanspp_seed(const Eigen::MatrixXd& data, int k, std::mt19937_64& rng,
                              int n_threads) {
  const Eigen::Index n = data.cols();
  Eigen::MatrixXd centroids(data.rows(), k);
  const Eigen::Index first = static_cast<Eigen::Index>(next_unit(rng) * static_cast<double>(n));
  centroids.col(0) = data.col(std::min(first, n - 1));

  // elementwise distance refresh; bitwise identical for any thread count
  Eigen::VectorXd dist2(n);
  const auto refresh = [&](int centroid, bool initial) {
#pragma omp parallel for schedule(static) num_threads(n_threads)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = (data.col(i) - centroids.col(centroid)).squaredNorm();
      dist2[i] = initial ? d : std::min(dist2[i], d);
    }
  };
  refresh(0, true);

  for (int c = 1; c < k; ++c) {
    const double total = dist2.sum();
    Eigen::Index pick = 0;
    if (total > 0) {
      const double target = next_unit(rng) * total;
      double cumulative = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        cumulative += dist2[i];
        if (cumulative >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(next_unit(rng) * static_cast<double>(n));
      pick = std::min(pick, n - 1);
    }
    centroids.col(c) = data.col(pick);
    refresh(c, false);
  }
  return centroids;
}

struct AssignResult {
  std::vector<int> assignments;
  double inertia = 0;
};

AssignResult assign_serial(const Eigen::MatrixXd& data, const Eigen::MatrixXd& centroids) {
  AssignResult out;
  out.assignments.resize(data.cols());
  for (Eigen::Index i = 0; i < data.cols(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (Eigen::Index c = 0; c < centroids.cols(); ++c) {
      const double d = (data.col(i) - centroids.col(c)).squaredNorm();
      if (d < best) {
        best = d;
        best_c = static_cast<int>(c);
      }
    }
    out.assignments[i] = best_c;
    out.inertia += best;
  }
  return out;
}

AssignResult assign_parallel(const Eigen::MatrixXd& data, const Eigen::MatrixXd& centroids,
                             int n_threads) {
  const Eigen::Index n = data.cols();
  const int n_chunks = static_cast<int>((n + kReductionChunk - 1) / kReductionChunk);
  AssignResult out;
  out.assignments.resize(n);
  std::vector<double> chunk_inertia(n_chunks, 0.0);

#pragma omp parallel for schedule(static) num_threads(n_threads)
  for (int chunk = 0; chunk < n_chunks; ++chunk) {
    const Eigen::Index lo = static_cast<Eigen::Index>(chunk) * kReductionChunk;
    const Eigen::Index hi = std::min(lo + kReductionChunk, n);
    double local = 0;
    for (Eigen::Index i = lo; i < hi; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (Eigen::Index c = 0; c < centroids.cols(); ++c) {
        const double d = (data.col(i) - centroids.col(c)).squaredNorm();
        if (d < best) {
          best = d;
          best_c = static_cast<int>(c);
        }
      }
      out.assignments[i] = best_c;
      local += best;
    }
    chunk_inertia[chunk] = local;
  }
  for (double v : chunk_inertia) out.inertia += v;
  return out;
}

// chunk-ordered mean update; identical result for every thread count
Eigen::MatrixXd update_centroids(const Eigen::MatrixXd& data, const std::vector<int>& assignments,
                                 const Eigen::MatrixXd& previous, int n_threads,
                                 std::vector<long>& counts_out) {
  const Eigen::Index n = data.cols();
  const int k = static_cast<int>(previous.cols());
  const int n_chunks = static_cast<int>((n + kReductionChunk - 1) / kReductionChunk);
  std::vector<Eigen::MatrixXd> sums(n_chunks);
  std::vector<std::vector<long>> counts(n_chunks);

#pragma omp parallel for schedule(static) num_threads(n_threads)
  for (int chunk = 0; chunk < n_chunks; ++chunk) {
    const Eigen::Index lo = static_cast<Eigen::Index>(chunk) * kReductionChunk;
    const Eigen::Index hi = std::min(lo + kReductionChunk, n);
    sums[chunk].setZero(data.rows(), k);
    counts[chunk].assign(k, 0);
    for (Eigen::Index i = lo; i < hi; ++i) {
      sums[chunk].col(assignments[i]) += data.col(i);
      ++counts[chunk][assignments[i]];
    }
  }

  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(data.rows(), k);
  counts_out.assign(k, 0);
  for (int chunk = 0; chunk < n_chunks; ++chunk) {
    total += sums[chunk];
    for (int c = 0; c < k; ++c) counts_out[c] += counts[chunk][c];
  }
  Eigen::MatrixXd next = previous;
  for (int c = 0; c < k; ++c)
    if (counts_out[c] > 0) next.col(c) = total.col(c) / static_cast<double>(counts_out[c]);
  return next;
}

void repair_empty_clusters(const Eigen::MatrixXd& data, const std::vector<int>& assignments,
                           Eigen::MatrixXd& centroids, const std::vector<long>& counts) {
  std::vector<bool> stolen(data.cols(), false);
  for (int c = 0; c < static_cast<int>(counts.size()); ++c) {
    if (counts[c] > 0) continue;
    // reseed from the point farthest from its current centroid
    double worst = -1;
    Eigen::Index worst_i = 0;
    for (Eigen::Index i = 0; i < data.cols(); ++i) {
      if (stolen[i]) continue;
      const double d = (data.col(i) - centroids.col(assignments[i])).squaredNorm();
      if (d > worst) {
        worst = d;
        worst_i = i;
      }
    }
    centroids.col(c) = data.col(worst_i);
    stolen[worst_i] = true;
  }
}

PoseClusters run_kmeans(const std::vector<Pose3D>& poses, int k, const KMeansOptions& options,
                        int n_threads, bool parallel) {
  if (k < 1) fail(ErrorKind::InvalidArgument, "k must be >= 1");
  if (static_cast<int>(poses.size()) < k)
    fail(ErrorKind::TooFewPoses,
         std::to_string(poses.size()) + " poses for k = " + std::to_string(k));

  const Eigen::MatrixXd data = flatten(poses);
  std::mt19937_64 rng(options.seed);
  Eigen::MatrixXd centroids = kmeanspp_seed(data, k, rng, parallel ? n_threads : 1);

  PoseClusters out;
  out.k = k;
  out.seed = options.seed;
  out.skeleton = poses.front().skeleton;

  auto assign = [&](const Eigen::MatrixXd& cents) {
    return parallel ? assign_parallel(data, cents, n_threads) : assign_serial(data, cents);
  };

  AssignResult current = assign(centroids);
  out.iteration_inertia.push_back(current.inertia);

  for (int iter = 0; iter < options.max_iters; ++iter) {
    std::vector<long> counts;
    Eigen::MatrixXd next = update_centroids(data, current.assignments, centroids, n_threads, counts);
    repair_empty_clusters(data, current.assignments, next, counts);
    const double shift = (next - centroids).colwise().norm().maxCoeff();
    centroids = next;

    AssignResult refreshed = assign(centroids);
    out.iteration_inertia.push_back(refreshed.inertia);
    const bool stable = refreshed.assignments == current.assignments;
    current = std::move(refreshed);
    if (stable || shift < options.tol) break;
  }

  out.centroids = centroids.transpose();  // public layout: one row per cluster
  out.assignments = current.assignments;
  out.inertia = current.inertia;
  return out;
}

}  // namespace

PoseClusters kmeans_poses(const std::vector<Pose3D>& poses, int k, const KMeansOptions& options,
                          int threads) {
  return run_kmeans(poses, k, options, resolve_threads(threads), true);
}

PoseClusters kmeans_poses_reference(const std::vector<Pose3D>& poses, int k,
                                    const KMeansOptions& options) {
  return run_kmeans(poses, k, options, 1, false);
}

PoseClusters assign_classes(PoseClusters clusters, const std::map<int, std::string>& class_map) {
  for (int c = 0; c < clusters.k; ++c) {
    if (!class_map.count(c))
      fail(ErrorKind::IncompleteMap, "class map misses cluster " + std::to_string(c));
  }
  clusters.class_map = class_map;
  return clusters;
}

void save_clusters(const PoseClusters& clusters, const std::string& path) {
  nlohmann::json doc;
  doc["k"] = clusters.k;
  doc["seed"] = clusters.seed;
  doc["skeleton"] = clusters.skeleton;
  doc["inertia"] = clusters.inertia;
  doc["assignments"] = clusters.assignments;
  auto& cents = doc["centroids"] = nlohmann::json::array();
  for (Eigen::Index c = 0; c < clusters.centroids.rows(); ++c) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index d = 0; d < clusters.centroids.cols(); ++d)
      row.push_back(clusters.centroids(c, d));
    cents.push_back(std::move(row));
  }
  auto& classes = doc["class_map"] = nlohmann::json::object();
  for (const auto& [cluster, name] : clusters.class_map)
    classes[std::to_string(cluster)] = name;

  std::ofstream outfile(path + ".tmp");
  if (!outfile) fail(ErrorKind::IoError, "cannot write " + path);
  outfile << doc.dump(2) << "\n";
  outfile.close();
  std::rename((path + ".tmp").c_str(), path.c_str());
}

PoseClusters load_clusters(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open cluster file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
  PoseClusters out;
  try {
    out.k = doc.at("k").get<int>();
    out.seed = doc.at("seed").get<std::uint64_t>();
    out.skeleton = doc.at("skeleton").get<std::string>();
    out.inertia = doc.at("inertia").get<double>();
    out.assignments = doc.at("assignments").get<std::vector<int>>();
    const auto& cents = doc.at("centroids");
    if (!cents.is_array() || cents.empty()) fail(ErrorKind::ParseError, path + ": bad centroids");
    out.centroids.resize(cents.size(), cents[0].size());
    for (size_t c = 0; c < cents.size(); ++c)
      for (size_t d = 0; d < cents[c].size(); ++d)
        out.centroids(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(d)) =
            cents[c][d].get<double>();
    if (doc.contains("class_map"))
      for (const auto& [key, value] : doc["class_map"].items())
        out.class_map[std::stoi(key)] = value.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
  return out;
}

}  // namespace poselift
