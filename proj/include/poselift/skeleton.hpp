#pragma once

#include <string>
#include <utility>
#include <vector>

namespace poselift {

/// Static description of a kinematic skeleton. Parent indices form a single
/// tree rooted at root_index; the root's parent is its own index so that
/// downstream encodings need no sentinel handling. Units are millimeters.
struct SkeletonDef {
  struct Joint {
    std::string name;
    int parent = -1;  // index into joints; root points at itself
  };

  struct SymmetryGroup {
    std::string name;
    std::vector<std::pair<int, int>> pairs;
  };

  std::string name;
  std::vector<Joint> joints;
  int root_index = 0;
  std::vector<int> eval_subset;
  std::vector<SymmetryGroup> symmetry_groups;
  std::string units = "millimeters";

  int joint_count() const { return static_cast<int>(joints.size()); }
  int joint_index(const std::string& joint_name) const;  // -1 if absent
};

/// Derived parent tables. parent2[j] == parent1[parent1[j]], which clamps to
/// the root automatically because the root maps to itself. topological_order
/// visits every joint after both of its order-1/2 ancestors.
struct KinematicTree {
  SkeletonDef def;
  std::vector<int> parent1;
  std::vector<int> parent2;
  std::vector<int> depth;
  std::vector<int> topological_order;

  int joint_count() const { return static_cast<int>(parent1.size()); }
  int root() const { return def.root_index; }
};

/// Validates the SkeletonDef invariants and derives the parent tables.
/// Throws CycleDetected / MultipleRoots / IndexOutOfRange / InvariantViolation.
KinematicTree build_skeleton(const SkeletonDef& def);

/// Reads a skeleton config (JSON, see README for the schema). Unknown fields
/// and duplicate joint names are rejected. The returned def already passed
/// build_skeleton validation.
SkeletonDef load_skeleton(const std::string& path);

SkeletonDef parse_skeleton_json(const std::string& text, const std::string& origin);

}  // namespace poselift
