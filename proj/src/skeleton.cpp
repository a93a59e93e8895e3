#include "poselift/skeleton.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "poselift/error.hpp"

namespace poselift {

int SkeletonDef::joint_index(const std::string& joint_name) const {
  for (int i = 0; i < joint_count(); ++i) {
    if (joints[i].name == joint_name) return i;
  }
  return -1;
}

KinematicTree build_skeleton(const SkeletonDef& def) {
  const int n = def.joint_count();
  if (n < 2) fail(ErrorKind::InvariantViolation, "skeleton needs at least 2 joints");
  if (def.root_index < 0 || def.root_index >= n)
    fail(ErrorKind::IndexOutOfRange, "root index " + std::to_string(def.root_index));

  for (int j = 0; j < n; ++j) {
    const int p = def.joints[j].parent;
    if (p < 0 || p >= n)
      fail(ErrorKind::IndexOutOfRange,
           "joint '" + def.joints[j].name + "' parent index " + std::to_string(p));
    if (p == j && j != def.root_index)
      fail(ErrorKind::MultipleRoots, "joint '" + def.joints[j].name + "' is its own parent");
  }
  if (def.joints[def.root_index].parent != def.root_index)
    fail(ErrorKind::InvariantViolation, "root joint must be its own parent");

  // Walk each joint's parent chain; a chain that fails to reach the root
  // within n steps is cyclic.
  std::vector<int> depth(n, -1);
  depth[def.root_index] = 0;
  for (int j = 0; j < n; ++j) {
    int cur = j;
    std::vector<int> chain;
    while (depth[cur] < 0) {
      chain.push_back(cur);
      cur = def.joints[cur].parent;
      if (static_cast<int>(chain.size()) > n)
        fail(ErrorKind::CycleDetected, "parent chain of '" + def.joints[j].name + "'");
    }
    int d = depth[cur];
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) depth[*it] = ++d;
  }

  for (int idx : def.eval_subset) {
    if (idx < 0 || idx >= n) fail(ErrorKind::IndexOutOfRange, "eval_subset index " + std::to_string(idx));
  }
  std::set<int> in_eval(def.eval_subset.begin(), def.eval_subset.end());
  std::set<int> seen_sym;
  for (const auto& group : def.symmetry_groups) {
    for (auto [a, b] : group.pairs) {
      for (int idx : {a, b}) {
        if (!in_eval.count(idx))
          fail(ErrorKind::InvariantViolation,
               "symmetry group '" + group.name + "' joint " + std::to_string(idx) +
                   " outside eval subset");
        if (!seen_sym.insert(idx).second)
          fail(ErrorKind::InvariantViolation,
               "joint " + std::to_string(idx) + " appears in more than one symmetry pair");
      }
    }
  }

  KinematicTree tree;
  tree.def = def;
  tree.parent1.resize(n);
  tree.parent2.resize(n);
  tree.depth = depth;
  for (int j = 0; j < n; ++j) tree.parent1[j] = def.joints[j].parent;
  for (int j = 0; j < n; ++j) tree.parent2[j] = tree.parent1[tree.parent1[j]];
  tree.topological_order.resize(n);
  for (int j = 0; j < n; ++j) tree.topological_order[j] = j;
  std::stable_sort(tree.topological_order.begin(), tree.topological_order.end(),
                   [&](int a, int b) { return depth[a] < depth[b]; });
  return tree;
}

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& origin, const std::string& msg) {
  fail(ErrorKind::ParseError, origin + ": " + msg);
}

void check_known_fields(const json& obj, const std::set<std::string>& known,
                        const std::string& origin, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!known.count(key)) parse_fail(origin, "unknown field '" + key + "' in " + where);
  }
}

}  // namespace

SkeletonDef parse_skeleton_json(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    parse_fail(origin, e.what());
  }
  if (!doc.is_object()) parse_fail(origin, "top level must be an object");
  check_known_fields(doc, {"name", "joints", "root", "eval_subset", "symmetry", "units"},
                     origin, "skeleton");

  SkeletonDef def;
  if (!doc.contains("name") || !doc["name"].is_string()) parse_fail(origin, "missing string 'name'");
  if (!doc.contains("joints") || !doc["joints"].is_array()) parse_fail(origin, "missing array 'joints'");
  if (!doc.contains("root") || !doc["root"].is_string()) parse_fail(origin, "missing string 'root'");
  def.name = doc["name"].get<std::string>();
  if (doc.contains("units")) def.units = doc["units"].get<std::string>();

  std::unordered_map<std::string, int> index_of;
  std::vector<std::string> parent_names;
  for (const auto& entry : doc["joints"]) {
    if (!entry.is_object()) parse_fail(origin, "joint entries must be objects");
    check_known_fields(entry, {"name", "parent"}, origin, "joint entry");
    if (!entry.contains("name") || !entry.contains("parent"))
      parse_fail(origin, "joint entry needs 'name' and 'parent'");
    SkeletonDef::Joint joint;
    joint.name = entry["name"].get<std::string>();
    if (index_of.count(joint.name)) parse_fail(origin, "duplicate joint name '" + joint.name + "'");
    index_of[joint.name] = static_cast<int>(def.joints.size());
    parent_names.push_back(entry["parent"].get<std::string>());
    def.joints.push_back(joint);
  }
  for (size_t j = 0; j < def.joints.size(); ++j) {
    auto it = index_of.find(parent_names[j]);
    if (it == index_of.end())
      parse_fail(origin, "joint '" + def.joints[j].name + "' references unknown parent '" +
                             parent_names[j] + "'");
    def.joints[j].parent = it->second;
  }

  const std::string root_name = doc["root"].get<std::string>();
  auto root_it = index_of.find(root_name);
  if (root_it == index_of.end()) parse_fail(origin, "root '" + root_name + "' is not a joint");
  def.root_index = root_it->second;

  if (doc.contains("eval_subset")) {
    for (const auto& v : doc["eval_subset"]) {
      if (!v.is_number_integer()) parse_fail(origin, "eval_subset entries must be integers");
      def.eval_subset.push_back(v.get<int>());
    }
  }
  if (doc.contains("symmetry")) {
    if (!doc["symmetry"].is_object()) parse_fail(origin, "'symmetry' must be an object");
    for (const auto& [group_name, pairs] : doc["symmetry"].items()) {
      SkeletonDef::SymmetryGroup group;
      group.name = group_name;
      if (!pairs.is_array()) parse_fail(origin, "symmetry group '" + group_name + "' must be an array");
      for (const auto& pair : pairs) {
        if (!pair.is_array() || pair.size() != 2)
          parse_fail(origin, "symmetry pairs must be [i, j] arrays");
        group.pairs.emplace_back(pair[0].get<int>(), pair[1].get<int>());
      }
      def.symmetry_groups.push_back(std::move(group));
    }
  }

  build_skeleton(def);  // surface invariant violations at load time
  return def;
}

SkeletonDef load_skeleton(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open skeleton file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (buffer.str().empty()) fail(ErrorKind::ParseError, path + ": empty file");
  return parse_skeleton_json(buffer.str(), path);
}

}  // namespace poselift
