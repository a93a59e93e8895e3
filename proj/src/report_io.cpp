#include "poselift/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "poselift/archive.hpp"
#include "poselift/error.hpp"

namespace poselift {

namespace {

void append_bucket(std::ostream& out, const EvalBucket& bucket) {
  out << bucket.type << "," << bucket.name << "," << bucket.frames << ","
      << format_double(bucket.mpjpe) << "," << format_double(bucket.pck) << ","
      << format_double(bucket.auc) << "\n";
}

nlohmann::json bucket_json(const EvalBucket& bucket) {
  return {{"type", bucket.type},   {"name", bucket.name}, {"frames", bucket.frames},
          {"joints", bucket.joints}, {"mpjpe_mm", bucket.mpjpe}, {"pck", bucket.pck},
          {"auc", bucket.auc}};
}

void atomic_write(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) fail(ErrorKind::IoError, "cannot write " + path);
    out << contents;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    fail(ErrorKind::IoError, "cannot move temporary output into " + path);
}

}  // namespace

std::string report_csv_string(const EvalReport& report) {
  std::ostringstream out;
  out << "bucket_type,bucket_name,frames,mpjpe_mm,pck150,auc\n";
  append_bucket(out, report.total);
  for (const auto& bucket : report.joint_groups) append_bucket(out, bucket);
  for (const auto& bucket : report.activities) append_bucket(out, bucket);
  for (const auto& bucket : report.scenes) append_bucket(out, bucket);
  return out.str();
}

void write_report_csv(const EvalReport& report, const std::string& path) {
  atomic_write(path, report_csv_string(report));
}

void write_report_json(const EvalReport& report, const std::string& path) {
  nlohmann::json doc;
  doc["total"] = bucket_json(report.total);
  doc["stride"] = report.stride;
  doc["pck_threshold"] = report.config.pck_threshold;
  doc["auc_range"] = {report.config.auc_min, report.config.auc_max, report.config.auc_step};
  auto& groups = doc["joint_groups"] = nlohmann::json::array();
  for (const auto& bucket : report.joint_groups) groups.push_back(bucket_json(bucket));
  auto& activities = doc["activities"] = nlohmann::json::array();
  for (const auto& bucket : report.activities) activities.push_back(bucket_json(bucket));
  auto& scenes = doc["scenes"] = nlohmann::json::array();
  for (const auto& bucket : report.scenes) scenes.push_back(bucket_json(bucket));
  doc["pck_curve"] = {{"thresholds", report.total_curve.thresholds},
                      {"values", report.total_curve.values}};
  atomic_write(path, doc.dump(2) + "\n");
}

}  // namespace poselift
