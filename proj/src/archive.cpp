#include "poselift/archive.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "poselift/error.hpp"

namespace poselift {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& origin, long line, const std::string& msg) {
  fail(ErrorKind::ParseError, origin + ":" + std::to_string(line) + ": " + msg);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

double parse_value(const std::string& token, const std::string& origin, long line) {
  double value = 0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    parse_fail(origin, line, "bad numeric token '" + token + "'");
  if (!std::isfinite(value))
    parse_fail(origin, line, "non-finite token '" + token + "' rejected");
  return value;
}

long parse_frame(const std::string& token, const std::string& origin, long line) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    parse_fail(origin, line, "bad frame index '" + token + "'");
  return value;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string token;
  std::stringstream stream(line);
  while (std::getline(stream, token, ',')) out.push_back(token);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

const char* axis_suffix(int axis) {
  static const char* names[] = {"_x", "_y", "_z"};
  return names[axis];
}

PoseArchive read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path);

  PoseArchive archive;
  std::string line;
  long line_no = 0;
  bool saw_kind = false;

  // leading "# key=value" metadata lines
  std::streampos header_pos = in.tellg();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] != '#') break;
    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_fail(path, line_no, "metadata line without '='");
    std::string key = line.substr(1, eq - 1);
    std::string value = line.substr(eq + 1);
    while (!key.empty() && key.front() == ' ') key.erase(key.begin());
    while (!key.empty() && key.back() == ' ') key.pop_back();
    if (key == "skeleton") archive.skeleton = value;
    else if (key == "units") archive.units = value;
    else if (key == "camera") archive.camera = value;
    else if (key == "frame") {
      archive.kind = archive_kind_from_string(value);
      saw_kind = true;
    } else {
      parse_fail(path, line_no, "unknown metadata key '" + key + "'");
    }
    header_pos = in.tellg();
    (void)header_pos;
  }
  if (line.empty() && in.eof()) fail(ErrorKind::ParseError, path + ": empty file");
  if (!saw_kind) parse_fail(path, line_no, "missing '# frame=<kind>' metadata");

  // column header
  const std::vector<std::string> columns = split_csv(line);
  if (columns.empty() || columns[0] != "frame")
    parse_fail(path, line_no, "header must start with 'frame'");
  size_t value_columns = columns.size() - 1;
  archive.has_labels = value_columns >= 3 && columns[columns.size() - 3] == "activity" &&
                       columns[columns.size() - 2] == "scene" && columns.back() == "subject";
  if (archive.has_labels) value_columns -= 3;
  const int dims = archive.dims();
  if (value_columns == 0 || value_columns % static_cast<size_t>(dims) != 0)
    parse_fail(path, line_no, "coordinate column count is not a multiple of " + std::to_string(dims));
  const int joints = static_cast<int>(value_columns) / dims;

  long previous_frame = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> tokens = split_csv(line);
    if (tokens.size() != columns.size())
      parse_fail(path, line_no,
                 "expected " + std::to_string(columns.size()) + " fields, got " +
                     std::to_string(tokens.size()));
    PoseArchive::Record record;
    record.frame = parse_frame(tokens[0], path, line_no);
    if (!first && record.frame <= previous_frame)
      parse_fail(path, line_no, "frame indices must be strictly increasing");
    first = false;
    previous_frame = record.frame;
    record.values.resize(dims, joints);
    for (int j = 0; j < joints; ++j)
      for (int axis = 0; axis < dims; ++axis)
        record.values(axis, j) = parse_value(tokens[1 + j * dims + axis], path, line_no);
    if (archive.has_labels) {
      record.activity = tokens[tokens.size() - 3];
      record.scene = tokens[tokens.size() - 2];
      record.subject = tokens.back();
    }
    archive.records.push_back(std::move(record));
  }
  return archive;
}

void write_csv(const PoseArchive& archive, std::ostream& out) {
  out << "# skeleton=" << archive.skeleton << "\n";
  out << "# units=" << archive.units << "\n";
  out << "# frame=" << to_string(archive.kind) << "\n";
  if (!archive.camera.empty()) out << "# camera=" << archive.camera << "\n";
  const int dims = archive.dims();
  const int joints = archive.joint_count();
  out << "frame";
  for (int j = 0; j < joints; ++j)
    for (int axis = 0; axis < dims; ++axis) out << ",j" << j << axis_suffix(axis);
  if (archive.has_labels) out << ",activity,scene,subject";
  out << "\n";
  for (const auto& record : archive.records) {
    out << record.frame;
    for (int j = 0; j < joints; ++j)
      for (int axis = 0; axis < dims; ++axis) out << "," << format_double(record.values(axis, j));
    if (archive.has_labels)
      out << "," << record.activity << "," << record.scene << "," << record.subject;
    out << "\n";
  }
}

PoseArchive read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
  PoseArchive archive;
  try {
    const auto& header = doc.at("header");
    archive.skeleton = header.value("skeleton", "");
    archive.units = header.value("units", "millimeters");
    archive.kind = archive_kind_from_string(header.at("frame").get<std::string>());
    archive.camera = header.value("camera", "");
    const int dims = archive.dims();
    long previous = 0;
    bool first = true;
    for (const auto& entry : doc.at("frames")) {
      PoseArchive::Record record;
      record.frame = entry.at("frame").get<long>();
      if (!first && record.frame <= previous)
        fail(ErrorKind::ParseError, path + ": frame indices must be strictly increasing");
      first = false;
      previous = record.frame;
      const auto& joints = entry.at("joints");
      record.values.resize(dims, joints.size());
      for (size_t j = 0; j < joints.size(); ++j) {
        if (static_cast<int>(joints[j].size()) != dims)
          fail(ErrorKind::ParseError,
               path + ": frame " + std::to_string(record.frame) + " joint " + std::to_string(j) +
                   " has wrong dimension");
        for (int axis = 0; axis < dims; ++axis) {
          const double v = joints[j][static_cast<size_t>(axis)].get<double>();
          if (!std::isfinite(v))
            fail(ErrorKind::ParseError,
                 path + ": non-finite value at frame " + std::to_string(record.frame));
          record.values(axis, static_cast<Eigen::Index>(j)) = v;
        }
      }
      if (entry.contains("labels")) {
        archive.has_labels = true;
        record.activity = entry["labels"].value("activity", "");
        record.scene = entry["labels"].value("scene", "");
        record.subject = entry["labels"].value("subject", "");
      }
      archive.records.push_back(std::move(record));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
  return archive;
}

void write_json(const PoseArchive& archive, std::ostream& out) {
  json doc;
  doc["header"] = {{"skeleton", archive.skeleton},
                   {"units", archive.units},
                   {"frame", to_string(archive.kind)},
                   {"camera", archive.camera}};
  auto& frames = doc["frames"] = json::array();
  const int dims = archive.dims();
  for (const auto& record : archive.records) {
    json entry;
    entry["frame"] = record.frame;
    auto& joints = entry["joints"] = json::array();
    for (Eigen::Index j = 0; j < record.values.cols(); ++j) {
      json joint = json::array();
      for (int axis = 0; axis < dims; ++axis) joint.push_back(record.values(axis, j));
      joints.push_back(std::move(joint));
    }
    if (archive.has_labels)
      entry["labels"] = {{"activity", record.activity},
                         {"scene", record.scene},
                         {"subject", record.subject}};
    frames.push_back(std::move(entry));
  }
  out << doc.dump(2) << "\n";
}

void validate_archive(const PoseArchive& archive) {
  const int joints = archive.joint_count();
  for (const auto& record : archive.records) {
    if (static_cast<int>(record.values.cols()) != joints ||
        static_cast<int>(record.values.rows()) != archive.dims())
      fail(ErrorKind::ShapeMismatch,
           "record at frame " + std::to_string(record.frame) + " has inconsistent shape");
    if (!record.values.allFinite())
      fail(ErrorKind::InvariantViolation,
           "record at frame " + std::to_string(record.frame) + " has non-finite values");
  }
}

}  // namespace

const char* to_string(ArchiveKind kind) {
  switch (kind) {
    case ArchiveKind::RootRelative3D: return "root_relative";
    case ArchiveKind::Global3D: return "global";
    case ArchiveKind::Points2D: return "2d";
    case ArchiveKind::Relative1: return "rel1";
    case ArchiveKind::Relative2: return "rel2";
  }
  return "unknown";
}

ArchiveKind archive_kind_from_string(const std::string& name) {
  if (name == "root_relative") return ArchiveKind::RootRelative3D;
  if (name == "global") return ArchiveKind::Global3D;
  if (name == "2d") return ArchiveKind::Points2D;
  if (name == "rel1") return ArchiveKind::Relative1;
  if (name == "rel2") return ArchiveKind::Relative2;
  fail(ErrorKind::ParseError, "unknown archive frame kind '" + name + "'");
}

std::string format_double(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  (void)ec;
  return std::string(buffer, ptr);
}

PoseArchive read_pose_archive(const std::string& path) {
  PoseArchive archive = ends_with(path, ".json") ? read_json(path) : read_csv(path);
  validate_archive(archive);
  return archive;
}

void write_pose_archive(const PoseArchive& archive, const std::string& path) {
  validate_archive(archive);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) fail(ErrorKind::IoError, "cannot write " + path);
    if (ends_with(path, ".json"))
      write_json(archive, out);
    else
      write_csv(archive, out);
    if (!out) fail(ErrorKind::IoError, "write failed for " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    fail(ErrorKind::IoError, "cannot move temporary output into " + path);
}

bool archives_equal(const PoseArchive& a, const PoseArchive& b) {
  if (a.skeleton != b.skeleton || a.units != b.units || a.kind != b.kind || a.camera != b.camera ||
      a.has_labels != b.has_labels || a.records.size() != b.records.size())
    return false;
  for (size_t i = 0; i < a.records.size(); ++i) {
    const auto& ra = a.records[i];
    const auto& rb = b.records[i];
    if (ra.frame != rb.frame || ra.values != rb.values || ra.activity != rb.activity ||
        ra.scene != rb.scene || ra.subject != rb.subject)
      return false;
  }
  return true;
}

std::vector<Pose3D> to_poses(const PoseArchive& archive) {
  if (archive.kind != ArchiveKind::RootRelative3D && archive.kind != ArchiveKind::Global3D)
    fail(ErrorKind::InvalidArgument, "archive does not hold 3D poses");
  const PoseFrame frame = archive.kind == ArchiveKind::RootRelative3D ? PoseFrame::RootRelative
                                                                      : PoseFrame::CameraGlobal;
  std::vector<Pose3D> out;
  out.reserve(archive.records.size());
  for (const auto& record : archive.records)
    out.push_back(make_pose3d(record.values, frame, archive.skeleton));
  return out;
}

std::vector<Pose2D> to_keypoints(const PoseArchive& archive) {
  if (archive.kind != ArchiveKind::Points2D)
    fail(ErrorKind::InvalidArgument, "archive does not hold 2D keypoints");
  std::vector<Pose2D> out;
  out.reserve(archive.records.size());
  for (const auto& record : archive.records)
    out.push_back(make_pose2d(record.values, archive.skeleton));
  return out;
}

std::vector<RelPose> to_relposes(const PoseArchive& archive) {
  int order = 0;
  if (archive.kind == ArchiveKind::Relative1) order = 1;
  if (archive.kind == ArchiveKind::Relative2) order = 2;
  if (order == 0) fail(ErrorKind::InvalidArgument, "archive does not hold relative encodings");
  std::vector<RelPose> out;
  out.reserve(archive.records.size());
  for (const auto& record : archive.records) {
    RelPose rel;
    rel.deltas = record.values;
    rel.order = order;
    rel.skeleton = archive.skeleton;
    out.push_back(std::move(rel));
  }
  return out;
}

PoseArchive from_poses(const std::vector<Pose3D>& poses, const std::string& skeleton,
                       ArchiveKind kind, const std::vector<long>* frames) {
  PoseArchive archive;
  archive.skeleton = skeleton;
  archive.kind = kind;
  for (size_t i = 0; i < poses.size(); ++i) {
    PoseArchive::Record record;
    record.frame = frames ? (*frames)[i] : static_cast<long>(i);
    record.values = poses[i].joints;
    archive.records.push_back(std::move(record));
  }
  return archive;
}

PoseArchive from_keypoints(const std::vector<Pose2D>& keypoints, const std::string& skeleton,
                           const std::vector<long>* frames) {
  PoseArchive archive;
  archive.skeleton = skeleton;
  archive.kind = ArchiveKind::Points2D;
  for (size_t i = 0; i < keypoints.size(); ++i) {
    PoseArchive::Record record;
    record.frame = frames ? (*frames)[i] : static_cast<long>(i);
    record.values = keypoints[i].points;
    archive.records.push_back(std::move(record));
  }
  return archive;
}

std::map<std::string, CameraIntrinsics> load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open calibration " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::ParseError, path + ": expected an object keyed by camera id");
  std::map<std::string, CameraIntrinsics> cameras;
  for (const auto& [camera_id, entry] : doc.items()) {
    try {
      cameras[camera_id] =
          make_intrinsics(entry.at("f").get<double>(), entry.at("cx").get<double>(),
                          entry.at("cy").get<double>(), entry.at("width").get<double>(),
                          entry.at("height").get<double>());
    } catch (const json::exception& e) {
      fail(ErrorKind::ParseError, path + ": camera '" + camera_id + "': " + e.what());
    }
  }
  return cameras;
}

std::map<long, CropBox> read_crops(const std::string& path, const CameraIntrinsics& cam) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open crops " + path);
  std::map<long, CropBox> crops;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.rfind("frame", 0) == 0) continue;
    const auto tokens = split_csv(line);
    if (tokens.size() != 5) parse_fail(path, line_no, "expected frame,cx,cy,w,h");
    const long frame = parse_frame(tokens[0], path, line_no);
    crops[frame] = make_crop_box({parse_value(tokens[1], path, line_no),
                                  parse_value(tokens[2], path, line_no)},
                                 parse_value(tokens[3], path, line_no),
                                 parse_value(tokens[4], path, line_no), cam);
  }
  return crops;
}

void save_fusion_weights(const FusionWeights& weights, const std::string& skeleton,
                         const std::string& path) {
  json doc;
  doc["skeleton"] = skeleton;
  auto& rows = doc["weights"] = json::array();
  for (Eigen::Index j = 0; j < weights.w.rows(); ++j)
    rows.push_back({weights.w(j, 0), weights.w(j, 1), weights.w(j, 2)});
  std::ofstream out(path + ".tmp");
  if (!out) fail(ErrorKind::IoError, "cannot write " + path);
  out << doc.dump(2) << "\n";
  out.close();
  std::rename((path + ".tmp").c_str(), path.c_str());
}

FusionWeights load_fusion_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open weights " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
  try {
    const auto& rows = doc.at("weights");
    Eigen::MatrixX3d w(rows.size(), 3);
    for (size_t j = 0; j < rows.size(); ++j)
      for (int c = 0; c < 3; ++c)
        w(static_cast<Eigen::Index>(j), c) = rows[j][static_cast<size_t>(c)].get<double>();
    return make_fusion_weights(std::move(w));
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
}

}  // namespace poselift
