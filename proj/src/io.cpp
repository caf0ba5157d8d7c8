#include "regalign/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace regalign {

namespace {

using nlohmann::json;

std::string lower_extension(const std::string& path) {
  const std::size_t dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::io_error, "cannot open " + path);
  }
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::io_error, "cannot write " + path);
  }
  out.precision(17);
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, sep)) fields.push_back(field);
  return fields;
}

PointSet points_from_rows(const std::vector<std::vector<double>>& rows,
                          const std::string& path, int id) {
  if (rows.empty()) {
    throw Error(ErrorCode::parse_error, path + ": no points");
  }
  const std::size_t d = rows.front().size();
  if (d != 2 && d != 3) {
    throw Error(ErrorCode::dimension_mismatch,
                path + ": points must be 2- or 3-dimensional");
  }
  Eigen::MatrixXd pts(d, rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].size() != d) {
      throw Error(ErrorCode::dimension_mismatch,
                  path + ": row " + std::to_string(k) + " has " +
                      std::to_string(rows[k].size()) + " fields, expected " +
                      std::to_string(d));
    }
    for (std::size_t i = 0; i < d; ++i) pts(static_cast<int>(i), static_cast<int>(k)) = rows[k][i];
  }
  return PointSet(id, std::move(pts));
}

PointSet load_csv(const std::string& path, int id) {
  std::ifstream in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const std::string& field : split(line, ',')) {
      try {
        row.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw Error(ErrorCode::parse_error, path + ": bad number '" + field + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  return points_from_rows(rows, path, id);
}

PointSet load_json_points(const std::string& path, int id) {
  std::ifstream in = open_input(path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
  if (!doc.is_array()) {
    throw Error(ErrorCode::parse_error, path + ": expected an array of arrays");
  }
  std::vector<std::vector<double>> rows;
  for (const json& row : doc) {
    if (!row.is_array()) {
      throw Error(ErrorCode::parse_error, path + ": expected an array of arrays");
    }
    rows.push_back(row.get<std::vector<double>>());
  }
  return points_from_rows(rows, path, id);
}

PointSet load_ply(const std::string& path, int id) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::parse_error, path + ": empty file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "ply") {
    throw Error(ErrorCode::parse_error, path + ": missing ply magic");
  }

  long vertex_count = -1;
  int x_idx = -1, y_idx = -1, z_idx = -1;
  int property_idx = 0;
  bool in_vertex_element = false;
  bool header_done = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "ascii") {
        throw Error(ErrorCode::parse_error,
                    path + ": only ASCII PLY is supported (got format '" + fmt + "')");
      }
    } else if (word == "element") {
      std::string name;
      long count = 0;
      ls >> name >> count;
      in_vertex_element = (name == "vertex");
      if (in_vertex_element) vertex_count = count;
      property_idx = 0;
    } else if (word == "property" && in_vertex_element) {
      std::string type, name;
      ls >> type >> name;
      if (type == "list") {
        ++property_idx;
        continue;
      }
      if (name == "x") x_idx = property_idx;
      if (name == "y") y_idx = property_idx;
      if (name == "z") z_idx = property_idx;
      ++property_idx;
    } else if (word == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done || vertex_count < 0) {
    throw Error(ErrorCode::parse_error, path + ": malformed PLY header");
  }
  if (x_idx < 0 || y_idx < 0) {
    throw Error(ErrorCode::parse_error, path + ": vertex element lacks x/y properties");
  }

  const int d = z_idx >= 0 ? 3 : 2;
  std::vector<std::vector<double>> rows;
  rows.reserve(vertex_count);
  for (long k = 0; k < vertex_count; ++k) {
    if (!std::getline(in, line)) {
      throw Error(ErrorCode::parse_error, path + ": truncated vertex list");
    }
    std::istringstream ls(line);
    std::vector<double> values;
    double v;
    while (ls >> v) values.push_back(v);
    if (static_cast<int>(values.size()) <= std::max({x_idx, y_idx, z_idx})) {
      throw Error(ErrorCode::parse_error,
                  path + ": vertex line " + std::to_string(k) + " is too short");
    }
    std::vector<double> row{values[x_idx], values[y_idx]};
    if (d == 3) row.push_back(values[z_idx]);
    rows.push_back(std::move(row));
  }
  // Faces and any further elements are ignored.
  return points_from_rows(rows, path, id);
}

}  // namespace

PointSet load_point_set(const std::string& path, int id) {
  const std::string ext = lower_extension(path);
  if (ext == "ply") return load_ply(path, id);
  if (ext == "csv") return load_csv(path, id);
  if (ext == "json") return load_json_points(path, id);
  throw Error(ErrorCode::invalid_argument,
              path + ": unsupported extension '" + ext + "' (use .ply, .csv or .json)");
}

void save_point_set(const PointSet& points, const std::string& path) {
  const std::string ext = lower_extension(path);
  std::ofstream out = open_output(path);
  if (ext == "csv") {
    for (int k = 0; k < points.size(); ++k) {
      for (int i = 0; i < points.dim(); ++i) {
        out << (i ? "," : "") << points.points()(i, k);
      }
      out << "\n";
    }
    return;
  }
  json rows = json::array();
  for (int k = 0; k < points.size(); ++k) {
    json row = json::array();
    for (int i = 0; i < points.dim(); ++i) row.push_back(points.points()(i, k));
    rows.push_back(std::move(row));
  }
  out << rows.dump(1) << "\n";
}

CorrespondenceSet load_correspondences(const std::string& path) {
  std::ifstream in = open_input(path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
  CorrespondenceSet corr;
  try {
    corr.m = doc.at("m").get<int>();
    for (const json& p : doc.at("pairs")) {
      CorrespondencePair pair;
      pair.i = p.at("i").get<int>();
      pair.j = p.at("j").get<int>();
      for (const json& match : p.at("matches")) {
        pair.matches.emplace_back(match.at(0).get<int>(), match.at(1).get<int>());
      }
      corr.pairs.push_back(std::move(pair));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
  return corr;
}

void save_correspondences(const CorrespondenceSet& corr, const std::string& path) {
  json pairs = json::array();
  for (const CorrespondencePair& p : corr.pairs) {
    json matches = json::array();
    for (const auto& [ki, kj] : p.matches) {
      matches.push_back(json::array({ki, kj}));
    }
    pairs.push_back({{"i", p.i}, {"j", p.j}, {"matches", std::move(matches)}});
  }
  std::ofstream out = open_output(path);
  out << json{{"m", corr.m}, {"pairs", std::move(pairs)}}.dump(1) << "\n";
}

std::vector<RigidTransform> load_transforms(const std::string& path) {
  std::ifstream in = open_input(path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
  std::vector<RigidTransform> transforms;
  try {
    for (const json& entry : doc.at("transforms")) {
      const int d = entry.at("d").get<int>();
      const std::vector<double> rot = entry.at("rotation").get<std::vector<double>>();
      const std::vector<double> trans = entry.at("translation").get<std::vector<double>>();
      if (static_cast<int>(rot.size()) != d * d || static_cast<int>(trans.size()) != d) {
        throw Error(ErrorCode::parse_error, path + ": transform entry has wrong arity");
      }
      Eigen::MatrixXd r(d, d);
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) r(i, j) = rot[i * d + j];
      }
      Eigen::VectorXd t(d);
      for (int i = 0; i < d; ++i) t(i) = trans[i];
      transforms.push_back({RotationMatrix::from_matrix(r), std::move(t)});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
  return transforms;
}

void save_transforms(const std::vector<RigidTransform>& transforms,
                     const std::string& path) {
  json entries = json::array();
  for (const RigidTransform& t : transforms) {
    const int d = t.dim();
    json rot = json::array();
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) rot.push_back(t.rotation.matrix()(i, j));
    }
    json trans = json::array();
    for (int i = 0; i < d; ++i) trans.push_back(t.translation(i));
    entries.push_back({{"d", d},
                       {"rotation", std::move(rot)},
                       {"translation", std::move(trans)},
                       {"determinant", t.rotation.matrix().determinant()}});
  }
  std::ofstream out = open_output(path);
  out << json{{"transforms", std::move(entries)}}.dump(1) << "\n";
}

void write_trace_csv(const std::vector<IterationRecord>& history, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "iteration,objective,primal_residual,dual_residual\n";
  for (std::size_t k = 0; k < history.size(); ++k) {
    out << (k + 1) << "," << history[k].objective << "," << history[k].primal_residual
        << "," << history[k].dual_residual << "\n";
  }
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "sigma,eta,trial_count,mean_rotation_error_rad,std_rotation_error_rad,"
         "mean_objective\n";
  for (const SweepRow& row : rows) {
    out << row.sigma << "," << row.eta << "," << row.trial_count << ","
        << row.mean_rotation_error << "," << row.std_rotation_error << ","
        << row.mean_objective << "\n";
  }
}

}  // namespace regalign
