#include "psgla/io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "psgla/errors.h"

namespace psgla {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const std::string& comment,
               const std::vector<std::string>& header, const Matrix& rows) {
  if (!header.empty() && static_cast<Eigen::Index>(header.size()) != rows.cols() && rows.rows() > 0) {
    throw InputError("write_csv: header and column count differ");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open " + path + " for writing");
  if (!comment.empty()) out << "# " << comment << '\n';
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) out << (j ? "," : "") << format_double(rows(i, j));
    out << '\n';
  }
  if (!out) throw InputError("write failed for " + path);
}

void write_batch_csv(const std::string& path, const std::string& comment, const Batch& batch) {
  std::vector<std::string> header{"chain"};
  for (Eigen::Index j = 0; j < batch.cols(); ++j) header.push_back("x" + std::to_string(j + 1));
  Matrix rows(batch.rows(), batch.cols() + 1);
  for (Eigen::Index i = 0; i < batch.rows(); ++i) {
    rows(i, 0) = static_cast<double>(i);
    rows.row(i).tail(batch.cols()) = batch.row(i);
  }
  write_csv(path, comment, header, rows);
}

void write_trajectory_csv(const std::string& path, const std::string& comment,
                          const Trajectory& trajectory) {
  const Eigen::Index n = trajectory.states.empty() ? 0 : trajectory.states.front().size();
  std::vector<std::string> header{"time"};
  for (Eigen::Index j = 0; j < n; ++j) header.push_back("x" + std::to_string(j + 1));
  for (Eigen::Index j = 0; j < n; ++j) header.push_back("refl" + std::to_string(j + 1));
  Matrix rows(static_cast<Eigen::Index>(trajectory.times.size()), 2 * n + 1);
  for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    rows(r, 0) = trajectory.times[i];
    rows.row(r).segment(1, n) = trajectory.states[i].transpose();
    rows.row(r).segment(1 + n, n) = trajectory.reflections[i].transpose();
  }
  write_csv(path, comment, header, rows);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  CsvTable t;
  std::string line;
  std::vector<std::vector<double>> rows;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0 && !have_header) {
      t.comment = line.substr(2);
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    if (!have_header) {
      while (std::getline(ss, cell, ',')) t.header.push_back(cell);
      have_header = true;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  const Eigen::Index cols = rows.empty() ? static_cast<Eigen::Index>(t.header.size())
                                         : static_cast<Eigen::Index>(rows.front().size());
  t.rows.resize(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != cols) throw InputError(path + ": ragged CSV");
    for (Eigen::Index j = 0; j < cols; ++j) t.rows(i, j) = rows[i][j];
  }
  return t;
}

void write_json(const std::string& path, const Json& value) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open " + path + " for writing");
  out << value.dump(2) << '\n';
  if (!out) throw InputError("write failed for " + path);
}

Json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<file>", path + ": " + e.what());
  }
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace psgla
