#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "psgla/sampler.h"
#include "psgla/types.h"

namespace psgla {

using Json = nlohmann::ordered_json;

// %.17g: enough digits to round-trip any double.
std::string format_double(double v);

// Writes `# <comment>` (if non-empty), a header line and one row per matrix row.
void write_csv(const std::string& path, const std::string& comment,
               const std::vector<std::string>& header, const Matrix& rows);

struct CsvTable {
  std::string comment;
  std::vector<std::string> header;
  Matrix rows;
};
CsvTable read_csv(const std::string& path);

// Terminal batch as columns (chain, x1..xn).
void write_batch_csv(const std::string& path, const std::string& comment, const Batch& batch);
// Trajectory as columns (time, x1..xn, refl1..refln).
void write_trajectory_csv(const std::string& path, const std::string& comment,
                          const Trajectory& trajectory);

// Pretty-printed JSON with a trailing newline. Non-finite numbers must be
// converted by the caller (nlohmann writes them as null).
void write_json(const std::string& path, const Json& value);
Json read_json(const std::string& path);

// Number or null for non-finite values.
Json finite_or_null(double v);

}  // namespace psgla
