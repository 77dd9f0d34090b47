#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "uekit/blackbox.hpp"
#include "uekit/core.hpp"
#include "uekit/metrics.hpp"

namespace uekit::cli {

// Runs the command line (without the program name). Returns the process exit
// code: 0 on success, the ErrorKind value on failure, after writing one line
// `error[<kind>]: <message>` to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct ScoreRow {
  std::string id;
  std::string method;
  Orientation orientation = Orientation::kConfidence;
  double value = 0.0;
};

// Scores CSV: header `id,method,orientation,value`, values printed with %.17g.
std::string scores_to_csv(const std::vector<ScoreRow>& rows);
std::vector<ScoreRow> scores_from_csv(const std::string& text);

// Rows for one method joined by id with the records' correctness labels.
// Scores are converted to confidence orientation.
metrics::ScoredRecordSet join_labels(const std::vector<ScoreRow>& rows,
                                     const std::string& method, const Dataset& labels);

}  // namespace uekit::cli
