#pragma once

#include "marlens/diagnostics.hpp"

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace marlens {

/// Malformed metrics file; `line` is 1-based.
struct ParseError : std::runtime_error {
  ParseError(const std::string& what, int line_no)
      : std::runtime_error(what + " (line " + std::to_string(line_no) + ")"),
        line(line_no) {}
  int line = 0;
};

struct EvalPoint {
  long step = 0;
  std::vector<double> agent_returns;
  double team_return = 0.0;
};

struct TaskSwitchEvent {
  long step = 0;
  TaskSwitchProfile profile;
};

struct TrainLoss {
  long step = 0;
  double loss = 0.0;
  double epsilon = 0.0;
};

using MetricsEvent = std::variant<EvalPoint, DiagnosticsRecord, TaskSwitchEvent, TrainLoss>;

long event_step(const MetricsEvent& e);

bool operator==(const EvalPoint& a, const EvalPoint& b);
bool operator==(const DiagnosticsRecord& a, const DiagnosticsRecord& b);
bool operator==(const TaskSwitchEvent& a, const TaskSwitchEvent& b);
bool operator==(const TrainLoss& a, const TrainLoss& b);

std::string metrics_path(const std::string& run_dir);

/// One JSON object per line after a schema-versioned header line.
/// Events must be non-decreasing in step. read(write(x)) == x.
void write_metrics(const std::string& run_dir, const std::vector<MetricsEvent>& events);
std::vector<MetricsEvent> read_metrics(const std::string& run_dir);

} // namespace marlens
