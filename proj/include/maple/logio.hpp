#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "maple/core.hpp"

namespace maple {

// One evaluation point on the learning curve.
struct MetricRecord {
  long env_steps = 0;
  double return_norm = 0.0;   // mean normalised episode return, 0..100
  double success_rate = 0.0;  // fraction of eval episodes that succeeded
  double alpha_tsk = 0.0;
  double alpha_p = 0.0;
  std::vector<double> usage;  // greedy selection frequency per primitive
};

// Appends rows as they arrive; flushed per row so partial runs stay readable.
class MetricsCsv {
 public:
  explicit MetricsCsv(const std::string& path);
  void append(const MetricRecord& r);

 private:
  std::ofstream os_;
};

std::vector<MetricRecord> read_metrics_csv(const std::string& path);

// Trailing moving average over the last `window` records (not env steps).
std::vector<double> smooth(const std::vector<double>& xs, int window);

// Per-episode training log, one JSON object per line.
struct EpisodeLogEntry {
  long episode = 0;
  long env_steps = 0;  // cumulative atomic steps after this episode
  uint64_t env_seed = 0;
  std::vector<PrimitiveId> sketch;
  double task_return = 0.0;
  int atomic_steps = 0;
  bool success = false;
};

class TrajectoryLog {
 public:
  explicit TrajectoryLog(const std::string& path);
  void append(const EpisodeLogEntry& e);

 private:
  std::ofstream os_;
};

// Sketch corpus io (JSON lines with tokens / success / return fields).
void write_sketches(const std::string& path,
                    const std::vector<TaskSketch>& sketches);
std::vector<TaskSketch> read_sketches(const std::string& path);

}  // namespace maple
