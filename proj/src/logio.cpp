#include "maple/logio.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace maple {
namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

MetricsCsv::MetricsCsv(const std::string& path) : os_(path) {
  if (!os_) throw std::runtime_error("cannot open metrics csv: " + path);
  os_ << "env_steps,return_norm,success_rate,alpha_tsk,alpha_p\n";
  os_.flush();
}

void MetricsCsv::append(const MetricRecord& r) {
  os_ << r.env_steps << ',' << fmt_double(r.return_norm) << ','
      << fmt_double(r.success_rate) << ',' << fmt_double(r.alpha_tsk) << ','
      << fmt_double(r.alpha_p) << '\n';
  os_.flush();
}

std::vector<MetricRecord> read_metrics_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read metrics csv: " + path);
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("empty metrics csv: " + path);
  if (line != "env_steps,return_norm,success_rate,alpha_tsk,alpha_p")
    throw std::runtime_error("unexpected metrics header: " + line);
  std::vector<MetricRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    MetricRecord r;
    std::getline(ss, cell, ',');
    r.env_steps = std::stol(cell);
    std::getline(ss, cell, ',');
    r.return_norm = std::stod(cell);
    std::getline(ss, cell, ',');
    r.success_rate = std::stod(cell);
    std::getline(ss, cell, ',');
    r.alpha_tsk = std::stod(cell);
    std::getline(ss, cell, ',');
    r.alpha_p = std::stod(cell);
    out.push_back(r);
  }
  return out;
}

std::vector<double> smooth(const std::vector<double>& xs, int window) {
  if (window <= 0) throw std::invalid_argument("window must be positive");
  std::vector<double> out(xs.size());
  double acc = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    acc += xs[i];
    if (i >= static_cast<size_t>(window)) acc -= xs[i - window];
    size_t n = std::min(i + 1, static_cast<size_t>(window));
    out[i] = acc / static_cast<double>(n);
  }
  return out;
}

TrajectoryLog::TrajectoryLog(const std::string& path) : os_(path) {
  if (!os_) throw std::runtime_error("cannot open trajectory log: " + path);
}

void TrajectoryLog::append(const EpisodeLogEntry& e) {
  nlohmann::json j;
  j["episode"] = e.episode;
  j["env_steps"] = e.env_steps;
  j["env_seed"] = e.env_seed;
  std::vector<std::string> tokens;
  tokens.reserve(e.sketch.size());
  for (PrimitiveId p : e.sketch) tokens.emplace_back(primitive_name(p));
  j["sketch"] = tokens;
  j["task_return"] = e.task_return;
  j["atomic_steps"] = e.atomic_steps;
  j["success"] = e.success;
  os_ << j.dump() << '\n';
  os_.flush();
}

void write_sketches(const std::string& path,
                    const std::vector<TaskSketch>& sketches) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open sketch file: " + path);
  for (const TaskSketch& s : sketches) {
    nlohmann::json j;
    std::vector<std::string> tokens;
    tokens.reserve(s.tokens.size());
    for (PrimitiveId p : s.tokens) tokens.emplace_back(primitive_name(p));
    j["tokens"] = tokens;
    j["success"] = s.success;
    j["return"] = s.episode_return;
    os << j.dump() << '\n';
  }
}

std::vector<TaskSketch> read_sketches(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read sketch file: " + path);
  std::vector<TaskSketch> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    TaskSketch s;
    for (const auto& tok : j.at("tokens"))
      s.tokens.push_back(primitive_from_name(tok.get<std::string>()));
    s.success = j.value("success", false);
    s.episode_return = j.value("return", 0.0);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace maple
