#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "maple/logio.hpp"

using namespace maple;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("metrics csv writes the exact header and row format") {
  auto path = temp_file("maple_metrics_fmt.csv");
  {
    MetricsCsv csv(path.string());
    MetricRecord r;
    r.env_steps = 15000;
    r.return_norm = 42.53125;
    r.success_rate = 0.3;
    r.alpha_tsk = 1.0;
    r.alpha_p = 0.0078125;
    csv.append(r);
  }
  CHECK(slurp(path) ==
        "env_steps,return_norm,success_rate,alpha_tsk,alpha_p\n"
        "15000,42.53125,0.3,1,0.0078125\n");
  std::filesystem::remove(path);
}

TEST_CASE("metrics csv round-trips and rejects foreign files") {
  auto path = temp_file("maple_metrics_rt.csv");
  {
    MetricsCsv csv(path.string());
    for (int i = 0; i < 5; ++i) {
      MetricRecord r;
      r.env_steps = 3000L * (i + 1);
      r.return_norm = 10.0 * i + 0.125;
      r.success_rate = 0.05 * i;
      r.alpha_tsk = 1.0 / (i + 1);
      r.alpha_p = 0.25 * i;
      csv.append(r);
    }
  }
  auto rows = read_metrics_csv(path.string());
  REQUIRE(rows.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(rows[static_cast<size_t>(i)].env_steps == 3000L * (i + 1));
    CHECK(rows[static_cast<size_t>(i)].return_norm ==
          doctest::Approx(10.0 * i + 0.125).epsilon(1e-12));
    CHECK(rows[static_cast<size_t>(i)].success_rate ==
          doctest::Approx(0.05 * i).epsilon(1e-12));
    // Values are written with ten significant digits.
    CHECK(rows[static_cast<size_t>(i)].alpha_tsk ==
          doctest::Approx(1.0 / (i + 1)).epsilon(1e-9));
    CHECK(rows[static_cast<size_t>(i)].alpha_p ==
          doctest::Approx(0.25 * i).epsilon(1e-12));
  }
  std::filesystem::remove(path);

  auto foreign = temp_file("maple_metrics_foreign.csv");
  std::ofstream(foreign) << "steps,reward\n1,2\n";
  CHECK_THROWS_AS(read_metrics_csv(foreign.string()), std::runtime_error);
  std::filesystem::remove(foreign);
  CHECK_THROWS_AS(read_metrics_csv("/nonexistent/metrics.csv"),
                  std::runtime_error);
}

TEST_CASE("smooth is a trailing window mean") {
  std::vector<double> xs = {1, 2, 3, 4, 5};
  auto s3 = smooth(xs, 3);
  REQUIRE(s3.size() == 5);
  CHECK(s3[0] == doctest::Approx(1.0));
  CHECK(s3[1] == doctest::Approx(1.5));
  CHECK(s3[2] == doctest::Approx(2.0));
  CHECK(s3[3] == doctest::Approx(3.0));
  CHECK(s3[4] == doctest::Approx(4.0));

  auto s1 = smooth(xs, 1);
  CHECK(s1 == xs);

  // Window larger than the data degenerates to the running mean.
  auto s10 = smooth(xs, 10);
  CHECK(s10[4] == doctest::Approx(3.0));

  CHECK(smooth({}, 4).empty());
  CHECK_THROWS_AS(smooth(xs, 0), std::invalid_argument);
}

TEST_CASE("trajectory log emits one json object per episode") {
  auto path = temp_file("maple_traj.jsonl");
  {
    TrajectoryLog log(path.string());
    EpisodeLogEntry e;
    e.episode = 3;
    e.env_steps = 412;
    e.env_seed = 99;
    e.sketch = {PrimitiveId::Grasp, PrimitiveId::Reach, PrimitiveId::Release};
    e.task_return = 12.5;
    e.atomic_steps = 47;
    e.success = true;
    log.append(e);
    e.episode = 4;
    e.success = false;
    e.sketch = {};
    log.append(e);
  }
  std::ifstream is(path);
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line.find("\"episode\":3") != std::string::npos);
  CHECK(line.find("\"sketch\":[\"grasp\",\"reach\",\"release\"]") !=
        std::string::npos);
  CHECK(line.find("\"success\":true") != std::string::npos);
  CHECK(line.find("\"env_seed\":99") != std::string::npos);
  REQUIRE(std::getline(is, line));
  CHECK(line.find("\"sketch\":[]") != std::string::npos);
  CHECK_FALSE(std::getline(is, line));
  std::filesystem::remove(path);
}

TEST_CASE("sketch corpus round-trips through jsonl") {
  std::vector<TaskSketch> corpus(3);
  corpus[0].tokens = {PrimitiveId::Grasp, PrimitiveId::Reach,
                      PrimitiveId::Release};
  corpus[0].success = true;
  corpus[0].episode_return = 88.25;
  corpus[1].tokens = {PrimitiveId::Atomic, PrimitiveId::Atomic};
  corpus[1].success = false;
  corpus[1].episode_return = -1.5;
  corpus[2].tokens = {};
  corpus[2].success = false;
  corpus[2].episode_return = 0.0;

  auto path = temp_file("maple_sketches.jsonl");
  write_sketches(path.string(), corpus);
  auto back = read_sketches(path.string());
  std::filesystem::remove(path);

  REQUIRE(back.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(back[i].tokens == corpus[i].tokens);
    CHECK(back[i].success == corpus[i].success);
    CHECK(back[i].episode_return ==
          doctest::Approx(corpus[i].episode_return).epsilon(1e-12));
  }
  CHECK_THROWS_AS(read_sketches("/nonexistent/sketches.jsonl"),
                  std::runtime_error);
}
