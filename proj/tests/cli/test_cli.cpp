#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("aiqm_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

Run run(const std::string& args, const std::string& env = "") {
  const fs::path err = scratch() / "stderr.txt";
  const std::string cmd = env + " " + std::string(AIQM_CLI_PATH) + " " + args + " 2>" + err.string();
  Run r{0, "", ""};
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  r.err = ss.str();
  return r;
}

fs::path write(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

const char* kSmall = R"({
  "experiment": "custom-sweep",
  "physics": {"N": 16},
  "modes": ["ideal", "bare"],
  "sweep": {"axis": "t_s", "values": [0.01, 0.02, 0.04]}
})";

}  // namespace

TEST_CASE("list-presets") {
  const Run r = run("list-presets");
  CHECK(r.code == 0);
  CHECK(r.out.find("fig2-panels") != std::string::npos);
  CHECK(r.out.find("fig4-noise") != std::string::npos);
  CHECK(r.out.find("custom-sweep") != std::string::npos);
}

TEST_CASE("validate") {
  CHECK(run("validate fig3-ratio").code == 0);
  CHECK(run("validate " + write("ok.json", kSmall).string()).code == 0);

  const Run bad = run("validate " + write("bad.json", R"({"physics": {"N": -2}, "sweep": {"axis": "omega_q", "values": [1]}})").string());
  CHECK(bad.code == 3);
  std::istringstream lines(bad.err);
  std::string line;
  bool saw_n = false, saw_axis = false;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["level"] == "error");
    saw_n |= j["field"] == "physics.N";
    saw_axis |= j["field"] == "sweep.axis";
  }
  CHECK(saw_n);
  CHECK(saw_axis);

  const Run broken = run("validate " + write("broken.json", "{").string());
  CHECK(broken.code == 3);
  CHECK(broken.err.find("<root>") != std::string::npos);
}

TEST_CASE("shipped configs validate") {
  for (const auto& entry : std::filesystem::directory_iterator(AIQM_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    INFO(entry.path().string());
    CHECK(run("validate " + entry.path().string()).code == 0);
  }
}

TEST_CASE("run writes identical CSV for any worker count") {
  const fs::path cfg = write("small.json", kSmall);
  const fs::path a = scratch() / "a.csv", b = scratch() / "b.csv";
  REQUIRE(run("run " + cfg.string() + " --workers 1 --output " + a.string()).code == 0);
  REQUIRE(run("run " + cfg.string() + " --output " + b.string(), "AIQM_WORKERS=4").code == 0);
  std::ifstream fa(a), fb(b);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().find("delta_omega0_bare [rad/time]") != std::string::npos);
  CHECK(sa.str().find("timestamp") == std::string::npos);
}

TEST_CASE("run options") {
  const fs::path cfg = write("small2.json", kSmall);
  const Run ideal = run("run " + cfg.string() + " --mode ideal");
  CHECK(ideal.code == 0);
  CHECK(ideal.out.find("jz_mean_ideal") != std::string::npos);
  CHECK(ideal.out.find("jz_mean_bare") == std::string::npos);

  const Run js = run("run " + cfg.string() + " --format json --timestamp");
  CHECK(js.code == 0);
  const auto j = nlohmann::json::parse(js.out);
  CHECK(j["rows"].size() == 3);
  CHECK(j["metadata"].contains("timestamp"));

  CHECK(run("run " + cfg.string() + " --mode warp").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("run /nonexistent.json").code == 3);
}

TEST_CASE("husimi writes four checkpoint maps") {
  const fs::path cfg = write("h.json", R"({"experiment": "fig4-compare", "physics": {"N": 12}, "husimi": {"n_theta": 9, "n_phi": 16}})");
  const fs::path dir = scratch() / "husimi";
  const Run r = run("husimi " + cfg.string() + " --output " + dir.string());
  REQUIRE(r.code == 0);
  for (const char* name : {"initial", "entangled", "encoded", "readout"}) {
    const fs::path p = dir / (std::string("husimi_") + name + ".csv");
    CHECK(fs::exists(p));
    std::ifstream in(p);
    std::string header;
    std::getline(in, header);
    CHECK(header == "theta,phi,q");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 9 * 16);
  }
}
