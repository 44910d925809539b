// Runs the acceptance battery and the determinism criterion; one line per
// criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "battery.hpp"
#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 2024;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void line(int id, const std::string& name, bool pass, double secs, const std::string& detail) {
  std::printf("%s %2d %-26s %7.1fs  %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), secs, detail.c_str());
  std::fflush(stdout);
}

bool determinism(std::string& detail) {
  const auto base = fs::temp_directory_path() / "sslab_acceptance";
  fs::remove_all(base);
  const std::vector<std::string> files{"results.json", "results.csv"};
  std::vector<fs::path> dirs{base / "a", base / "b"};
  for (const auto& d : dirs) {
    std::ostringstream out, err;
    const int code = sslab::cli::run({"--out", d.string(), "--seed", std::to_string(kSeed), "verify", "--checks",
                                      "[2, 3, 6, 7, 8, 10]"},
                                     out, err);
    if (code != 0) {
      detail = "verify exited with " + std::to_string(code) + ": " + err.str();
      return false;
    }
  }
  for (const auto& f : files) {
    if (slurp(dirs[0] / f) != slurp(dirs[1] / f)) {
      detail = f + " differs between runs";
      return false;
    }
  }
  detail = "results.json and results.csv identical across two runs";
  fs::remove_all(base);
  return true;
}

}  // namespace

int main() {
  int failed = 0;
  for (const auto& c : sslab::battery::checks()) {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
      const auto r = c.run(kSeed);
      pass = r.pass;
      detail = r.summary;
    } catch (const std::exception& e) {
      detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    line(c.id, c.name, pass, secs, detail);
    failed += !pass;
  }
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  const bool pass = determinism(detail);
  line(12, "determinism", pass, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), detail);
  failed += !pass;
  std::printf("%d of 12 criteria passed\n", 12 - failed);
  return failed == 0 ? 0 : 1;
}
