// Runs every shipped criterion config and prints one PASS/FAIL line each.
// Exit status is nonzero when any criterion fails.

#include "vlab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <vector>

#ifndef VLAB_CONFIG_DIR
#error "VLAB_CONFIG_DIR must name the configs directory"
#endif

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  const fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::path(VLAB_CONFIG_DIR);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.path().extension() == ".ini" && name.size() > 3 && name[0] == 'c' && std::isdigit(name[1])) {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    std::printf("no criterion configs in %s\n", dir.string().c_str());
    return 2;
  }
  int failed = 0;
  for (const auto& f : files) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string label = f.stem().string(), line;
    bool ok = false;
    try {
      const vlab::Config cfg = vlab::Config::from_file(f.string());
      const std::string id = cfg.get_string("experiment.criterion", "?");
      label = "criterion " + id + " (" + f.stem().string() + ")";
      const vlab::Report rep = vlab::run_experiment(cfg);
      ok = rep.passed();
      line = rep.headline();
    } catch (const std::exception& e) {
      line = std::string("error: ") + e.what();
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s: %s [%.1fs]\n", ok ? "PASS" : "FAIL", label.c_str(), line.c_str(), s);
    std::fflush(stdout);
    if (!ok) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(files.size()) - failed, files.size());
  return failed == 0 ? 0 : 1;
}
