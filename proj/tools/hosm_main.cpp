#include <iostream>
#include <string>

#include "hosm/commands.hpp"

namespace {

void usage() {
  std::cerr << "usage: hosm <train|eval|bench|sample|denoise> --config <file> [--out <dir>] [--seed <u64>]\n"
            << "exit codes: 0 ok, 1 validation error, 2 numerical divergence\n";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    usage();
    return hosm::kExitValidation;
  }
  const std::string command = argv[1];
  std::string config_path, out_dir = "out", seed;
  for (int i = 2; i < argc; ++i) {
    const std::string arg = argv[i];
    auto next = [&](const char* flag) -> std::string {
      if (i + 1 >= argc) {
        std::cerr << "hosm: missing value for " << flag << "\n";
        std::exit(hosm::kExitValidation);
      }
      return argv[++i];
    };
    if (arg == "--config")
      config_path = next("--config");
    else if (arg == "--out")
      out_dir = next("--out");
    else if (arg == "--seed")
      seed = next("--seed");
    else if (arg == "--help" || arg == "-h") {
      usage();
      return hosm::kExitOk;
    } else {
      std::cerr << "hosm: unknown argument " << arg << "\n";
      return hosm::kExitValidation;
    }
  }
  if (config_path.empty()) {
    std::cerr << "hosm: --config is required\n";
    return hosm::kExitValidation;
  }
  hosm::Config cfg;
  try {
    cfg = hosm::Config::parse_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "hosm: " << e.what() << "\n";
    return hosm::kExitValidation;
  }
  return hosm::run_command(command, std::move(cfg), out_dir, seed);
}
