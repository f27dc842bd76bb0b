#pragma once

#include <memory>
#include <string>

#include "hosm/config.hpp"
#include "hosm/distributions.hpp"

namespace hosm {

// Exit codes shared by the CLI: 0 success, 1 validation error, 2 numerical
// divergence. Commands write their outputs under out_dir.
constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitDivergence = 2;

std::unique_ptr<Density> make_distribution(const Config& cfg);

int cmd_train(const Config& cfg, const std::string& out_dir);
int cmd_eval(const Config& cfg, const std::string& out_dir);
int cmd_bench(const Config& cfg, const std::string& out_dir);
int cmd_sample(const Config& cfg, const std::string& out_dir);
int cmd_denoise(const Config& cfg, const std::string& out_dir);

// Applies --seed to every stage seed in the config, then dispatches.
int run_command(const std::string& name, Config cfg, const std::string& out_dir, const std::string& seed_override);

}  // namespace hosm
