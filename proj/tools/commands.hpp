#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "sresn/config.hpp"

namespace sresn::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kNumerical = 2, kIo = 3 };

struct Invocation {
  std::string command;
  config::RunConfig config;
  std::filesystem::path out;
  std::size_t jobs = 1;
  // train-eval / transfer-fn: rebuild the reservoir from this snapshot.
  std::filesystem::path replay;
};

// Each command writes config.json and metadata.json next to its data files.
// Library exceptions propagate; main maps them to exit codes.
int cmd_generate_mg(const Invocation& inv);
int cmd_train_eval(const Invocation& inv);
int cmd_transfer_fn(const Invocation& inv);
int cmd_reg_study(const Invocation& inv);
int cmd_sweep(const Invocation& inv);

}  // namespace sresn::cli
