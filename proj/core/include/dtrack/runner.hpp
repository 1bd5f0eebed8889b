#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace dtrack {

// A resolved CLI invocation. Flag values override the config file.
struct RunOptions {
    std::string subcommand;  // simulate | track | vxx | calibrate | verify
    std::string config_path; // optional for track/vxx/verify (built-in defaults)
    std::string out_dir = ".";
    std::optional<int> paths;
    std::optional<std::uint64_t> seed;
    std::optional<double> dt;
};

// Executes one subcommand, writing CSVs plus a manifest.txt with the fully
// resolved parameter set into out_dir. Throws ConfigError / NumericalError /
// IoError; returns 0 on success.
int run(const RunOptions& options);

// run() wrapped with the error-to-exit-code mapping: 0 success, 2 bad
// configuration or I/O, 3 numerical failure.
int run_with_exit_code(const RunOptions& options);

// Built-in default configs (INI text) for the subcommands that have them.
std::string builtin_track_config();
std::string builtin_vxx_config();
std::string builtin_verify_config();

} // namespace dtrack
