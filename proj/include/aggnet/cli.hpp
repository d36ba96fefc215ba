#pragma once

#include "aggnet/inference.hpp"
#include "aggnet/io.hpp"
#include "aggnet/validation.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>

namespace aggnet::cli {

enum ExitCode : int {
    kSuccess = 0,
    kValidationFailure = 1,  // failed checks or inconsistent input data
    kIoFailure = 2,
    kConfigFailure = 3,  // bad configuration file or command line
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    int q = 2;
    NetworkKind kind;
    PriorConfig prior;
    SamplerConfig sampler;
    std::uint64_t simulation_seed = 0;
    std::optional<std::filesystem::path> aggregate_path;
    std::optional<std::filesystem::path> sizes_path;
    std::optional<std::filesystem::path> truth_path;
    std::optional<std::filesystem::path> output_dir;
    // Generating parameters from a [truth] section, used by simulate.
    std::optional<TruthSpec> truth;
    ValidationOptions validation;
};

/// Parses an INI run configuration. Relative data paths resolve against the
/// configuration file's directory and are checked when a command reads them.
RunConfig load_run_config(const std::filesystem::path& path);

void cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir);
void cmd_fit(const RunConfig& cfg, const std::filesystem::path& out_dir);
ValidationReport cmd_validate(const ValidationOptions& opts, const std::filesystem::path& out_dir);
void cmd_export_plots(const std::filesystem::path& fit_dir, const std::filesystem::path& out_dir);

/// Command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv);

}  // namespace aggnet::cli
