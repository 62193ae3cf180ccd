#pragma once

#include "seqimp/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace seqimp {

/// Exit status of a stability command that found an unstable case.
inline constexpr int kExitUnstable = 2;

struct CommandResult {
    int exit_code = 0;
    std::vector<std::filesystem::path> files;
    /// Human-readable lines for stdout.
    std::vector<std::string> summary;
};

const std::vector<std::string>& command_names();

/// Dispatch `bode`, `nyquist`, `passivity`, `marginal`, `measure`,
/// `simulate` or `verify`. Files go to cfg.output.dir.
CommandResult run_command(const std::string& command, const Config& cfg);

struct IdentityCheck {
    std::string name;
    double max_error;
    double tolerance;
    bool passed;
};

/// Cross-model identities evaluated at the configured operating condition.
std::vector<IdentityCheck> run_identity_suite(const Config& cfg);

}  // namespace seqimp
