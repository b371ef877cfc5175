#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace mmabsax {

// Fast self-contained property checks behind the CLI `check` subcommand.
struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<CheckResult> run_all_checks(std::uint64_t seed);

} // namespace mmabsax
