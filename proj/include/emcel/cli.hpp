#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

namespace emcel {

/// One batch job. `params` holds the command's options as given on the
/// command line; unspecified ones take their defaults inside run().
struct JobSpec {
    std::string command;  // scale-table, simulate, check, order, compare-euler
    std::filesystem::path measure_config;
    std::map<std::string, std::string> params;
    std::filesystem::path out_dir;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitReportFailed = 1;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitInternalError = 3;

/// Runs the job, writing outputs under out_dir and diagnostics to `log`.
/// Returns 0 on success, 1 when a property report failed, 2 on input errors,
/// 3 on unexpected internal failures.
int run(const JobSpec& job, std::ostream& log);

}  // namespace emcel
