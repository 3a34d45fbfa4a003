#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "emcel/measure.hpp"

namespace emcel {

/// Invalid measure config; line and column are 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string origin, std::size_t line, std::size_t column, const std::string& msg);
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

struct MeasureConfig {
    std::shared_ptr<const SpeedMeasure> measure;
    /// Diffusion coefficient when every piece was given as `eta`.
    std::function<double(double)> eta;
    /// Non-fatal findings, such as l_in_I disagreeing with Feller's test.
    std::vector<std::string> warnings;
};

/// Parses a JSON measure config (format in docs/measure-config.md).
MeasureConfig parse_measure_config(std::string_view text, const std::string& origin = "<config>");
MeasureConfig load_measure_config(const std::filesystem::path& path);

}  // namespace emcel
