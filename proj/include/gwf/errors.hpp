#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gwf {

/// Base of every error raised by the library. `kind()` is a stable,
/// machine-readable tag used by the CLI error reporter.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct InvalidInput : Error {
    explicit InvalidInput(const std::string& what) : Error("invalid_input", what) {}
};

struct InvalidDistribution : Error {
    explicit InvalidDistribution(const std::string& what) : Error("invalid_distribution", what) {}
};

struct RankDeficient : Error {
    explicit RankDeficient(const std::string& what) : Error("rank_deficient", what) {}
};

struct UnsupportedLatitude : Error {
    explicit UnsupportedLatitude(const std::string& what) : Error("unsupported_latitude", what) {}
};

struct InsufficientData : Error {
    InsufficientData(const std::string& what, int hour = -1)
        : Error("insufficient_data", what), hour_(hour) {}

    /// Hour-of-day bucket that was empty, or -1 when not applicable.
    int hour() const noexcept { return hour_; }

private:
    int hour_;
};

struct TrainingDataError : Error {
    explicit TrainingDataError(const std::string& what) : Error("training_data", what) {}
};

struct LoadError : Error {
    LoadError(const std::string& what, std::size_t line = 0)
        : Error("load_error", line ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct EmptyReport : Error {
    explicit EmptyReport(const std::string& what) : Error("empty_report", what) {}
};

/// Raised by config validation; carries every violated constraint.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> violations)
        : Error("config_error", join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "invalid configuration:";
        for (const auto& s : v) out += "\n  - " + s;
        return out;
    }
    std::vector<std::string> violations_;
};

}  // namespace gwf
