#pragma once

#include <stdexcept>
#include <string>

namespace copkit {

// Invalid layout, radio, grid or GA parameters, and unresolvable pipeline inputs.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed scenario / dataset / model files. Carries a 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what, int line = 0)
        : std::runtime_error(with_line(what, line)), line_(line) {}

    int line() const { return line_; }

private:
    static std::string with_line(const std::string& what, int line) {
        if (line <= 0) return what;
        return what + " (line " + std::to_string(line) + ")";
    }

    int line_ = 0;
};

// A regression fit could not be completed (too few rows, rank deficiency).
class FitError : public std::runtime_error {
public:
    explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

// SINR was requested for a user that no cell accepted.
class OutageError : public std::runtime_error {
public:
    explicit OutageError(const std::string& what) : std::runtime_error(what) {}
};

// Every user in the data-gathering set is in outage, so no mean SINR exists.
class DegenerateKpiError : public std::runtime_error {
public:
    DegenerateKpiError(const std::string& what, int outage_count)
        : std::runtime_error(what), outage_count_(outage_count) {}

    int outage_count() const { return outage_count_; }

private:
    int outage_count_ = 0;
};

}  // namespace copkit
