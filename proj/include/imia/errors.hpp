#ifndef IMIA_ERRORS_HPP
#define IMIA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace imia {

// Query kind not permitted at the oracle's access level.
struct AccessViolation : std::runtime_error {
    explicit AccessViolation(const std::string& msg) : std::runtime_error(msg) {}
};

// Query budget would be exceeded by this call.
struct BudgetExhausted : std::runtime_error {
    explicit BudgetExhausted(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file (IDX, CSV, checkpoint manifest, ...).
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid experiment configuration; maps to exit code 2 in the CLI.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem / socket failure; maps to exit code 3 in the CLI.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace imia

#endif
