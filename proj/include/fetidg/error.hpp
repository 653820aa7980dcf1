#pragma once

#include <stdexcept>
#include <string>

namespace fetidg {

/// Invalid user input: bad partition, mesh size, coefficient, penalty, preset.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical failure during setup or solve (non-SPD factorization, guard exceeded).
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace fetidg
