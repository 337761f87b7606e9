#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace clob {

/// Invalid parameters or configuration documents.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Inputs outside an operation's mathematical domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A simulation could not continue. Carries the density slice that
/// triggered the failure so callers can dump it.
class SimulationError : public std::runtime_error {
public:
    SimulationError(const std::string& what, std::size_t book, double time,
                    std::vector<double> snapshot)
        : std::runtime_error(what), book_(book), time_(time), snapshot_(std::move(snapshot)) {}

    std::size_t book() const noexcept { return book_; }
    double time() const noexcept { return time_; }
    const std::vector<double>& snapshot() const noexcept { return snapshot_; }

private:
    std::size_t book_;
    double time_;
    std::vector<double> snapshot_;
};

}  // namespace clob
