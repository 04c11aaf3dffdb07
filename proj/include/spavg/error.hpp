#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace spavg {

/// Broad failure classes. The C API maps each one onto a status code and the
/// CLI maps those onto process exit codes.
enum class ErrorKind {
    Domain,      // a state left the declared domain or hit the excluded region
    Assumption,  // a standing hypothesis was found violated by the data
    Config,      // malformed configuration or unknown key
    Numeric,     // solver exhaustion, non-finite values
    Argument,    // precondition on an argument violated
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised when evaluation or integration touches a point outside the domain.
/// Carries the offending point and, for integrations, the first exit time.
class DomainError : public Error {
public:
    DomainError(const std::string& what, std::vector<double> point, double time = 0.0)
        : Error(ErrorKind::Domain, what), point_(std::move(point)), time_(time) {}
    [[nodiscard]] const std::vector<double>& point() const noexcept { return point_; }
    [[nodiscard]] double time() const noexcept { return time_; }

private:
    std::vector<double> point_;
    double time_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
    if (!cond) throw Error(ErrorKind::Argument, what);
}

}  // namespace spavg
