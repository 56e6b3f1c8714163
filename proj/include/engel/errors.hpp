// Exception taxonomy for the engel library.
//
// Four failure classes are distinguished so that callers (and the CLI exit
// code logic) can react differently:
//   DomainError        invalid input (lambda = 0, negative index, bad spec)
//   ConvergenceError   a tolerance was requested but not met; carries the
//                      achieved discrepancy so callers can report it
//   TruncationError    a finite domain or finite index cutoff was too small
//   ExtrapolationError evaluation outside the tabulated domain
#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace engel {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {
inline std::string short_float(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}
} // namespace detail

class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& msg, double achieved, double requested)
        : Error(msg + " (achieved " + detail::short_float(achieved) +
                ", requested " + detail::short_float(requested) + ")"),
          achieved_(achieved), requested_(requested) {}
    double achieved() const noexcept { return achieved_; }
    double requested() const noexcept { return requested_; }

private:
    double achieved_;
    double requested_;
};

class TruncationError : public Error {
public:
    TruncationError(const std::string& msg, double leakage)
        : Error(msg + " (boundary leakage " + detail::short_float(leakage) + ")"),
          leakage_(leakage) {}
    double leakage() const noexcept { return leakage_; }

private:
    double leakage_;
};

class ExtrapolationError : public Error {
public:
    explicit ExtrapolationError(const std::string& msg) : Error(msg) {}
};

} // namespace engel
