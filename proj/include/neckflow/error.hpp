#pragma once

#include <stdexcept>
#include <string>

namespace neckflow {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Argument outside the domain of an operation (out of neck, bad parameter).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// The entry vector is asymptotic to the closed geodesic (|c| == 1).
class AsymptoticEntryError : public DomainError {
public:
    explicit AsymptoticEntryError(const std::string& msg) : DomainError(msg) {}
};

/// An integral that the caller asked for does not converge.
class DivergenceError : public DomainError {
public:
    explicit DivergenceError(const std::string& msg) : DomainError(msg) {}
};

/// A numerical routine could not reach the requested accuracy.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& msg, double achieved)
        : Error(msg), achieved_(achieved) {}
    double achieved() const { return achieved_; }

private:
    double achieved_;
};

/// ODE integration gave up (step underflow or blow-up); carries the time reached.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& msg, double t_reached)
        : Error(msg), t_reached_(t_reached) {}
    double time_reached() const { return t_reached_; }

private:
    double t_reached_;
};

/// Riccati solution escaped to infinity somewhere in [t_lo, t_hi].
class BlowUpError : public IntegrationError {
public:
    BlowUpError(const std::string& msg, double t_lo, double t_hi)
        : IntegrationError(msg, t_lo), t_lo_(t_lo), t_hi_(t_hi) {}
    double bracket_lo() const { return t_lo_; }
    double bracket_hi() const { return t_hi_; }

private:
    double t_lo_;
    double t_hi_;
};

} // namespace neckflow
